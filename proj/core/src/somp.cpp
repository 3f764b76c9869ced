// SPDX-License-Identifier: Apache-2.0
#include "irsce/somp.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "irsce/errors.hpp"

namespace irsce {

StopRule StopRule::noise_floor(arma::uword measurements, double noise_var, arma::uword n_paths, double delta)
{
    const double eps = std::sqrt(static_cast<double>(measurements) * noise_var) * (1.0 + delta);
    return {std::min(measurements, 2 * n_paths), eps};
}

arma::cx_mat SparseEstimate::angular_frequency() const
{
    arma::cx_mat out(grid_size(), coefficients.n_cols, arma::fill::zeros);
    for (arma::uword i = 0; i < support.n_elem; ++i)
        out.row(support(i)) = coefficients.row(i);
    return out;
}

namespace {

arma::vec column_norms(const arma::cx_mat& r)
{
    arma::vec n(r.n_cols);
    for (arma::uword k = 0; k < r.n_cols; ++k)
        n(k) = arma::norm(r.col(k));
    return n;
}

/// Lowest index attaining the maximum; negative scores are excluded.
// Scores within a relative 1e-12 of the maximum count as ties, so the pick does not
// depend on rounding when near-duplicate atoms are present.
arma::uword first_argmax(const arma::vec& scores)
{
    const double top = scores.max();
    const double floor = top - 1e-12 * std::abs(top);
    for (arma::uword g = 0; g < scores.n_elem; ++g)
        if (scores(g) >= floor)
            return g;
    return 0;
}

} // namespace

SparseEstimate somp(const arma::cx_mat& y, const arma::cx_mat& a, const StopRule& stop, const SompOptions& options)
{
    if (y.n_rows != a.n_rows)
        throw ShapeError("somp: observations have " + std::to_string(y.n_rows) + " rows, operator has " +
                         std::to_string(a.n_rows));
    if (stop.max_atoms == 0 && stop.residual_threshold <= 0.0)
        throw std::invalid_argument("somp: stopping rule needs a sparsity target or a residual threshold");

    const arma::uword m = a.n_rows;
    const arma::uword g_total = a.n_cols;
    const arma::uword cap = std::min({stop.max_atoms == 0 ? m : stop.max_atoms, m, g_total});

    SparseEstimate est;
    est.grid_rx = g_total;
    est.grid_tx = 1;

    const arma::vec atom_norms = arma::sqrt(arma::sum(arma::square(arma::abs(a)), 0)).t();
    arma::cx_mat residual = y;
    arma::vec norms = column_norms(residual);
    const double numerical_zero = 1e-13 * std::max(norms.max(), 1e-300);

    arma::cx_mat q(m, 0);
    arma::cx_mat r_tri(0, 0);
    std::vector<arma::uword> support;
    std::vector<bool> selected(g_total, false);
    std::vector<arma::vec> history{norms};

    while (support.size() < cap) {
        const double worst = norms.max();
        if (worst <= numerical_zero)
            break;
        if (stop.residual_threshold > 0.0 && worst <= stop.residual_threshold)
            break;

        const arma::cx_mat corr = a.t() * residual;
        arma::vec scores = options.score == AtomScore::l1 ? arma::vec(arma::sum(arma::abs(corr), 1))
                                                          : arma::vec(arma::sqrt(arma::sum(arma::square(arma::abs(corr)), 1)));
        for (arma::uword g = 0; g < g_total; ++g)
            scores(g) = (selected[g] || atom_norms(g) == 0.0) ? -1.0 : scores(g) / atom_norms(g);
        const arma::uword pick = first_argmax(scores);
        if (scores(pick) <= 0.0)
            break;

        // Classical Gram-Schmidt with one reorthogonalization pass.
        const arma::cx_vec col = a.col(pick);
        arma::cx_vec proj = q.t() * col;
        arma::cx_vec v = col - q * proj;
        const arma::cx_vec again = q.t() * v;
        v -= q * again;
        proj += again;
        const double nv = arma::norm(v);

        support.push_back(pick);
        selected[pick] = true;
        if (nv <= options.rank_tolerance * atom_norms(pick)) {
            est.regularized = true;
            break;
        }

        const arma::uword s = r_tri.n_cols;
        r_tri.resize(s + 1, s + 1);
        r_tri(arma::span(0, s), s).zeros();
        if (s > 0)
            r_tri(arma::span(0, s - 1), s) = proj;
        r_tri(s, s) = nv;
        const arma::cx_vec qn = v / nv;
        q.insert_cols(s, qn);

        residual -= qn * (qn.t() * residual);
        norms = column_norms(residual);
        history.push_back(norms);
    }

    est.support = arma::uvec(support);
    const arma::uword s = support.size();
    if (s == 0) {
        est.coefficients.zeros(0, y.n_cols);
    } else if (!est.regularized) {
        // Joint refit on the final support: R c = Q^H Y.
        est.coefficients = arma::solve(arma::trimatu(r_tri), arma::cx_mat(q.t() * y));
    } else {
        const arma::cx_mat as = a.cols(est.support);
        const arma::cx_mat gram = as.t() * as;
        const double lambda = 1e-10 * std::real(arma::trace(gram)) / static_cast<double>(s);
        est.coefficients = arma::solve(arma::cx_mat(gram + lambda * arma::eye<arma::cx_mat>(s, s)),
                                       arma::cx_mat(as.t() * y));
        const arma::cx_mat fit_residual = y - as * est.coefficients;
        history.push_back(column_norms(fit_residual));
    }

    est.residual_norms.set_size(history.size(), y.n_cols);
    for (std::size_t i = 0; i < history.size(); ++i)
        est.residual_norms.row(i) = history[i].t();
    return est;
}

SparseEstimate somp(const arma::cx_mat& y, const SensingOperator& op, const StopRule& stop, const SompOptions& options)
{
    SparseEstimate est = somp(y, op.effective_matrix(), stop, options);
    est.grid_rx = op.dictionary().rx_size();
    est.grid_tx = op.dictionary().tx_size();
    return est;
}

FrequencyChannel synthesize_spatial(const arma::cx_mat& angular, const RedundantDictionary& dict)
{
    if (angular.n_rows != dict.size())
        throw ShapeError("synthesize_spatial: " + std::to_string(angular.n_rows) + " grid rows, dictionary has " +
                         std::to_string(dict.size()));
    const arma::uword n_irs = dict.a_r.n_rows;
    const arma::uword n_ue = dict.a_t.n_rows;
    FrequencyChannel out;
    out.subchannels.set_size(n_irs, n_ue, angular.n_cols);
    for (arma::uword k = 0; k < angular.n_cols; ++k) {
        const arma::cx_mat coeffs = arma::reshape(angular.col(k), dict.rx_size(), dict.tx_size());
        out.subchannels.slice(k) = dict.a_r * coeffs * dict.a_t.t();
    }
    return out;
}

FrequencyChannel reconstruct_spatial(const SparseEstimate& est, const RedundantDictionary& dict)
{
    if (est.grid_size() != dict.size())
        throw ShapeError("reconstruct_spatial: estimate grid does not match dictionary");
    const arma::uword n_irs = dict.a_r.n_rows;
    const arma::uword n_ue = dict.a_t.n_rows;
    const arma::uword k_total = est.coefficients.n_cols;

    FrequencyChannel out;
    out.subchannels.zeros(n_irs, n_ue, k_total);
    if (est.support.is_empty())
        return out;
    const arma::cx_mat psi_s = dict.atoms(est.support);
    const arma::cx_mat h = psi_s * est.coefficients;
    for (arma::uword k = 0; k < k_total; ++k)
        out.subchannels.slice(k) = arma::reshape(h.col(k), n_irs, n_ue);
    return out;
}

arma::cx_mat dft_matrix(arma::uword k, DftConvention convention)
{
    const double scale = convention == DftConvention::unitary ? 1.0 / std::sqrt(static_cast<double>(k)) : 1.0;
    const double w = -2.0 * std::numbers::pi / static_cast<double>(k);
    arma::cx_mat t(k, k);
    for (arma::uword c = 0; c < k; ++c)
        for (arma::uword r = 0; r < k; ++r)
            t(r, c) = std::polar(scale, w * static_cast<double>((r * c) % k));
    return t;
}

AngularDelayGrid angular_delay_transform(const arma::cx_mat& angular, DftConvention convention)
{
    const arma::cx_mat t = dft_matrix(angular.n_cols, convention);
    return {angular * t.t(), convention};
}

arma::cx_mat angular_frequency(const AngularDelayGrid& grid)
{
    const arma::uword k = grid.matrix.n_cols;
    const arma::cx_mat t = dft_matrix(k, grid.convention);
    arma::cx_mat out = grid.matrix * t;
    if (grid.convention == DftConvention::unnormalized)
        out /= static_cast<double>(k);
    return out;
}

FrequencyChannel final_channel(const AngularDelayGrid& enhanced, const RedundantDictionary& dict)
{
    if (enhanced.matrix.n_rows != dict.size())
        throw ShapeError("final_channel: angular-delay grid has " + std::to_string(enhanced.matrix.n_rows) +
                         " rows, dictionary has " + std::to_string(dict.size()));
    return synthesize_spatial(angular_frequency(enhanced), dict);
}

} // namespace irsce
