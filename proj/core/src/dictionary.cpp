// SPDX-License-Identifier: Apache-2.0
#include "irsce/dictionary.hpp"

#include <numbers>
#include <stdexcept>
#include <string>

#include "irsce/errors.hpp"

namespace irsce {

std::vector<AnglePair> angle_grid(arma::uword n_w, arma::uword n_h, arma::uword beta)
{
    if (beta < 1)
        throw std::invalid_argument("angle_grid: beta must be >= 1");
    if (n_w * n_h == 1)
        return {AnglePair{0.0, 0.0}};

    constexpr double pi = std::numbers::pi;
    const arma::uword gw = beta * n_w;
    const arma::uword gh = beta * n_h;
    std::vector<AnglePair> grid;
    grid.reserve(gw * gh);
    for (arma::uword i = 1; i <= gw; ++i) {
        const double az = -pi / 2.0 + static_cast<double>(i) * pi / static_cast<double>(gw);
        for (arma::uword j = 1; j <= gh; ++j) {
            const double el = -pi / 2.0 + static_cast<double>(j) * pi / static_cast<double>(gh);
            grid.push_back({az, el});
        }
    }
    return grid;
}

arma::cx_mat steering_bank(const std::vector<AnglePair>& grid, arma::uword n_w, arma::uword n_h, double spacing)
{
    arma::cx_mat bank(n_w * n_h, grid.size());
    for (std::size_t c = 0; c < grid.size(); ++c)
        bank.col(c) = steering_vector(grid[c].azimuth, grid[c].elevation, n_w, n_h, spacing);
    return bank;
}

RedundantDictionary build_dictionary(const ScenarioConfig& config, arma::uword beta)
{
    config.validate();
    RedundantDictionary d;
    d.beta = beta;
    d.rx_grid = angle_grid(config.n_irs_w, config.n_irs_h, beta);
    d.tx_grid = angle_grid(config.n_ue_w, config.n_ue_h, beta);
    d.a_r = steering_bank(d.rx_grid, config.n_irs_w, config.n_irs_h, config.element_spacing);
    d.a_t = steering_bank(d.tx_grid, config.n_ue_w, config.n_ue_h, config.element_spacing);
    return d;
}

arma::cx_vec RedundantDictionary::atom(arma::uword g) const
{
    const arma::uword r = g % rx_size();
    const arma::uword t = g / rx_size();
    return arma::kron(arma::conj(a_t.col(t)), a_r.col(r));
}

arma::cx_mat RedundantDictionary::atoms(const arma::uvec& support) const
{
    arma::cx_mat out(a_r.n_rows * a_t.n_rows, support.n_elem);
    for (arma::uword i = 0; i < support.n_elem; ++i)
        out.col(i) = atom(support(i));
    return out;
}

arma::cx_mat RedundantDictionary::psi(arma::uword cap) const
{
    const arma::uword entries = a_r.n_rows * a_t.n_rows * size();
    if (entries > cap)
        throw std::length_error("RedundantDictionary::psi: " + std::to_string(entries) +
                                " entries exceed the dense cap " + std::to_string(cap));
    return arma::kron(arma::conj(a_t), a_r);
}

SensingOperator::SensingOperator(arma::cx_mat phi, std::shared_ptr<const RedundantDictionary> dict)
    : phi_(std::move(phi)), dict_(std::move(dict))
{
    if (!dict_)
        throw std::invalid_argument("SensingOperator: null dictionary");
    n_irs_ = dict_->a_r.n_rows;
    n_ue_ = dict_->a_t.n_rows;
    if (phi_.n_cols != n_irs_ * n_ue_)
        throw ShapeError("SensingOperator: measurement matrix has " + std::to_string(phi_.n_cols) +
                         " columns, dictionary spans " + std::to_string(n_irs_ * n_ue_));
}

arma::cx_vec SensingOperator::apply(const arma::cx_vec& x) const
{
    if (x.n_elem != n_cols())
        throw ShapeError("SensingOperator::apply: length mismatch");
    const arma::cx_mat coeffs = arma::reshape(x, dict_->rx_size(), dict_->tx_size());
    const arma::cx_mat h = dict_->a_r * coeffs * dict_->a_t.t();
    return phi_ * arma::vectorise(h);
}

arma::cx_vec SensingOperator::adjoint(const arma::cx_vec& y) const
{
    if (y.n_elem != n_rows())
        throw ShapeError("SensingOperator::adjoint: length mismatch");
    const arma::cx_mat v = arma::reshape(arma::cx_vec(phi_.t() * y), n_irs_, n_ue_);
    return arma::vectorise(arma::cx_mat(dict_->a_r.t() * v * dict_->a_t));
}

arma::cx_mat SensingOperator::effective_matrix() const
{
    // Row m of A is (A^H e_m)^H, and A^H = Psi^H Phi^H acts on reshaped
    // columns of Phi^H without forming Psi.
    arma::cx_mat a(n_rows(), n_cols());
    const arma::cx_mat phi_h = phi_.t();
    for (arma::uword m = 0; m < n_rows(); ++m) {
        const arma::cx_mat v = arma::reshape(phi_h.col(m), n_irs_, n_ue_);
        a.row(m) = arma::vectorise(arma::cx_mat(dict_->a_r.t() * v * dict_->a_t)).t();
    }
    return a;
}

arma::cx_mat SensingOperator::dense_product(arma::uword cap) const
{
    return phi_ * dict_->psi(cap);
}

} // namespace irsce
