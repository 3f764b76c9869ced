// SPDX-License-Identifier: Apache-2.0
#include "irsce/pilot_sounding.hpp"

#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

namespace irsce {

void SoundingPlan::validate(arma::uword n_ue) const
{
    if (b_slots == 0 || n_rf == 0)
        throw InvalidPlan("SoundingPlan: b_slots and n_rf must be positive");
    if (active_indices.size() != b_slots || precoders.size() != b_slots || pilots.size() != b_slots)
        throw ShapeError("SoundingPlan: per-slot lists must have b_slots entries");

    std::vector<bool> used(n_irs, false);
    for (arma::uword b = 0; b < b_slots; ++b) {
        if (active_indices[b].size() != n_rf)
            throw ShapeError("SoundingPlan: slot " + std::to_string(b) + " does not activate n_rf elements");
        for (arma::uword idx : active_indices[b]) {
            if (idx >= n_irs)
                throw InvalidPlan("SoundingPlan: element index " + std::to_string(idx) + " out of range");
            if (used[idx])
                throw InvalidPlan("SoundingPlan: element index " + std::to_string(idx) + " activated twice");
            used[idx] = true;
        }
        if (precoders[b].n_rows != n_ue || precoders[b].n_cols != pilots[b].n_elem)
            throw ShapeError("SoundingPlan: precoder/pilot shape mismatch in slot " + std::to_string(b));
    }
}

arma::mat make_selection_matrix(std::span<const arma::uword> indices, arma::uword n_total)
{
    std::vector<bool> seen(n_total, false);
    arma::mat w(indices.size(), n_total, arma::fill::zeros);
    for (std::size_t r = 0; r < indices.size(); ++r) {
        const arma::uword c = indices[r];
        if (c >= n_total)
            throw InvalidPlan("make_selection_matrix: index " + std::to_string(c) + " out of range");
        if (seen[c])
            throw InvalidPlan("make_selection_matrix: duplicate index " + std::to_string(c));
        seen[c] = true;
        w(r, c) = 1.0;
    }
    return w;
}

SoundingPlan make_plan(const ScenarioConfig& config, arma::uword b_slots, arma::uword n_rf, Rng& rng,
                       ElementPattern pattern)
{
    config.validate();
    const arma::uword n_irs = config.n_irs();
    const arma::uword m = b_slots * n_rf;
    if (b_slots == 0 || n_rf == 0)
        throw InvalidPlan("make_plan: b_slots and n_rf must be positive");
    if (m > n_irs)
        throw InvalidPlan("make_plan: " + std::to_string(m) + " measurements exceed " + std::to_string(n_irs) +
                          " IRS elements");

    std::vector<arma::uword> order(n_irs);
    if (pattern == ElementPattern::random) {
        std::iota(order.begin(), order.end(), arma::uword{0});
        // partial Fisher-Yates: the first m entries are a uniform m-subset
        for (arma::uword i = 0; i < m; ++i) {
            const arma::uword j = i + rng.uniform_index(n_irs - i);
            std::swap(order[i], order[j]);
        }
    } else {
        for (arma::uword i = 0; i < m; ++i)
            order[i] = i * n_irs / m;
    }

    SoundingPlan plan;
    plan.b_slots = b_slots;
    plan.n_rf = n_rf;
    plan.n_irs = n_irs;
    const arma::uword n_ue = config.n_ue();
    const arma::uword n_s = config.n_ue_streams;
    for (arma::uword b = 0; b < b_slots; ++b) {
        plan.active_indices.emplace_back(order.begin() + b * n_rf, order.begin() + (b + 1) * n_rf);
        arma::cx_mat f(n_ue, n_s);
        for (arma::uword j = 0; j < n_s; ++j)
            for (arma::uword i = 0; i < n_ue; ++i)
                f(i, j) = std::polar(1.0, rng.uniform(0.0, 2.0 * std::numbers::pi));
        plan.precoders.push_back(std::move(f));
        plan.pilots.emplace_back(n_s, arma::fill::ones);
    }
    return plan;
}

arma::cx_mat measurement_matrix(const SoundingPlan& plan, arma::uword n_ue)
{
    plan.validate(n_ue);
    arma::cx_mat phi(plan.measurements(), plan.n_irs * n_ue);
    for (arma::uword b = 0; b < plan.b_slots; ++b) {
        const arma::cx_mat w = arma::conv_to<arma::cx_mat>::from(make_selection_matrix(plan.active_indices[b], plan.n_irs));
        const arma::cx_vec x = plan.transmit_vector(b);
        phi.rows(b * plan.n_rf, (b + 1) * plan.n_rf - 1) = arma::kron(x.st(), w);
    }
    return phi;
}

double calibrate_noise_power(const arma::cx_mat& phi, const FrequencyChannel& channel, double snr_db)
{
    if (channel.n_subcarriers() == 0)
        throw ShapeError("calibrate_noise_power: no channel realizations");
    if (phi.n_cols != channel.n_rows() * channel.n_cols())
        throw ShapeError("calibrate_noise_power: measurement matrix does not match channel shape");
    if (phi.n_rows == 0)
        throw ShapeError("calibrate_noise_power: empty measurement matrix");

    double signal = 0.0;
    for (arma::uword k = 0; k < channel.n_subcarriers(); ++k) {
        const arma::cx_vec y = phi * arma::vectorise(channel.subchannels.slice(k));
        signal += arma::accu(arma::square(arma::abs(y)));
    }
    signal /= static_cast<double>(channel.n_subcarriers());
    if (std::isinf(snr_db) && snr_db > 0)
        return 0.0;
    if (signal <= 0.0)
        throw DegenerateSnr("calibrate_noise_power: channel has zero measured power, SNR undefined");
    return signal / (static_cast<double>(phi.n_rows) * std::pow(10.0, snr_db / 10.0));
}

MeasurementSet sound_with_noise_var(const FrequencyChannel& channel, const SoundingPlan& plan, double noise_var,
                                    Rng& rng)
{
    const arma::uword n_ue = channel.n_cols();
    if (channel.n_rows() != plan.n_irs)
        throw ShapeError("sound: channel has " + std::to_string(channel.n_rows()) + " IRS rows, plan expects " +
                         std::to_string(plan.n_irs));
    plan.validate(n_ue);
    if (noise_var < 0.0)
        throw std::invalid_argument("sound: negative noise variance");

    const arma::uword k_total = channel.n_subcarriers();
    MeasurementSet out;
    out.phi = measurement_matrix(plan, n_ue);
    out.noise_var = noise_var;
    out.snr_db = std::numeric_limits<double>::quiet_NaN();
    out.observations.set_size(plan.measurements(), k_total);

    // Physical slot-wise model; the vectorized form phi * vec(H_k) is only
    // used by callers that want to cross-check it.
    for (arma::uword b = 0; b < plan.b_slots; ++b) {
        const arma::cx_vec x = plan.transmit_vector(b);
        const arma::uvec rows(plan.active_indices[b]);
        for (arma::uword k = 0; k < k_total; ++k) {
            const arma::cx_mat& h = channel.subchannels.slice(k);
            out.observations.col(k).rows(b * plan.n_rf, (b + 1) * plan.n_rf - 1) = h.rows(rows) * x;
        }
    }

    if (noise_var > 0.0) {
        for (arma::uword k = 0; k < k_total; ++k)
            for (arma::uword r = 0; r < out.observations.n_rows; ++r)
                out.observations(r, k) += rng.complex_normal(noise_var);
    }
    return out;
}

MeasurementSet sound(const FrequencyChannel& channel, const SoundingPlan& plan, double snr_db, Rng& rng)
{
    const double noise_var = calibrate_noise_power(measurement_matrix(plan, channel.n_cols()), channel, snr_db);
    MeasurementSet out = sound_with_noise_var(channel, plan, noise_var, rng);
    out.snr_db = snr_db;
    return out;
}

} // namespace irsce
