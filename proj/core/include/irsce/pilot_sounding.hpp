// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <armadillo>
#include <limits>
#include <span>
#include <vector>

#include "irsce/channel_model.hpp"
#include "irsce/errors.hpp"
#include "irsce/rng.hpp"

namespace irsce {

/// Passing this as the SNR disables noise entirely.
inline constexpr double kNoiselessSnrDb = std::numeric_limits<double>::infinity();

enum class ElementPattern {
    random,        ///< uniform subset without replacement
    uniform_grid,  ///< evenly spaced linear element indices
};

/// B-slot antenna-switched uplink pilot schedule.
struct SoundingPlan {
    arma::uword b_slots = 0;
    arma::uword n_rf = 0;
    arma::uword n_irs = 0;
    std::vector<std::vector<arma::uword>> active_indices;  ///< per slot, n_rf each
    std::vector<arma::cx_mat> precoders;                   ///< F^b = F_RF^b F_BB^b, N_UE x N_S
    std::vector<arma::cx_vec> pilots;                      ///< s^b, length N_S

    arma::uword measurements() const { return b_slots * n_rf; }

    /// F^b s^b, the effective UE transmit vector of slot b.
    arma::cx_vec transmit_vector(arma::uword slot) const { return precoders[slot] * pilots[slot]; }

    /// Throws InvalidPlan on overlapping or out-of-range indices and
    /// ShapeError on inconsistent precoder/pilot shapes.
    void validate(arma::uword n_ue) const;
};

struct MeasurementSet {
    arma::cx_mat observations;  ///< M x K, column k is y_k
    arma::cx_mat phi;           ///< M x (N_IRS * N_UE)
    double noise_var = 0.0;     ///< per complex dimension
    double snr_db = kNoiselessSnrDb;
};

/// One-hot rows: row r has its single 1 at column indices[r].
arma::mat make_selection_matrix(std::span<const arma::uword> indices, arma::uword n_total);

SoundingPlan make_plan(const ScenarioConfig& config, arma::uword b_slots, arma::uword n_rf, Rng& rng,
                       ElementPattern pattern = ElementPattern::random);

/// Aggregate measurement matrix: slot blocks (F^b s^b)^T kron W_AS^b stacked.
arma::cx_mat measurement_matrix(const SoundingPlan& plan, arma::uword n_ue);

/// Per-realization noise variance giving the requested mean SNR per measurement.
double calibrate_noise_power(const arma::cx_mat& phi, const FrequencyChannel& channel, double snr_db);

/// Slot-wise sounding y_k^b = W_AS^b H_k F^b s^b + n_k^b with calibrated noise.
MeasurementSet sound(const FrequencyChannel& channel, const SoundingPlan& plan, double snr_db, Rng& rng);

/// As sound(), with an explicit noise variance instead of a target SNR.
MeasurementSet sound_with_noise_var(const FrequencyChannel& channel, const SoundingPlan& plan, double noise_var,
                                    Rng& rng);

} // namespace irsce
