// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <armadillo>
#include <complex>
#include <cstdint>
#include <vector>

#include "irsce/rng.hpp"

namespace irsce {

/// Physical and sounding parameters of one UE -> IRS scenario.
///
/// Array element indices follow the UPA steering vector: width index n
/// pairs with sin(azimuth)cos(elevation), height index m with
/// sin(elevation); the linear element index is n * height + m.
struct ScenarioConfig {
    arma::uword n_irs_w = 8;
    arma::uword n_irs_h = 8;
    arma::uword n_ue_w = 1;
    arma::uword n_ue_h = 1;
    arma::uword n_ue_streams = 1;      ///< pilot streams per slot (columns of F^b)
    arma::uword k_subcarriers = 64;
    arma::uword n_paths = 6;
    double f_carrier_hz = 28e9;
    double f_bandwidth_hz = 100e6;
    arma::uword l_cp = 16;             ///< cyclic prefix, bounds the discrete delay
    double element_spacing = 0.5;      ///< d / lambda
    double pulse_rolloff = 0.8;
    std::uint64_t rng_seed = 1;

    arma::uword n_irs() const { return n_irs_w * n_irs_h; }
    arma::uword n_ue() const { return n_ue_w * n_ue_h; }
    double sample_period() const { return 1.0 / f_bandwidth_hz; }
    double max_delay() const { return static_cast<double>(l_cp) / f_bandwidth_hz; }

    /// Throws std::invalid_argument naming the first violated field.
    void validate() const;
};

struct AnglePair {
    double azimuth = 0.0;
    double elevation = 0.0;
};

struct Path {
    std::complex<double> gain;
    double delay = 0.0;   ///< seconds
    AnglePair aoa;        ///< at the IRS
    AnglePair aod;        ///< at the UE
};

struct PathSet {
    std::vector<Path> paths;
};

/// Discrete impulse response: slice d of `taps` is C_d (N_IRS x N_UE).
struct DelayChannel {
    arma::cx_cube taps;
    double sample_period = 0.0;
};

/// Slice k of `subchannels` is H_k (N_IRS x N_UE). Subcarrier indices are
/// taken modulo K, so slice 0 carries k = 0 (equivalently k = K).
struct FrequencyChannel {
    arma::cx_cube subchannels;

    arma::uword n_subcarriers() const { return subchannels.n_slices; }
    arma::uword n_rows() const { return subchannels.n_rows; }
    arma::uword n_cols() const { return subchannels.n_cols; }
};

/// Half-width of the truncated pulse, in sample periods.
inline constexpr double kPulseSpan = 4.0;

/// Unit-norm UPA steering vector of length n_w * n_h.
arma::cx_vec steering_vector(double azimuth, double elevation, arma::uword n_w, arma::uword n_h, double spacing);

PathSet draw_paths(const ScenarioConfig& config, Rng& rng);

/// Truncated raised-cosine pulse with p(0) = 1, zero beyond kPulseSpan periods.
double raised_cosine(double t, double sample_period, double rolloff);
inline double pulse_shape(double t, const ScenarioConfig& config)
{
    return raised_cosine(t, config.sample_period(), config.pulse_rolloff);
}

/// Geometric channel taps C_0 .. C_{L_CP - 1}.
DelayChannel delay_taps(const PathSet& paths, const ScenarioConfig& config);

/// H_k = sum_d C_d exp(-j 2 pi k d / K), k = 0 .. K-1.
FrequencyChannel frequency_channel(const DelayChannel& taps, arma::uword k_subcarriers);

/// draw_paths -> delay_taps -> frequency_channel.
FrequencyChannel generate_channel(const ScenarioConfig& config, Rng& rng, PathSet* paths_out = nullptr);

} // namespace irsce
