// SPDX-License-Identifier: Apache-2.0
#include "irsce/channel_model.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace irsce {
namespace {

void require(bool ok, const char* what)
{
    if (!ok)
        throw std::invalid_argument(std::string("ScenarioConfig: ") + what);
}

double sinc(double x)
{
    if (x == 0.0)
        return 1.0;
    const double px = std::numbers::pi * x;
    return std::sin(px) / px;
}

} // namespace

void ScenarioConfig::validate() const
{
    require(n_irs_w >= 1 && n_irs_h >= 1, "IRS array dimensions must be positive");
    require(n_ue_w >= 1 && n_ue_h >= 1, "UE array dimensions must be positive");
    require(n_ue_streams >= 1, "n_ue_streams must be positive");
    require(n_paths >= 1, "n_paths must be positive");
    require(l_cp >= 1, "l_cp must be positive");
    require(k_subcarriers >= l_cp, "k_subcarriers must be >= l_cp");
    require(f_bandwidth_hz > 0.0, "f_bandwidth_hz must be positive");
    require(f_carrier_hz > 0.0, "f_carrier_hz must be positive");
    require(element_spacing > 0.0, "element_spacing must be positive");
    require(pulse_rolloff >= 0.0 && pulse_rolloff <= 1.0, "pulse_rolloff must lie in [0, 1]");
}

arma::cx_vec steering_vector(double azimuth, double elevation, arma::uword n_w, arma::uword n_h, double spacing)
{
    const double u = std::sin(azimuth) * std::cos(elevation);
    const double v = std::sin(elevation);
    const double scale = 1.0 / std::sqrt(static_cast<double>(n_w * n_h));
    const double k = 2.0 * std::numbers::pi * spacing;

    arma::cx_vec a(n_w * n_h);
    for (arma::uword n = 0; n < n_w; ++n) {
        for (arma::uword m = 0; m < n_h; ++m) {
            const double phase = k * (static_cast<double>(n) * u + static_cast<double>(m) * v);
            a(n * n_h + m) = std::polar(scale, phase);
        }
    }
    return a;
}

PathSet draw_paths(const ScenarioConfig& config, Rng& rng)
{
    config.validate();
    constexpr double half_pi = std::numbers::pi / 2.0;
    const double tau_max = config.max_delay();

    PathSet set;
    set.paths.reserve(config.n_paths);
    for (arma::uword l = 0; l < config.n_paths; ++l) {
        Path p;
        p.gain = rng.complex_normal(1.0);
        p.delay = rng.uniform(0.0, tau_max);
        p.aoa.azimuth = rng.uniform(-half_pi, half_pi);
        p.aoa.elevation = rng.uniform(-half_pi, half_pi);
        p.aod.azimuth = rng.uniform(-half_pi, half_pi);
        p.aod.elevation = rng.uniform(-half_pi, half_pi);
        set.paths.push_back(p);
    }
    return set;
}

double raised_cosine(double t, double sample_period, double rolloff)
{
    const double x = t / sample_period;
    if (std::abs(x) > kPulseSpan)
        return 0.0;
    if (rolloff == 0.0)
        return sinc(x);

    const double denom = 1.0 - (2.0 * rolloff * x) * (2.0 * rolloff * x);
    if (std::abs(denom) < 1e-10)
        return std::numbers::pi / 4.0 * sinc(1.0 / (2.0 * rolloff));
    return sinc(x) * std::cos(std::numbers::pi * rolloff * x) / denom;
}

DelayChannel delay_taps(const PathSet& paths, const ScenarioConfig& config)
{
    config.validate();
    const arma::uword n_irs = config.n_irs();
    const arma::uword n_ue = config.n_ue();
    const double ts = config.sample_period();
    const double norm = std::sqrt(static_cast<double>(n_ue * n_irs) / static_cast<double>(paths.paths.size()));

    DelayChannel out;
    out.sample_period = ts;
    out.taps.zeros(n_irs, n_ue, config.l_cp);

    for (const Path& p : paths.paths) {
        const arma::cx_vec a_r = steering_vector(p.aoa.azimuth, p.aoa.elevation, config.n_irs_w, config.n_irs_h,
                                                 config.element_spacing);
        const arma::cx_vec a_t = steering_vector(p.aod.azimuth, p.aod.elevation, config.n_ue_w, config.n_ue_h,
                                                 config.element_spacing);
        const arma::cx_mat outer = a_r * a_t.t();
        for (arma::uword d = 0; d < config.l_cp; ++d) {
            const double pulse = pulse_shape(static_cast<double>(d) * ts - p.delay, config);
            if (pulse != 0.0)
                out.taps.slice(d) += (norm * pulse) * p.gain * outer;
        }
    }
    return out;
}

FrequencyChannel frequency_channel(const DelayChannel& taps, arma::uword k_subcarriers)
{
    const arma::uword n_taps = taps.taps.n_slices;
    if (k_subcarriers < n_taps)
        throw std::invalid_argument("frequency_channel: fewer subcarriers than stored taps");

    FrequencyChannel out;
    out.subchannels.zeros(taps.taps.n_rows, taps.taps.n_cols, k_subcarriers);
    const double w = -2.0 * std::numbers::pi / static_cast<double>(k_subcarriers);
    for (arma::uword k = 0; k < k_subcarriers; ++k) {
        arma::cx_mat& h = out.subchannels.slice(k);
        for (arma::uword d = 0; d < n_taps; ++d) {
            // k * d reduced mod K keeps the twiddle argument small
            const auto kd = static_cast<double>((k * d) % k_subcarriers);
            h += std::polar(1.0, w * kd) * taps.taps.slice(d);
        }
    }
    return out;
}

FrequencyChannel generate_channel(const ScenarioConfig& config, Rng& rng, PathSet* paths_out)
{
    PathSet paths = draw_paths(config, rng);
    FrequencyChannel h = frequency_channel(delay_taps(paths, config), config.k_subcarriers);
    if (paths_out)
        *paths_out = std::move(paths);
    return h;
}

} // namespace irsce
