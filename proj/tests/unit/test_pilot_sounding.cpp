// SPDX-License-Identifier: Apache-2.0
#include <catch_amalgamated.hpp>

#include <cmath>
#include <set>
#include <vector>

#include "irsce/pilot_sounding.hpp"
#include "oracles.hpp"

using namespace irsce;

namespace {

ScenarioConfig small_ue_array()
{
    ScenarioConfig cfg;
    cfg.n_irs_w = 4;
    cfg.n_irs_h = 4;
    cfg.n_ue_w = 2;
    cfg.n_ue_h = 1;
    cfg.n_ue_streams = 2;
    cfg.k_subcarriers = 16;
    cfg.l_cp = 8;
    return cfg;
}

double signal_power(const arma::cx_mat& phi, const FrequencyChannel& h)
{
    double p = 0.0;
    for (arma::uword k = 0; k < h.n_subcarriers(); ++k)
        p += std::pow(arma::norm(phi * arma::vectorise(h.subchannels.slice(k))), 2);
    return p / double(h.n_subcarriers());
}

} // namespace

TEST_CASE("make_selection_matrix: basis rows")
{
    const std::vector<arma::uword> one{0};
    const arma::mat w1 = make_selection_matrix(one, 4);
    CHECK(arma::approx_equal(w1, arma::mat({{1, 0, 0, 0}}), "absdiff", 0.0));

    const std::vector<arma::uword> two{2, 0};
    const arma::mat w2 = make_selection_matrix(two, 3);
    CHECK(arma::approx_equal(w2, arma::mat({{0, 0, 1}, {1, 0, 0}}), "absdiff", 0.0));

    const arma::vec v{10.0, 20.0, 30.0};
    arma::vec brute(2, arma::fill::zeros);
    for (arma::uword r = 0; r < 2; ++r)
        for (arma::uword c = 0; c < 3; ++c)
            brute(r) += w2(r, c) * v(c);
    CHECK(brute(0) == 30.0);
    CHECK(brute(1) == 10.0);
    CHECK(arma::approx_equal(arma::vec(w2 * v), brute, "absdiff", 0.0));
}

TEST_CASE("make_selection_matrix: invalid indices")
{
    const std::vector<arma::uword> dup{1, 1};
    const std::vector<arma::uword> oob{0, 3};
    CHECK_THROWS_AS(make_selection_matrix(dup, 3), InvalidPlan);
    CHECK_THROWS_AS(make_selection_matrix(oob, 3), InvalidPlan);
}

TEST_CASE("make_plan: 64 distinct elements on a 16x16 array")
{
    ScenarioConfig cfg;
    cfg.n_irs_w = 16;
    cfg.n_irs_h = 16;
    Rng rng(1);
    const SoundingPlan plan = make_plan(cfg, 64, 1, rng);
    CHECK(plan.measurements() == 64);
    std::set<arma::uword> all;
    for (const auto& slot : plan.active_indices) {
        REQUIRE(slot.size() == 1);
        all.insert(slot.begin(), slot.end());
    }
    CHECK(all.size() == 64);
    CHECK(*all.rbegin() < 256);
    CHECK_NOTHROW(plan.validate(1));
}

TEST_CASE("make_plan: unit-modulus precoders, all-ones pilots, determinism")
{
    const ScenarioConfig cfg = small_ue_array();
    Rng a(4), b(4);
    const SoundingPlan p = make_plan(cfg, 3, 2, a);
    const SoundingPlan q = make_plan(cfg, 3, 2, b);
    REQUIRE(p.b_slots == 3);
    REQUIRE(p.n_rf == 2);
    for (arma::uword s = 0; s < 3; ++s) {
        CHECK(p.active_indices[s] == q.active_indices[s]);
        CHECK(arma::approx_equal(p.precoders[s], q.precoders[s], "absdiff", 0.0));
        REQUIRE(p.precoders[s].n_rows == 2);
        REQUIRE(p.precoders[s].n_cols == 2);
        for (const auto& f : p.precoders[s])
            CHECK(std::abs(std::abs(f) - 1.0) < 1e-15);
        CHECK(arma::approx_equal(p.pilots[s], arma::cx_vec(2, arma::fill::ones), "absdiff", 0.0));
    }
}

TEST_CASE("make_plan: element inclusion frequency is uniform")
{
    ScenarioConfig cfg;
    cfg.n_irs_w = 4;
    cfg.n_irs_h = 4;
    const arma::uword n_rf = 3;
    const int draws = 10000;
    std::vector<int> counts(16, 0);
    Rng rng(2024);
    for (int i = 0; i < draws; ++i) {
        const SoundingPlan p = make_plan(cfg, 1, n_rf, rng);
        for (arma::uword idx : p.active_indices[0])
            ++counts[idx];
    }
    const double prob = double(n_rf) / 16.0;
    const double sigma = std::sqrt(draws * prob * (1 - prob));
    for (int c : counts)
        CHECK(std::abs(c - draws * prob) <= 3 * sigma);
}

TEST_CASE("make_plan: uniform grid pattern and invalid requests")
{
    ScenarioConfig cfg;
    Rng rng(1);
    const SoundingPlan g = make_plan(cfg, 8, 2, rng, ElementPattern::uniform_grid);
    std::vector<arma::uword> flat;
    for (const auto& s : g.active_indices)
        flat.insert(flat.end(), s.begin(), s.end());
    for (std::size_t i = 0; i < flat.size(); ++i)
        CHECK(flat[i] == i * 4);

    CHECK_THROWS_AS(make_plan(cfg, 65, 1, rng), InvalidPlan);
    CHECK_THROWS_AS(make_plan(cfg, 0, 1, rng), InvalidPlan);
    CHECK_NOTHROW(make_plan(cfg, 64, 1, rng));
}

TEST_CASE("SoundingPlan::validate catches malformed plans")
{
    const ScenarioConfig cfg = small_ue_array();
    Rng rng(3);
    const SoundingPlan good = make_plan(cfg, 2, 2, rng);
    auto bad = good;
    bad.active_indices[1][0] = bad.active_indices[0][0];
    CHECK_THROWS_AS(bad.validate(2), InvalidPlan);
    bad = good;
    bad.active_indices[0][1] = 16;
    CHECK_THROWS_AS(bad.validate(2), InvalidPlan);
    bad = good;
    bad.pilots[0] = arma::cx_vec(3, arma::fill::ones);
    CHECK_THROWS_AS(bad.validate(2), ShapeError);
    CHECK_THROWS_AS(good.validate(3), ShapeError);
}

TEST_CASE("sound: noiseless physical model equals phi * vec(H_k)")
{
    const ScenarioConfig cfg = small_ue_array();
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        Rng rng(seed);
        const FrequencyChannel h = generate_channel(cfg, rng);
        const SoundingPlan plan = make_plan(cfg, 4, 2, rng);
        const MeasurementSet m = sound(h, plan, kNoiselessSnrDb, rng);
        REQUIRE(m.noise_var == 0.0);
        REQUIRE(m.observations.n_rows == 8);
        REQUIRE(m.observations.n_cols == cfg.k_subcarriers);

        // independent kron(x^T, W) built from the raw plan
        arma::cx_mat phi(8, cfg.n_irs() * cfg.n_ue(), arma::fill::zeros);
        for (arma::uword b = 0; b < plan.b_slots; ++b) {
            const arma::cx_vec x = plan.precoders[b] * plan.pilots[b];
            for (arma::uword r = 0; r < plan.n_rf; ++r)
                for (arma::uword u = 0; u < cfg.n_ue(); ++u)
                    phi(b * plan.n_rf + r, u * cfg.n_irs() + plan.active_indices[b][r]) = x(u);
        }
        REQUIRE(oracle::rel_err(m.phi, phi) < 1e-15);
        for (arma::uword k = 0; k < cfg.k_subcarriers; ++k) {
            const arma::cx_vec expect = phi * arma::vectorise(h.subchannels.slice(k));
            REQUIRE(arma::norm(m.observations.col(k) - expect) <= 1e-12 * arma::norm(expect));
        }
    }
}

TEST_CASE("sound: single-antenna UE collapses phi to one-hot rows")
{
    ScenarioConfig cfg;
    Rng rng(8);
    const FrequencyChannel h = generate_channel(cfg, rng);
    SoundingPlan plan = make_plan(cfg, 10, 1, rng);
    for (auto& f : plan.precoders)
        f.ones();
    const MeasurementSet m = sound(h, plan, kNoiselessSnrDb, rng);
    for (arma::uword r = 0; r < 10; ++r) {
        arma::cx_rowvec expect(64, arma::fill::zeros);
        expect(plan.active_indices[r][0]) = 1.0;
        CHECK(arma::approx_equal(m.phi.row(r), expect, "absdiff", 0.0));
        for (arma::uword k = 0; k < cfg.k_subcarriers; ++k)
            REQUIRE(m.observations(r, k) == h.subchannels(plan.active_indices[r][0], 0, k));
    }
}

TEST_CASE("sound: zero channel yields pure noise of power M sigma^2")
{
    ScenarioConfig cfg;
    cfg.k_subcarriers = 4096;
    cfg.l_cp = 16;
    FrequencyChannel zero;
    zero.subchannels.zeros(cfg.n_irs(), 1, cfg.k_subcarriers);
    Rng rng(31);
    const SoundingPlan plan = make_plan(cfg, 32, 1, rng);
    const double var = 0.37;
    const MeasurementSet m = sound_with_noise_var(zero, plan, var, rng);
    const double power = arma::accu(arma::square(arma::abs(m.observations))) / double(cfg.k_subcarriers);
    CHECK(power == Catch::Approx(32 * var).epsilon(0.02));

    CHECK_THROWS_AS(sound(zero, plan, 10.0, rng), DegenerateSnr);
}

TEST_CASE("calibrate_noise_power: unit ratio and decade scaling")
{
    ScenarioConfig cfg;
    Rng rng(12);
    const FrequencyChannel h = generate_channel(cfg, rng);
    const SoundingPlan plan = make_plan(cfg, 32, 1, rng);
    const arma::cx_mat phi = measurement_matrix(plan, 1);
    const double p = signal_power(phi, h) / 32.0;
    const double s0 = calibrate_noise_power(phi, h, 0.0);
    const double s10 = calibrate_noise_power(phi, h, 10.0);
    CHECK(s0 == Catch::Approx(p).epsilon(1e-12));
    CHECK(s10 == Catch::Approx(s0 / 10.0).epsilon(1e-12));
    CHECK(calibrate_noise_power(phi, h, kNoiselessSnrDb) == 0.0);

    FrequencyChannel zero = h;
    zero.subchannels.zeros();
    CHECK_THROWS_AS(calibrate_noise_power(phi, zero, 0.0), DegenerateSnr);
    CHECK_THROWS_AS(calibrate_noise_power(phi.cols(0, 10), h, 0.0), ShapeError);
}

TEST_CASE("sound: empirical SNR tracks the target")
{
    ScenarioConfig cfg;
    for (double snr : {0.0, 10.0}) {
        double sig = 0.0, noise = 0.0;
        for (std::uint64_t t = 0; t < 1000; ++t) {
            Rng rng(derive_seed(5, t, "snr"));
            const FrequencyChannel h = generate_channel(cfg, rng);
            const SoundingPlan plan = make_plan(cfg, 32, 1, rng);
            const MeasurementSet m = sound(h, plan, snr, rng);
            for (arma::uword k = 0; k < cfg.k_subcarriers; ++k) {
                const arma::cx_vec clean = m.phi * arma::vectorise(h.subchannels.slice(k));
                sig += std::pow(arma::norm(clean), 2);
                noise += std::pow(arma::norm(m.observations.col(k) - clean), 2);
            }
        }
        CHECK(std::abs(10.0 * std::log10(sig / noise) - snr) <= 0.2);
    }
}

TEST_CASE("measurement matrix: norm and row orthogonality for a single-antenna UE")
{
    ScenarioConfig cfg;
    Rng rng(6);
    const SoundingPlan plan = make_plan(cfg, 16, 2, rng);
    const arma::cx_mat phi = measurement_matrix(plan, 1);
    REQUIRE(phi.n_rows == 32);
    double expect = 0.0;
    for (arma::uword b = 0; b < plan.b_slots; ++b)
        expect += plan.n_rf * std::norm(plan.transmit_vector(b)(0));
    CHECK(std::pow(arma::norm(phi, "fro"), 2) == Catch::Approx(expect).epsilon(1e-14));
    CHECK(std::pow(arma::norm(phi, "fro"), 2) == Catch::Approx(32.0).epsilon(1e-14));
    for (arma::uword r = 0; r < 32; ++r)
        CHECK(arma::accu(arma::abs(phi.row(r)) > 0.0) == 1);
    const arma::cx_mat gram = phi * phi.t();
    CHECK(arma::norm(gram - arma::diagmat(gram.diag()), "fro") < 1e-15);
}

TEST_CASE("sound: mismatched channel shape")
{
    ScenarioConfig cfg;
    Rng rng(1);
    const SoundingPlan plan = make_plan(cfg, 4, 1, rng);
    FrequencyChannel h;
    h.subchannels.zeros(16, 1, 8);
    CHECK_THROWS_AS(sound_with_noise_var(h, plan, 0.0, rng), ShapeError);
}
