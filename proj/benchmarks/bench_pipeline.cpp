// SPDX-License-Identifier: Apache-2.0
#include <benchmark/benchmark.h>

#include <memory>

#include "irsce/channel_model.hpp"
#include "irsce/config.hpp"
#include "irsce/dictionary.hpp"
#include "irsce/pilot_sounding.hpp"
#include "irsce/somp.hpp"

using namespace irsce;

namespace {

void BM_SteeringVector(benchmark::State& state)
{
    const auto n = static_cast<arma::uword>(state.range(0));
    double az = 0.1;
    for (auto _ : state) {
        benchmark::DoNotOptimize(steering_vector(az, 0.3, n, n, 0.5));
        az += 1e-6;
    }
}
BENCHMARK(BM_SteeringVector)->Arg(8)->Arg(16)->Arg(24);

void BM_GenerateChannel(benchmark::State& state)
{
    PipelineConfig cfg = preset("desk");
    Rng rng(1);
    for (auto _ : state)
        benchmark::DoNotOptimize(generate_channel(cfg.scenario, rng));
}
BENCHMARK(BM_GenerateChannel);

void BM_Sound(benchmark::State& state)
{
    PipelineConfig cfg = preset("desk");
    Rng rng(2);
    const FrequencyChannel h = generate_channel(cfg.scenario, rng);
    const SoundingPlan plan = make_plan(cfg.scenario, cfg.b_slots(), cfg.n_rf, rng);
    for (auto _ : state)
        benchmark::DoNotOptimize(sound(h, plan, cfg.snr_db, rng));
}
BENCHMARK(BM_Sound);

// M measurements against the desk dictionary (grid 256)
void BM_Somp(benchmark::State& state)
{
    PipelineConfig cfg = preset("desk");
    cfg.measurements = static_cast<arma::uword>(state.range(0));
    Rng rng(3);
    auto dict = std::make_shared<RedundantDictionary>(build_dictionary(cfg.scenario, cfg.beta));
    const FrequencyChannel h = generate_channel(cfg.scenario, rng);
    const SoundingPlan plan = make_plan(cfg.scenario, cfg.b_slots(), cfg.n_rf, rng);
    const MeasurementSet m = sound(h, plan, cfg.snr_db, rng);
    const SensingOperator op(m.phi, dict);
    for (auto _ : state)
        benchmark::DoNotOptimize(somp(m.observations, op, StopRule::sparsity(2 * cfg.scenario.n_paths)));
}
BENCHMARK(BM_Somp)->Arg(16)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_AngularDelayTransform(benchmark::State& state)
{
    const auto k = static_cast<arma::uword>(state.range(0));
    arma::arma_rng::set_seed(4);
    const arma::cx_mat h(arma::randn<arma::mat>(256, k), arma::randn<arma::mat>(256, k));
    for (auto _ : state)
        benchmark::DoNotOptimize(angular_delay_transform(h));
}
BENCHMARK(BM_AngularDelayTransform)->Arg(64)->Arg(256);

} // namespace

BENCHMARK_MAIN();
