// SPDX-License-Identifier: Apache-2.0
#include "irsce/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "irsce/denoiser_bridge.hpp"
#include "irsce/errors.hpp"
#include "irsce/metrics.hpp"

#ifndef IRSCE_VERSION
#define IRSCE_VERSION "dev"
#endif

namespace irsce {
namespace {

std::shared_ptr<const RedundantDictionary> make_dictionary(const PipelineConfig& config)
{
    return std::make_shared<const RedundantDictionary>(build_dictionary(config.scenario, config.beta));
}

/// Runs body(i) for i in [0, n) on up to `threads` workers. The first
/// exception is rethrown after all workers stop.
template <typename Body>
void parallel_for(std::size_t n, unsigned threads, Body body)
{
    if (threads == 0)
        threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));
    if (threads <= 1) {
        for (std::size_t i = 0; i < n; ++i)
            body(i);
        return;
    }

    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) {
                try {
                    body(i);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!error)
                        error = std::current_exception();
                    next = n;
                }
            }
        });
    }
    for (auto& th : pool)
        th.join();
    if (error)
        std::rethrow_exception(error);
}

std::string fixed(double v, int precision = 3)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", precision, v);
    return buf;
}

} // namespace

Trial simulate_trial(const PipelineConfig& config, const std::shared_ptr<const RedundantDictionary>& dict,
                     std::uint64_t master_seed, std::uint64_t trial_index)
{
    Trial t;
    Rng path_rng(derive_seed(master_seed, trial_index, "paths"));
    t.channel = generate_channel(config.scenario, path_rng, &t.paths);

    Rng plan_rng(derive_seed(master_seed, trial_index, "plan"));
    t.plan = make_plan(config.scenario, config.b_slots(), config.n_rf, plan_rng, config.pattern);

    Rng noise_rng(derive_seed(master_seed, trial_index, "noise"));
    t.measurements = sound(t.channel, t.plan, config.snr_db, noise_rng);

    const SensingOperator op(t.measurements.phi, dict);
    const StopRule stop = StopRule::noise_floor(config.measurements, t.measurements.noise_var,
                                                config.scenario.n_paths, config.stop_delta);
    t.estimate = somp(t.measurements.observations, op, stop, {.score = config.score});
    t.recovered = reconstruct_spatial(t.estimate, *dict);
    t.nmse_db = nmse(t.channel, t.recovered);
    return t;
}

Trial simulate_trial(const PipelineConfig& config, std::uint64_t master_seed, std::uint64_t trial_index)
{
    config.validate();
    return simulate_trial(config, make_dictionary(config), master_seed, trial_index);
}

PipelineConfig apply_sweep_value(const PipelineConfig& base, SweepVariable variable, double value)
{
    PipelineConfig p = base;
    switch (variable) {
    case SweepVariable::measurements:
        if (value < 1.0 || value != std::floor(value))
            throw std::invalid_argument("measurements must be a positive integer");
        p.measurements = static_cast<arma::uword>(value);
        break;
    case SweepVariable::snr_db:
        p.snr_db = value;
        break;
    case SweepVariable::n_paths:
        if (value < 1.0 || value != std::floor(value))
            throw std::invalid_argument("n_paths must be a positive integer");
        p.scenario.n_paths = static_cast<arma::uword>(value);
        break;
    }
    return p;
}

SweepResult run_sweep(const ExperimentConfig& config)
{
    config.validate();
    const std::uint64_t master = config.pipeline.scenario.rng_seed;

    SweepResult result;
    result.config = config;
    for (std::size_t pi = 0; pi < config.values.size(); ++pi) {
        SweepPoint point;
        point.value = config.values[pi];

        PipelineConfig pc;
        try {
            pc = apply_sweep_value(config.pipeline, config.variable, point.value);
            pc.validate();
            if (pc.measurements > pc.scenario.n_irs())
                throw InvalidPlan("M = " + std::to_string(pc.measurements) + " exceeds " +
                                  std::to_string(pc.scenario.n_irs()) + " IRS elements");
        } catch (const std::exception& e) {
            point.skipped = true;
            point.reason = e.what();
            result.points.push_back(std::move(point));
            continue;
        }

        const auto dict = make_dictionary(pc);
        const bool denoise = config.estimator == Estimator::somp_dncnn;
        std::vector<double> nmse_db(config.trials);
        std::vector<Trial> kept(denoise ? config.trials : 0);
        parallel_for(config.trials, config.threads, [&](std::size_t i) {
            Trial t = simulate_trial(pc, dict, master, i);
            nmse_db[i] = t.nmse_db;
            if (denoise)
                kept[i] = std::move(t);
        });

        auto mean_db = [](const std::vector<double>& db) {
            double acc = 0.0;
            for (double v : db)
                acc += std::pow(10.0, v / 10.0);
            return to_db(acc / static_cast<double>(db.size()));
        };
        point.trials = config.trials;
        point.mean_nmse_db = mean_db(nmse_db);
        point.std_nmse_db = config.trials > 1 ? arma::stddev(arma::vec(nmse_db)) : 0.0;
        point.trial_nmse_db = nmse_db;

        if (denoise) {
            std::vector<arma::cx_mat> inputs;
            inputs.reserve(kept.size());
            for (const Trial& t : kept)
                inputs.push_back(angular_delay_transform(t.estimate.angular_frequency()).matrix);
            const auto work = std::filesystem::path(config.output_dir) / "denoiser_work" / ("point_" + std::to_string(pi));
            const auto enhanced = run_denoiser(config.denoiser, inputs, work);
            std::vector<double> enhanced_db(kept.size());
            for (std::size_t i = 0; i < kept.size(); ++i)
                enhanced_db[i] = nmse(kept[i].channel, final_channel({enhanced[i]}, *dict));
            point.mean_enhanced_db = mean_db(enhanced_db);
        }
        result.points.push_back(std::move(point));
    }
    return result;
}

std::string format_table(const SweepResult& result)
{
    const ExperimentConfig& c = result.config;
    const bool denoise = c.estimator == Estimator::somp_dncnn;
    std::ostringstream os;
    os << "# irsce sweep\n";
    os << "# variable: " << to_string(c.variable) << "\n";
    os << "# estimator: " << to_string(c.estimator) << "\n";
    os << "# trials_per_point: " << c.trials << "\n";
    os << "# master_seed: " << c.pipeline.scenario.rng_seed << "\n";
    os << "# irs_array: " << c.pipeline.scenario.n_irs_w << "x" << c.pipeline.scenario.n_irs_h
       << "  subcarriers: " << c.pipeline.scenario.k_subcarriers << "  beta: " << c.pipeline.beta << "\n";
    os << "#\n";
    char line[160];
    std::snprintf(line, sizeof line, "%12s %12s %10s %8s%s  %s\n", "value", "nmse_db", "std_db", "trials",
                  denoise ? "  enhanced_db" : "", "status");
    os << line;
    for (const SweepPoint& p : result.points) {
        if (p.skipped) {
            std::snprintf(line, sizeof line, "%12s %12s %10s %8s%s  skipped: ", fixed(p.value, 2).c_str(), "-", "-", "-",
                          denoise ? "            -" : "");
            os << line << p.reason << "\n";
            continue;
        }
        std::snprintf(line, sizeof line, "%12s %12s %10s %8llu", fixed(p.value, 2).c_str(),
                      fixed(p.mean_nmse_db).c_str(), fixed(p.std_nmse_db).c_str(),
                      static_cast<unsigned long long>(p.trials));
        os << line;
        if (denoise) {
            std::snprintf(line, sizeof line, "  %11s", fixed(p.mean_enhanced_db).c_str());
            os << line;
        }
        os << "  ok\n";
    }
    return os.str();
}

nlohmann::json to_json(const SweepResult& result)
{
    nlohmann::json points = nlohmann::json::array();
    for (const SweepPoint& p : result.points) {
        nlohmann::json jp = {{"value", p.value}, {"skipped", p.skipped}};
        if (p.skipped) {
            jp["reason"] = p.reason;
        } else {
            jp["mean_nmse_db"] = p.mean_nmse_db;
            jp["std_nmse_db"] = p.std_nmse_db;
            jp["trials"] = p.trials;
            jp["trial_nmse_db"] = p.trial_nmse_db;
            if (result.config.estimator == Estimator::somp_dncnn)
                jp["mean_enhanced_db"] = p.mean_enhanced_db;
        }
        points.push_back(std::move(jp));
    }
    return {{"producer", std::string("irsce ") + IRSCE_VERSION}, {"config", to_json(result.config)}, {"points", points}};
}

SweepResult sweep_from_json(const nlohmann::json& j)
{
    SweepResult r;
    try {
        const nlohmann::json& c = j.at("config");
        merge_json(c, r.config);
        for (const auto& jp : j.at("points")) {
            SweepPoint p;
            p.value = jp.at("value").get<double>();
            p.skipped = jp.at("skipped").get<bool>();
            if (p.skipped) {
                p.reason = jp.value("reason", "");
            } else {
                p.mean_nmse_db = jp.at("mean_nmse_db").get<double>();
                p.std_nmse_db = jp.at("std_nmse_db").get<double>();
                p.trials = jp.at("trials").get<arma::uword>();
                p.trial_nmse_db = jp.value("trial_nmse_db", std::vector<double>{});
                p.mean_enhanced_db = jp.value("mean_enhanced_db", 0.0);
            }
            r.points.push_back(std::move(p));
        }
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("sweep results: ") + e.what());
    }
    return r;
}

void write_results(const SweepResult& result, const std::filesystem::path& dir)
{
    std::filesystem::create_directories(dir);
    auto open = [&](const char* name) {
        std::ofstream out(dir / name, std::ios::trunc);
        if (!out)
            throw std::runtime_error("write_results: cannot open " + (dir / name).string());
        return out;
    };
    open("results.txt") << format_table(result);
    open("results.json") << to_json(result).dump(2) << '\n';

    const bool denoise = result.config.estimator == Estimator::somp_dncnn;
    auto dat = open("results.dat");
    dat << "# " << to_string(result.config.variable) << " mean_nmse_db std_nmse_db" << (denoise ? " mean_enhanced_db" : "")
        << "\n";
    for (const SweepPoint& p : result.points) {
        if (p.skipped)
            continue;
        dat << p.value << ' ' << p.mean_nmse_db << ' ' << p.std_nmse_db;
        if (denoise)
            dat << ' ' << p.mean_enhanced_db;
        dat << '\n';
    }
}

DictionaryProjector::DictionaryProjector(const RedundantDictionary& dict) : pinv_(arma::pinv(dict.psi())) {}

arma::cx_mat DictionaryProjector::project(const FrequencyChannel& channel) const
{
    const arma::uword n = channel.n_rows() * channel.n_cols();
    if (n != pinv_.n_cols)
        throw ShapeError("DictionaryProjector: channel does not match dictionary antenna count");
    const arma::cx_mat stacked = arma::reshape(arma::cx_vec(arma::vectorise(channel.subchannels)), n, channel.n_subcarriers());
    return pinv_ * stacked;
}

void export_dataset(const PipelineConfig& config, std::uint64_t count, const std::filesystem::path& dir,
                    const ExportOptions& options)
{
    config.validate();
    if (count == 0)
        throw std::invalid_argument("export_dataset: count must be >= 1");
    if (options.chunk_size == 0)
        throw std::invalid_argument("export_dataset: chunk_size must be >= 1");

    std::filesystem::create_directories(dir);
    const auto dict = make_dictionary(config);
    const DictionaryProjector projector(*dict);
    const std::uint64_t rows = dict->size();
    const std::uint64_t cols = config.scenario.k_subcarriers;
    const std::uint64_t master = config.scenario.rng_seed;
    const std::uint64_t n_chunks = (count + options.chunk_size - 1) / options.chunk_size;

    nlohmann::json chunk_names = nlohmann::json::array();
    for (std::uint64_t c = 0; c < n_chunks; ++c) {
        char name[32];
        std::snprintf(name, sizeof name, "chunk_%05llu.cbin", static_cast<unsigned long long>(c));
        const auto path = dir / name;
        chunk_names.push_back(name);
        const std::uint64_t begin = c * options.chunk_size;
        const std::uint64_t n = std::min<std::uint64_t>(options.chunk_size, count - begin);
        const std::vector<std::uint64_t> shape{n, 2, rows, cols};

        if (std::filesystem::exists(path) && std::filesystem::exists(metadata_path(path))) {
            std::ifstream in(path, std::ios::binary);
            try {
                const TensorHeader h = read_header(in, path.string());
                if (h.shape == shape && h.dtype == options.dtype &&
                    std::filesystem::file_size(path) == h.header_bytes() + h.payload_bytes)
                    continue;
            } catch (const FormatError&) {
                // rewritten below
            }
        }

        std::filesystem::remove(metadata_path(path));
        TensorStreamWriter writer(path, shape, options.dtype);
        nlohmann::json samples = nlohmann::json::array();
        for (std::uint64_t i = 0; i < n; ++i) {
            const std::uint64_t trial = options.first_trial + begin + i;
            const Trial t = simulate_trial(config, dict, master, trial);
            writer.append(angular_delay_transform(t.estimate.angular_frequency()).matrix);
            writer.append(angular_delay_transform(projector.project(t.channel)).matrix);
            samples.push_back({{"index", begin + i},
                               {"trial", trial},
                               {"master_seed", master},
                               {"snr_db", config.snr_db},
                               {"n_paths", config.scenario.n_paths},
                               {"measurements", config.measurements},
                               {"support_size", t.estimate.support.n_elem},
                               {"nmse_somp_db", t.nmse_db}});
        }
        writer.close();
        write_metadata(path, {{"producer", std::string("irsce ") + IRSCE_VERSION},
                              {"pipeline", to_json(config)},
                              {"pair_axis", {"noisy", "clean"}},
                              {"samples", samples}});
    }

    const nlohmann::json manifest = {{"format", "irsce-dataset"},
                                     {"version", kTensorVersion},
                                     {"producer", std::string("irsce ") + IRSCE_VERSION},
                                     {"count", count},
                                     {"chunk_size", options.chunk_size},
                                     {"rows", rows},
                                     {"cols", cols},
                                     {"dtype", options.dtype == Dtype::float64 ? "float64" : "float32"},
                                     {"layout", "[n, 2 (noisy, clean), angular grid, delay]"},
                                     {"pipeline", to_json(config)},
                                     {"chunks", chunk_names}};
    std::ofstream out(dir / kManifestName, std::ios::trunc);
    if (!out)
        throw std::runtime_error("export_dataset: cannot write " + (dir / kManifestName).string());
    out << manifest.dump(2) << '\n';
}

} // namespace irsce
