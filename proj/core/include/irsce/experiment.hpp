// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "irsce/config.hpp"
#include "irsce/dataset.hpp"
#include "irsce/dictionary.hpp"
#include "irsce/pilot_sounding.hpp"
#include "irsce/somp.hpp"

namespace irsce {

/// Every intermediate of one simulated trial.
struct Trial {
    PathSet paths;
    FrequencyChannel channel;
    SoundingPlan plan;
    MeasurementSet measurements;
    SparseEstimate estimate;
    FrequencyChannel recovered;
    double nmse_db = 0.0;
};

/// Seeds are derive_seed(master, trial, tag) for the tags "paths", "plan"
/// and "noise", so a trial depends only on its own index.
Trial simulate_trial(const PipelineConfig& config, const std::shared_ptr<const RedundantDictionary>& dict,
                     std::uint64_t master_seed, std::uint64_t trial_index);

/// Shorthand building the dictionary on the fly.
Trial simulate_trial(const PipelineConfig& config, std::uint64_t master_seed, std::uint64_t trial_index);

struct SweepPoint {
    double value = 0.0;
    double mean_nmse_db = 0.0;      ///< 10 log10 of the mean linear NMSE
    double std_nmse_db = 0.0;       ///< spread of per-trial dB values
    double mean_enhanced_db = 0.0;  ///< after the denoiser, when run
    arma::uword trials = 0;
    bool skipped = false;
    std::string reason;
    std::vector<double> trial_nmse_db;
};

struct SweepResult {
    ExperimentConfig config;
    std::vector<SweepPoint> points;
};

/// The pipeline configuration with the swept variable set to `value`.
PipelineConfig apply_sweep_value(const PipelineConfig& base, SweepVariable variable, double value);

SweepResult run_sweep(const ExperimentConfig& config);

std::string format_table(const SweepResult& result);
nlohmann::json to_json(const SweepResult& result);
SweepResult sweep_from_json(const nlohmann::json& j);

/// results.txt (table), results.json and results.dat (plot-ready columns).
void write_results(const SweepResult& result, const std::filesystem::path& dir);

/// Clean angular-frequency target: min-norm least-squares coordinates of
/// each vec(H_k) on the full dictionary.
class DictionaryProjector {
public:
    explicit DictionaryProjector(const RedundantDictionary& dict);
    arma::cx_mat project(const FrequencyChannel& channel) const;

private:
    arma::cx_mat pinv_;
};

struct ExportOptions {
    arma::uword chunk_size = 64;
    Dtype dtype = Dtype::float64;
    std::uint64_t first_trial = 0;
};

/// Writes `count` (noisy SOMP, clean projected) angular-delay pairs to
/// chunk files plus a manifest. Complete chunks already on disk are kept,
/// so an interrupted export resumes where it stopped.
void export_dataset(const PipelineConfig& config, std::uint64_t count, const std::filesystem::path& dir,
                    const ExportOptions& options = {});

} // namespace irsce
