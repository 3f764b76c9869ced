// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "irsce/channel_model.hpp"
#include "irsce/pilot_sounding.hpp"
#include "irsce/somp.hpp"

namespace irsce {

/// Everything needed to run one sound -> recover trial.
struct PipelineConfig {
    ScenarioConfig scenario;
    arma::uword measurements = 32;  ///< M = B * n_rf
    arma::uword n_rf = 1;
    arma::uword beta = 2;
    double snr_db = 10.0;
    ElementPattern pattern = ElementPattern::random;
    AtomScore score = AtomScore::l1;
    double stop_delta = 0.1;  ///< residual threshold slack over the noise floor

    arma::uword b_slots() const { return measurements / n_rf; }
    void validate() const;
};

enum class SweepVariable { measurements, snr_db, n_paths };
enum class Estimator { somp, somp_dncnn };

/// External denoiser invocation. `command` is a template with {weights},
/// {input} and {output} placeholders, substituted with quoted paths.
struct DenoiserSettings {
    std::string command = "cvdncnn denoise --weights {weights} --input {input} --output {output}";
    std::string weights;
};

struct ExperimentConfig {
    PipelineConfig pipeline;
    SweepVariable variable = SweepVariable::measurements;
    std::vector<double> values;
    arma::uword trials = 100;
    Estimator estimator = Estimator::somp;
    std::string output_dir = "results";
    DenoiserSettings denoiser;
    unsigned threads = 0;  ///< 0: hardware concurrency

    void validate() const;
};

/// "desk" (8x8, K=64, L_CP=16, M=32, beta=2), "paper" (16x16, K=256,
/// L_CP=32, M=64, beta=4) or "paper-24" (paper with a 24x24 IRS).
PipelineConfig preset(const std::string& name);

std::string to_string(SweepVariable v);
std::string to_string(Estimator e);
SweepVariable parse_sweep_variable(const std::string& s);
Estimator parse_estimator(const std::string& s);

nlohmann::json to_json(const ScenarioConfig& c);
nlohmann::json to_json(const PipelineConfig& c);
nlohmann::json to_json(const ExperimentConfig& c);

/// Keys absent from `j` keep the values already in `out`; unknown keys throw
/// FormatError naming the key.
void merge_json(const nlohmann::json& j, ScenarioConfig& out);
void merge_json(const nlohmann::json& j, PipelineConfig& out);
void merge_json(const nlohmann::json& j, ExperimentConfig& out);

/// Reads a JSON experiment file. A top-level "preset" key selects the base.
ExperimentConfig load_experiment(const std::filesystem::path& path);

} // namespace irsce
