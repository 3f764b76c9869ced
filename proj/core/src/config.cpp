// SPDX-License-Identifier: Apache-2.0
#include "irsce/config.hpp"

#include <fstream>
#include <set>

#include "irsce/errors.hpp"

namespace irsce {
namespace {

using nlohmann::json;

void reject_unknown(const json& j, const std::set<std::string>& known, const std::string& section)
{
    if (!j.is_object())
        throw FormatError("config: section '" + section + "' must be an object");
    for (const auto& [key, _] : j.items())
        if (!known.contains(key))
            throw FormatError("config: unknown key '" + section + "." + key + "'");
}

template <typename T>
void take(const json& j, const char* key, T& out, const std::string& section)
{
    if (!j.contains(key))
        return;
    try {
        out = j.at(key).get<T>();
    } catch (const json::exception&) {
        throw FormatError("config: key '" + section + "." + key + "' has the wrong type");
    }
}

std::string to_string(ElementPattern p) { return p == ElementPattern::random ? "random" : "uniform-grid"; }
std::string to_string(AtomScore s) { return s == AtomScore::l1 ? "l1" : "l2"; }

} // namespace

void PipelineConfig::validate() const
{
    scenario.validate();
    if (n_rf == 0 || measurements == 0 || measurements % n_rf != 0)
        throw std::invalid_argument("PipelineConfig: measurements must be a positive multiple of n_rf");
    if (beta == 0)
        throw std::invalid_argument("PipelineConfig: beta must be >= 1");
    if (stop_delta < 0.0)
        throw std::invalid_argument("PipelineConfig: stop_delta must be non-negative");
}

void ExperimentConfig::validate() const
{
    pipeline.validate();
    if (trials == 0)
        throw std::invalid_argument("ExperimentConfig: trials must be >= 1");
    if (values.empty())
        throw std::invalid_argument("ExperimentConfig: sweep values are empty");
    for (std::size_t i = 1; i < values.size(); ++i)
        if (!(values[i] > values[i - 1]))
            throw std::invalid_argument("ExperimentConfig: sweep values must be strictly increasing");
    if (estimator == Estimator::somp_dncnn && denoiser.weights.empty())
        throw std::invalid_argument("ExperimentConfig: somp+dncnn needs denoiser.weights");
}

PipelineConfig preset(const std::string& name)
{
    PipelineConfig p;
    if (name == "desk")
        return p;
    if (name == "paper" || name == "paper-24") {
        p.scenario.n_irs_w = name == "paper" ? 16 : 24;
        p.scenario.n_irs_h = p.scenario.n_irs_w;
        p.scenario.k_subcarriers = 256;
        p.scenario.l_cp = 32;
        p.measurements = 64;
        p.beta = 4;
        return p;
    }
    throw std::invalid_argument("unknown preset '" + name + "' (expected desk, paper or paper-24)");
}

std::string to_string(SweepVariable v)
{
    switch (v) {
    case SweepVariable::measurements: return "measurements";
    case SweepVariable::snr_db: return "snr_db";
    case SweepVariable::n_paths: return "n_paths";
    }
    return "?";
}

std::string to_string(Estimator e) { return e == Estimator::somp ? "somp" : "somp+dncnn"; }

SweepVariable parse_sweep_variable(const std::string& s)
{
    if (s == "measurements" || s == "M")
        return SweepVariable::measurements;
    if (s == "snr_db" || s == "snr")
        return SweepVariable::snr_db;
    if (s == "n_paths" || s == "paths" || s == "L")
        return SweepVariable::n_paths;
    throw FormatError("config: unknown sweep variable '" + s + "'");
}

Estimator parse_estimator(const std::string& s)
{
    if (s == "somp")
        return Estimator::somp;
    if (s == "somp+dncnn")
        return Estimator::somp_dncnn;
    throw FormatError("config: unknown estimator '" + s + "'");
}

json to_json(const ScenarioConfig& c)
{
    return {{"n_irs_w", c.n_irs_w},
            {"n_irs_h", c.n_irs_h},
            {"n_ue_w", c.n_ue_w},
            {"n_ue_h", c.n_ue_h},
            {"n_ue_streams", c.n_ue_streams},
            {"k_subcarriers", c.k_subcarriers},
            {"n_paths", c.n_paths},
            {"f_carrier_hz", c.f_carrier_hz},
            {"f_bandwidth_hz", c.f_bandwidth_hz},
            {"l_cp_samples", c.l_cp},
            {"element_spacing_wavelengths", c.element_spacing},
            {"pulse_rolloff", c.pulse_rolloff},
            {"rng_seed", c.rng_seed}};
}

json to_json(const PipelineConfig& c)
{
    return {{"scenario", to_json(c.scenario)},
            {"measurements", c.measurements},
            {"n_rf", c.n_rf},
            {"beta", c.beta},
            {"snr_db", c.snr_db},
            {"element_pattern", to_string(c.pattern)},
            {"atom_score", to_string(c.score)},
            {"stop_delta", c.stop_delta}};
}

json to_json(const ExperimentConfig& c)
{
    return {{"pipeline", to_json(c.pipeline)},
            {"sweep", {{"variable", to_string(c.variable)}, {"values", c.values}}},
            {"trials", c.trials},
            {"estimator", to_string(c.estimator)},
            {"output_dir", c.output_dir},
            {"denoiser", {{"command", c.denoiser.command}, {"weights", c.denoiser.weights}}},
            {"threads", c.threads}};
}

void merge_json(const json& j, ScenarioConfig& out)
{
    const std::string s = "scenario";
    reject_unknown(j,
                   {"n_irs_w", "n_irs_h", "n_ue_w", "n_ue_h", "n_ue_streams", "k_subcarriers", "n_paths",
                    "f_carrier_hz", "f_bandwidth_hz", "l_cp_samples", "element_spacing_wavelengths",
                    "pulse_rolloff", "rng_seed"},
                   s);
    take(j, "n_irs_w", out.n_irs_w, s);
    take(j, "n_irs_h", out.n_irs_h, s);
    take(j, "n_ue_w", out.n_ue_w, s);
    take(j, "n_ue_h", out.n_ue_h, s);
    take(j, "n_ue_streams", out.n_ue_streams, s);
    take(j, "k_subcarriers", out.k_subcarriers, s);
    take(j, "n_paths", out.n_paths, s);
    take(j, "f_carrier_hz", out.f_carrier_hz, s);
    take(j, "f_bandwidth_hz", out.f_bandwidth_hz, s);
    take(j, "l_cp_samples", out.l_cp, s);
    take(j, "element_spacing_wavelengths", out.element_spacing, s);
    take(j, "pulse_rolloff", out.pulse_rolloff, s);
    take(j, "rng_seed", out.rng_seed, s);
}

void merge_json(const json& j, PipelineConfig& out)
{
    const std::string s = "pipeline";
    reject_unknown(j, {"scenario", "measurements", "n_rf", "beta", "snr_db", "element_pattern", "atom_score", "stop_delta"},
                   s);
    if (j.contains("scenario"))
        merge_json(j["scenario"], out.scenario);
    take(j, "measurements", out.measurements, s);
    take(j, "n_rf", out.n_rf, s);
    take(j, "beta", out.beta, s);
    take(j, "snr_db", out.snr_db, s);
    take(j, "stop_delta", out.stop_delta, s);
    if (j.contains("element_pattern")) {
        const auto p = j["element_pattern"].get<std::string>();
        if (p == "random")
            out.pattern = ElementPattern::random;
        else if (p == "uniform-grid")
            out.pattern = ElementPattern::uniform_grid;
        else
            throw FormatError("config: unknown element_pattern '" + p + "'");
    }
    if (j.contains("atom_score")) {
        const auto a = j["atom_score"].get<std::string>();
        if (a == "l1")
            out.score = AtomScore::l1;
        else if (a == "l2")
            out.score = AtomScore::l2;
        else
            throw FormatError("config: unknown atom_score '" + a + "'");
    }
}

void merge_json(const json& j, ExperimentConfig& out)
{
    const std::string s = "experiment";
    reject_unknown(j, {"preset", "pipeline", "sweep", "trials", "estimator", "output_dir", "denoiser", "threads"}, s);
    if (j.contains("pipeline"))
        merge_json(j["pipeline"], out.pipeline);
    if (j.contains("sweep")) {
        const json& sw = j["sweep"];
        reject_unknown(sw, {"variable", "values"}, "sweep");
        if (sw.contains("variable"))
            out.variable = parse_sweep_variable(sw["variable"].get<std::string>());
        take(sw, "values", out.values, "sweep");
    }
    take(j, "trials", out.trials, s);
    if (j.contains("estimator"))
        out.estimator = parse_estimator(j["estimator"].get<std::string>());
    take(j, "output_dir", out.output_dir, s);
    take(j, "threads", out.threads, s);
    if (j.contains("denoiser")) {
        const json& d = j["denoiser"];
        reject_unknown(d, {"command", "weights"}, "denoiser");
        take(d, "command", out.denoiser.command, "denoiser");
        take(d, "weights", out.denoiser.weights, "denoiser");
    }
}

ExperimentConfig load_experiment(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("load_experiment: cannot open " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
    ExperimentConfig cfg;
    if (j.contains("preset"))
        cfg.pipeline = preset(j["preset"].get<std::string>());
    merge_json(j, cfg);
    return cfg;
}

} // namespace irsce
