// SPDX-License-Identifier: Apache-2.0
//
// irsce: command-line front end for the IRS compressive channel estimation
// workbench.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "irsce/config.hpp"
#include "irsce/dataset.hpp"
#include "irsce/denoiser_bridge.hpp"
#include "irsce/experiment.hpp"
#include "irsce/metrics.hpp"

namespace fs = std::filesystem;
using namespace irsce;

namespace {

struct CommonOptions {
    std::string config_path;
    std::string preset_name = "desk";
    std::optional<std::uint64_t> seed;
    std::optional<arma::uword> trials;
    std::string output = "irsce_out";
    std::optional<std::string> estimator;
    std::optional<arma::uword> beta;
    std::optional<arma::uword> measurements;
    std::optional<double> snr_db;
    std::optional<arma::uword> paths;

    void attach(CLI::App* app)
    {
        app->add_option("--config", config_path, "JSON experiment file")->check(CLI::ExistingFile);
        app->add_option("--preset", preset_name, "Base configuration")
            ->check(CLI::IsMember({"desk", "paper", "paper-24"}));
        app->add_option("--seed", seed, "Master seed (u64)");
        app->add_option("--trials", trials, "Monte-Carlo trials per point");
        app->add_option("--output", output, "Output directory");
        app->add_option("--estimator", estimator, "Estimator chain")->check(CLI::IsMember({"somp", "somp+dncnn"}));
        app->add_option("--beta", beta, "Dictionary oversampling rate");
        app->add_option("--measurements", measurements, "Number of measurements M");
        app->add_option("--snr-db", snr_db, "Target SNR in dB");
        app->add_option("--paths", paths, "Number of multipath components L");
    }

    ExperimentConfig resolve() const
    {
        ExperimentConfig cfg;
        if (!config_path.empty())
            cfg = load_experiment(config_path);
        else
            cfg.pipeline = preset(preset_name);
        cfg.output_dir = output;
        if (seed)
            cfg.pipeline.scenario.rng_seed = *seed;
        if (trials)
            cfg.trials = *trials;
        if (estimator)
            cfg.estimator = parse_estimator(*estimator);
        if (beta)
            cfg.pipeline.beta = *beta;
        if (measurements)
            cfg.pipeline.measurements = *measurements;
        if (snr_db)
            cfg.pipeline.snr_db = *snr_db;
        if (paths)
            cfg.pipeline.scenario.n_paths = *paths;
        return cfg;
    }
};

nlohmann::json paths_json(const PathSet& set)
{
    nlohmann::json arr = nlohmann::json::array();
    for (const Path& p : set.paths)
        arr.push_back({{"gain_re", p.gain.real()},
                       {"gain_im", p.gain.imag()},
                       {"delay_s", p.delay},
                       {"aoa_azimuth_rad", p.aoa.azimuth},
                       {"aoa_elevation_rad", p.aoa.elevation},
                       {"aod_azimuth_rad", p.aod.azimuth},
                       {"aod_elevation_rad", p.aod.elevation}});
    return arr;
}

nlohmann::json plan_json(const SoundingPlan& plan)
{
    nlohmann::json slots = nlohmann::json::array();
    for (arma::uword b = 0; b < plan.b_slots; ++b) {
        nlohmann::json f = nlohmann::json::array();
        for (arma::uword i = 0; i < plan.precoders[b].n_elem; ++i)
            f.push_back({plan.precoders[b](i).real(), plan.precoders[b](i).imag()});
        slots.push_back({{"active", plan.active_indices[b]}, {"precoder_colmajor", f}});
    }
    return {{"b_slots", plan.b_slots}, {"n_rf", plan.n_rf}, {"n_irs", plan.n_irs}, {"slots", slots}};
}

int cmd_generate(const CommonOptions& opt, std::uint64_t count)
{
    const ExperimentConfig cfg = opt.resolve();
    cfg.pipeline.validate();
    fs::create_directories(cfg.output_dir);
    const std::uint64_t master = cfg.pipeline.scenario.rng_seed;
    for (std::uint64_t i = 0; i < count; ++i) {
        Rng rng(derive_seed(master, i, "paths"));
        PathSet paths;
        const FrequencyChannel h = generate_channel(cfg.pipeline.scenario, rng, &paths);
        char name[40];
        std::snprintf(name, sizeof name, "channel_%05llu.cbin", static_cast<unsigned long long>(i));
        const fs::path out = fs::path(cfg.output_dir) / name;
        write_tensor(out, to_tensor(h));
        write_metadata(out, {{"kind", "frequency-channel"},
                             {"layout", "[K, N_IRS, N_UE]"},
                             {"trial", i},
                             {"master_seed", master},
                             {"scenario", to_json(cfg.pipeline.scenario)},
                             {"paths", paths_json(paths)}});
        std::cout << out.string() << "\n";
    }
    return 0;
}

int cmd_sound(const CommonOptions& opt, const std::string& channel_path, std::uint64_t trial)
{
    const ExperimentConfig cfg = opt.resolve();
    const PipelineConfig& pc = cfg.pipeline;
    pc.validate();
    const std::uint64_t master = pc.scenario.rng_seed;

    FrequencyChannel h;
    if (!channel_path.empty()) {
        h = to_channel(read_tensor(channel_path));
    } else {
        Rng rng(derive_seed(master, trial, "paths"));
        h = generate_channel(pc.scenario, rng);
    }
    Rng plan_rng(derive_seed(master, trial, "plan"));
    const SoundingPlan plan = make_plan(pc.scenario, pc.b_slots(), pc.n_rf, plan_rng, pc.pattern);
    Rng noise_rng(derive_seed(master, trial, "noise"));
    const MeasurementSet ms = sound(h, plan, pc.snr_db, noise_rng);

    fs::create_directories(cfg.output_dir);
    const fs::path obs = fs::path(cfg.output_dir) / "observations.cbin";
    const fs::path phi = fs::path(cfg.output_dir) / "phi.cbin";
    write_tensor(obs, to_tensor(ms.observations));
    write_tensor(phi, to_tensor(ms.phi));
    write_metadata(obs, {{"kind", "observations"},
                         {"layout", "[M, K]"},
                         {"phi", phi.filename().string()},
                         {"noise_var", ms.noise_var},
                         {"snr_db", pc.snr_db},
                         {"trial", trial},
                         {"pipeline", to_json(pc)},
                         {"plan", plan_json(plan)}});
    write_metadata(phi, {{"kind", "measurement-matrix"}, {"layout", "[M, N_IRS * N_UE]"}});
    std::cout << obs.string() << "\n" << phi.string() << "\n";
    return 0;
}

int cmd_estimate(const CommonOptions& opt, const std::string& obs_path, const std::string& truth_path)
{
    const nlohmann::json meta = read_metadata(obs_path);
    PipelineConfig pc = opt.resolve().pipeline;
    if (meta.contains("pipeline"))
        merge_json(meta["pipeline"], pc);
    if (opt.beta)
        pc.beta = *opt.beta;
    pc.validate();

    const arma::cx_mat y = to_matrix(read_tensor(obs_path));
    const arma::cx_mat phi = to_matrix(read_tensor(fs::path(obs_path).parent_path() / meta.at("phi").get<std::string>()));
    const double noise_var = meta.at("noise_var").get<double>();

    const auto dict = std::make_shared<const RedundantDictionary>(build_dictionary(pc.scenario, pc.beta));
    const SensingOperator op(phi, dict);
    const StopRule stop = StopRule::noise_floor(y.n_rows, noise_var, pc.scenario.n_paths, pc.stop_delta);
    const SparseEstimate est = somp(y, op, stop, {.score = pc.score});
    const FrequencyChannel h_hat = reconstruct_spatial(est, *dict);
    const AngularDelayGrid g_hat = angular_delay_transform(est.angular_frequency());

    fs::create_directories(opt.output);
    const fs::path g_path = fs::path(opt.output) / "angular_delay.cbin";
    const fs::path h_path = fs::path(opt.output) / "estimate_channel.cbin";
    write_tensor(g_path, to_tensor(g_hat.matrix));
    write_tensor(h_path, to_tensor(h_hat));
    nlohmann::json est_meta = {{"kind", "somp-estimate"},
                               {"support", std::vector<arma::uword>(est.support.begin(), est.support.end())},
                               {"grid_rx", est.grid_rx},
                               {"grid_tx", est.grid_tx},
                               {"regularized", est.regularized},
                               {"beta", pc.beta},
                               {"dft", "unitary"}};
    write_metadata(g_path, est_meta);
    write_metadata(h_path, {{"kind", "frequency-channel"}, {"layout", "[K, N_IRS, N_UE]"}});
    std::cout << "support size: " << est.support.n_elem << (est.regularized ? " (regularized)" : "") << "\n";
    if (!truth_path.empty()) {
        const FrequencyChannel h = to_channel(read_tensor(truth_path));
        std::cout << "nmse_db: " << nmse(h, h_hat) << "\n";
    }
    return 0;
}

int cmd_sweep(const CommonOptions& opt, const std::string& variable, const std::vector<double>& values,
              const std::string& denoiser_cmd, const std::string& weights)
{
    ExperimentConfig cfg = opt.resolve();
    if (!variable.empty())
        cfg.variable = parse_sweep_variable(variable);
    if (!values.empty())
        cfg.values = values;
    if (!denoiser_cmd.empty())
        cfg.denoiser.command = denoiser_cmd;
    if (!weights.empty())
        cfg.denoiser.weights = weights;
    const SweepResult r = run_sweep(cfg);
    write_results(r, cfg.output_dir);
    std::cout << format_table(r);
    return 0;
}

int cmd_export(const CommonOptions& opt, std::uint64_t count, arma::uword chunk, const std::string& dtype)
{
    const ExperimentConfig cfg = opt.resolve();
    ExportOptions eo;
    eo.chunk_size = chunk;
    eo.dtype = dtype == "float32" ? Dtype::float32 : Dtype::float64;
    export_dataset(cfg.pipeline, count, cfg.output_dir, eo);
    std::cout << (fs::path(cfg.output_dir) / kManifestName).string() << "\n";
    return 0;
}

int cmd_denoise_eval(const CommonOptions& opt, const std::string& denoiser_cmd, const std::string& weights)
{
    ExperimentConfig cfg = opt.resolve();
    cfg.estimator = Estimator::somp_dncnn;
    cfg.variable = SweepVariable::snr_db;
    cfg.values = {cfg.pipeline.snr_db};
    if (!denoiser_cmd.empty())
        cfg.denoiser.command = denoiser_cmd;
    cfg.denoiser.weights = weights;
    const DenoiserModelSpec spec = read_model_spec(weights);
    check_compatible(spec);
    const SweepResult r = run_sweep(cfg);
    write_results(r, cfg.output_dir);
    const SweepPoint& p = r.points.front();
    std::cout << "model: " << spec.model << " depth=" << spec.depth << " width=" << spec.width
              << " normalization=" << spec.normalization << "\n";
    std::cout << "somp_nmse_db: " << p.mean_nmse_db << "\n";
    std::cout << "enhanced_nmse_db: " << p.mean_enhanced_db << "\n";
    std::cout << "gain_db: " << p.mean_nmse_db - p.mean_enhanced_db << "\n";
    return 0;
}

int cmd_report(const std::vector<std::string>& files, bool columns)
{
    for (const auto& f : files) {
        std::ifstream in(f);
        if (!in)
            throw std::runtime_error("report: cannot open " + f);
        const SweepResult r = sweep_from_json(nlohmann::json::parse(in));
        if (!columns) {
            std::cout << "## " << f << "\n" << format_table(r) << "\n";
            continue;
        }
        std::cout << "# " << f << "\n# " << to_string(r.config.variable) << " mean_nmse_db std_nmse_db\n";
        for (const auto& p : r.points)
            if (!p.skipped)
                std::cout << p.value << ' ' << p.mean_nmse_db << ' ' << p.std_nmse_db << '\n';
    }
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"irsce - compressive channel estimation workbench for IRS-assisted mmWave MIMO-OFDM"};
    app.require_subcommand(1);

    CommonOptions gen_opt, sound_opt, est_opt, sweep_opt, export_opt, deval_opt;

    auto* gen = app.add_subcommand("generate", "Draw random broadband channels");
    gen_opt.attach(gen);
    std::uint64_t gen_count = 1;
    gen->add_option("--count", gen_count, "Number of channels");

    auto* snd = app.add_subcommand("sound", "Simulate antenna-switched pilot sounding");
    sound_opt.attach(snd);
    std::string channel_path;
    std::uint64_t sound_trial = 0;
    snd->add_option("--channel", channel_path, "Channel container (default: draw one)")->check(CLI::ExistingFile);
    snd->add_option("--trial", sound_trial, "Trial index for seed derivation");

    auto* est = app.add_subcommand("estimate", "SOMP recovery from sounded observations");
    est_opt.attach(est);
    std::string obs_path, truth_path;
    est->add_option("--input", obs_path, "observations.cbin from 'sound'")->required()->check(CLI::ExistingFile);
    est->add_option("--truth", truth_path, "True channel container, to report NMSE")->check(CLI::ExistingFile);

    auto* swp = app.add_subcommand("sweep", "Monte-Carlo NMSE sweep");
    sweep_opt.attach(swp);
    std::string sweep_var, sweep_cmd, sweep_weights;
    std::vector<double> sweep_values;
    swp->add_option("--variable", sweep_var, "measurements | snr_db | n_paths");
    swp->add_option("--values", sweep_values, "Strictly increasing sweep values");
    swp->add_option("--denoiser-cmd", sweep_cmd, "Denoiser command template");
    swp->add_option("--weights", sweep_weights, "Denoiser weights (somp+dncnn)");

    auto* exp = app.add_subcommand("export-dataset", "Write (noisy, clean) angular-delay training pairs");
    export_opt.attach(exp);
    std::uint64_t export_count = 5000;
    arma::uword chunk = 64;
    std::string dtype = "float64";
    exp->add_option("--count", export_count, "Number of sample pairs");
    exp->add_option("--chunk-size", chunk, "Samples per chunk file");
    exp->add_option("--dtype", dtype, "Payload precision")->check(CLI::IsMember({"float32", "float64"}));

    auto* dev = app.add_subcommand("denoise-eval", "SOMP followed by the external CV-DnCNN denoiser");
    deval_opt.attach(dev);
    std::string deval_cmd, deval_weights;
    dev->add_option("--denoiser-cmd", deval_cmd, "Command template with {weights} {input} {output}");
    dev->add_option("--weights", deval_weights, "Weight file (with .json sidecar)")->required();

    auto* rep = app.add_subcommand("report", "Print sweep results");
    std::vector<std::string> report_files;
    bool report_columns = false;
    rep->add_option("files", report_files, "results.json files")->required()->check(CLI::ExistingFile);
    rep->add_flag("--columns", report_columns, "Plot-ready columns instead of tables");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*gen)
            return cmd_generate(gen_opt, gen_count);
        if (*snd)
            return cmd_sound(sound_opt, channel_path, sound_trial);
        if (*est)
            return cmd_estimate(est_opt, obs_path, truth_path);
        if (*swp)
            return cmd_sweep(sweep_opt, sweep_var, sweep_values, sweep_cmd, sweep_weights);
        if (*exp)
            return cmd_export(export_opt, export_count, chunk, dtype);
        if (*dev)
            return cmd_denoise_eval(deval_opt, deval_cmd, deval_weights);
        if (*rep)
            return cmd_report(report_files, report_columns);
    } catch (const std::exception& e) {
        std::cerr << "irsce: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
