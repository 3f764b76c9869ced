// SPDX-License-Identifier: Apache-2.0
#include "irsce/denoiser_bridge.hpp"

#include <cstdlib>

#include "irsce/dataset.hpp"
#include "irsce/errors.hpp"

namespace irsce {
namespace {

std::string shell_quote(const std::string& s)
{
    std::string out = "'";
    for (char c : s) {
        if (c == '\'')
            out += "'\\''";
        else
            out += c;
    }
    return out + "'";
}

void replace_all(std::string& s, const std::string& key, const std::string& value)
{
    for (std::size_t pos = s.find(key); pos != std::string::npos; pos = s.find(key, pos + value.size()))
        s.replace(pos, key.size(), value);
}

} // namespace

DenoiserModelSpec read_model_spec(const std::filesystem::path& weights)
{
    const nlohmann::json j = read_metadata(weights);
    DenoiserModelSpec spec;
    try {
        spec.model = j.at("model").get<std::string>();
        spec.depth = j.at("depth").get<int>();
        spec.width = j.at("width").get<int>();
        spec.kernel = j.at("kernel").get<int>();
        spec.normalization = j.at("normalization").get<std::string>();
        spec.io_channels = j.at("io_channels").get<int>();
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(metadata_path(weights).string() + ": " + e.what());
    }
    return spec;
}

void check_compatible(const DenoiserModelSpec& spec)
{
    if (spec.model != "cv-dncnn")
        throw FormatError("denoiser weights: model is '" + spec.model + "', expected cv-dncnn");
    if (spec.io_channels != 1)
        throw FormatError("denoiser weights: io_channels must be 1 complex channel");
    if (spec.kernel < 1 || spec.kernel % 2 == 0)
        throw FormatError("denoiser weights: kernel must be odd to preserve shape");
    if (spec.depth < 3)
        throw FormatError("denoiser weights: depth must cover input, middle and output layers");
    if (spec.width < 1)
        throw FormatError("denoiser weights: width must be positive");
    if (spec.normalization != "complex" && spec.normalization != "per-component")
        throw FormatError("denoiser weights: unknown normalization '" + spec.normalization + "'");
}

std::string substitute_command(const std::string& command_template, const std::filesystem::path& weights,
                               const std::filesystem::path& input, const std::filesystem::path& output)
{
    std::string cmd = command_template;
    replace_all(cmd, "{weights}", shell_quote(weights.string()));
    replace_all(cmd, "{input}", shell_quote(input.string()));
    replace_all(cmd, "{output}", shell_quote(output.string()));
    return cmd;
}

std::vector<arma::cx_mat> run_denoiser(const DenoiserSettings& settings, const std::vector<arma::cx_mat>& inputs,
                                       const std::filesystem::path& work_dir)
{
    if (inputs.empty())
        return {};
    check_compatible(read_model_spec(settings.weights));

    const arma::uword rows = inputs.front().n_rows;
    const arma::uword cols = inputs.front().n_cols;
    std::filesystem::create_directories(work_dir);
    const auto in_path = work_dir / "denoise_input.cbin";
    const auto out_path = work_dir / "denoise_output.cbin";
    std::filesystem::remove(out_path);

    {
        TensorStreamWriter writer(in_path, {inputs.size(), rows, cols});
        for (const auto& m : inputs) {
            if (m.n_rows != rows || m.n_cols != cols)
                throw ShapeError("run_denoiser: inputs have differing shapes");
            writer.append(m);
        }
        writer.close();
    }

    const std::string cmd = substitute_command(settings.command, settings.weights, in_path, out_path);
    const int status = std::system(cmd.c_str());
    if (status != 0)
        throw std::runtime_error("run_denoiser: command failed with status " + std::to_string(status) + ": " + cmd);

    const ComplexTensor out = read_tensor(out_path);
    if (out.shape != std::vector<std::uint64_t>{inputs.size(), rows, cols})
        throw FormatError(out_path.string() + ": denoiser output shape differs from its input");

    std::vector<arma::cx_mat> enhanced;
    enhanced.reserve(inputs.size());
    std::size_t i = 0;
    for (std::size_t n = 0; n < inputs.size(); ++n) {
        arma::cx_mat m(rows, cols);
        for (arma::uword r = 0; r < rows; ++r)
            for (arma::uword c = 0; c < cols; ++c)
                m(r, c) = out.values[i++];
        enhanced.push_back(std::move(m));
    }
    return enhanced;
}

} // namespace irsce
