// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <armadillo>

#include "irsce/config.hpp"

namespace irsce {

/// Architecture fields carried by a denoiser weight file's JSON sidecar
/// ("<weights>.json").
struct DenoiserModelSpec {
    std::string model;
    int depth = 0;
    int width = 0;
    int kernel = 0;
    std::string normalization;
    int io_channels = 0;
};

DenoiserModelSpec read_model_spec(const std::filesystem::path& weights);

/// Throws FormatError unless the model maps one complex channel to one
/// complex channel with shape-preserving odd kernels.
void check_compatible(const DenoiserModelSpec& spec);

/// Fills the {weights}, {input} and {output} placeholders with shell-quoted paths.
std::string substitute_command(const std::string& command_template, const std::filesystem::path& weights,
                               const std::filesystem::path& input, const std::filesystem::path& output);

/// Runs the external denoiser once over a batch of angular-delay matrices,
/// exchanged as a [n, rows, K] tensor container in `work_dir`, and returns
/// the enhanced matrices in input order.
std::vector<arma::cx_mat> run_denoiser(const DenoiserSettings& settings, const std::vector<arma::cx_mat>& inputs,
                                       const std::filesystem::path& work_dir);

} // namespace irsce
