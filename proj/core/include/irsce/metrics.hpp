// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "irsce/channel_model.hpp"

namespace irsce {

/// Reported in place of -inf for an exact estimate.
inline constexpr double kNmseFloorDb = -300.0;

/// sum_k ||H_k - Hhat_k||_F^2 / sum_k ||H_k||_F^2. Throws UndefinedMetric for
/// a zero true channel and ShapeError on mismatched shapes.
double nmse_linear(const FrequencyChannel& truth, const FrequencyChannel& estimate);

/// nmse_linear in dB, clamped below at kNmseFloorDb.
double nmse(const FrequencyChannel& truth, const FrequencyChannel& estimate);

double to_db(double linear);

} // namespace irsce
