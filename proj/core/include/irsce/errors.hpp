// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>

namespace irsce {

struct InvalidPlan : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct ShapeError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct DegenerateSnr : std::domain_error {
    using std::domain_error::domain_error;
};

struct UndefinedMetric : std::domain_error {
    using std::domain_error::domain_error;
};

/// Malformed dataset container or config file.
struct FormatError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace irsce
