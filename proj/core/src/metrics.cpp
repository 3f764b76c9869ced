// SPDX-License-Identifier: Apache-2.0
#include "irsce/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "irsce/errors.hpp"

namespace irsce {

double nmse_linear(const FrequencyChannel& truth, const FrequencyChannel& estimate)
{
    if (arma::size(truth.subchannels) != arma::size(estimate.subchannels))
        throw ShapeError("nmse: channel shapes differ");
    const double energy = arma::accu(arma::square(arma::abs(truth.subchannels)));
    if (energy == 0.0)
        throw UndefinedMetric("nmse: true channel is identically zero");
    const double err = arma::accu(arma::square(arma::abs(truth.subchannels - estimate.subchannels)));
    return err / energy;
}

double to_db(double linear)
{
    if (linear <= 0.0)
        return kNmseFloorDb;
    return std::max(10.0 * std::log10(linear), kNmseFloorDb);
}

double nmse(const FrequencyChannel& truth, const FrequencyChannel& estimate)
{
    return to_db(nmse_linear(truth, estimate));
}

} // namespace irsce
