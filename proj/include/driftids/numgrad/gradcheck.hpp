#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <utility>

#include "driftids/numgrad/tensors.hpp"

namespace driftids::numgrad {

// Loss value and its analytic gradient at the given parameters.
using LossAndGrad = std::function<std::pair<double, GradSet>(const ParamSet&)>;

struct GradCheckResult {
    double max_relative_error = 0.0;
    std::size_t worst_index = 0;
    std::size_t coordinates_checked = 0;
};

struct GradCheckOptions {
    double step = 1e-5;
    std::size_t samples = 64;     // all coordinates when >= flat size
    std::uint64_t seed = 0;
    double denominator_floor = 1e-6;
};

// Compares the analytic gradient against central differences on sampled
// coordinates. Relative error is |analytic − numeric| / max(|numeric|, floor).
GradCheckResult finite_difference_check(const LossAndGrad& loss_fn, const ParamSet& params,
                                        const GradCheckOptions& options = {});

}  // namespace driftids::numgrad
