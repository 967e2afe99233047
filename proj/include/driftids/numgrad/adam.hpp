#pragma once

#include <cstdint>

#include "driftids/numgrad/tensors.hpp"

namespace driftids::numgrad {

struct AdamConfig {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

struct AdamState {
    GradSet first_moment;
    GradSet second_moment;
    std::uint64_t step = 0;
    AdamConfig config;

    static AdamState for_params(const ParamSet& params, AdamConfig config = {});

    bool operator==(const AdamState& other) const;
};

// Bias-corrected Adam update, in place. Throws a numeric error naming the
// offending tensor when a gradient is not finite; nothing is modified then.
void adam_step(ParamSet& params, const GradSet& grads, AdamState& state, double learning_rate);

}  // namespace driftids::numgrad
