#include "driftids/numgrad/adam.hpp"

#include <cmath>

namespace driftids::numgrad {

AdamState AdamState::for_params(const ParamSet& params, AdamConfig config) {
    AdamState s;
    s.first_moment = GradSet::zeros_like(params);
    s.second_moment = GradSet::zeros_like(params);
    s.config = config;
    return s;
}

bool AdamState::operator==(const AdamState& other) const {
    return first_moment == other.first_moment && second_moment == other.second_moment &&
           step == other.step && config.beta1 == other.config.beta1 &&
           config.beta2 == other.config.beta2 && config.epsilon == other.config.epsilon;
}

void adam_step(ParamSet& params, const GradSet& grads, AdamState& state, double learning_rate) {
    require(params.same_layout(grads), ErrorKind::contract, "adam: gradient layout mismatch");
    require(params.same_layout(state.first_moment), ErrorKind::contract,
            "adam: optimizer state layout mismatch");
    for (std::size_t i = 0; i < grads.count(); ++i) {
        if (!grads[i].all_finite()) {
            fail(ErrorKind::numeric, "adam: non-finite gradient in " + grads.name(i));
        }
    }
    state.step += 1;
    const auto t = static_cast<double>(state.step);
    const double b1 = state.config.beta1;
    const double b2 = state.config.beta2;
    const double c1 = 1.0 - std::pow(b1, t);
    const double c2 = 1.0 - std::pow(b2, t);
    for (std::size_t i = 0; i < params.count(); ++i) {
        auto p = params[i].values();
        auto g = grads[i].values();
        auto m = state.first_moment[i].values();
        auto v = state.second_moment[i].values();
        for (std::size_t k = 0; k < p.size(); ++k) {
            m[k] = b1 * m[k] + (1.0 - b1) * g[k];
            v[k] = b2 * v[k] + (1.0 - b2) * g[k] * g[k];
            const double m_hat = m[k] / c1;
            const double v_hat = v[k] / c2;
            p[k] -= learning_rate * m_hat / (std::sqrt(v_hat) + state.config.epsilon);
        }
    }
}

}  // namespace driftids::numgrad
