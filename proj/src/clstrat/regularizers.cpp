#include "driftids/clstrat/regularizers.hpp"

#include <algorithm>
#include <numeric>

#include "driftids/errors.hpp"
#include "driftids/rng.hpp"

namespace driftids::clstrat {

namespace {

constexpr std::uint64_t kFisherStream = 0x66697368;

void require_layout(const ParamSet& anchor, const ParamSet& params, const char* who) {
    require(anchor.same_layout(params), ErrorKind::contract,
            std::string(who) + ": parameters do not match the anchor's layout");
}

}  // namespace

void ewc_accumulate(EwcState& state, std::span<const GradSet> sample_grads, const ParamSet& params) {
    require(!sample_grads.empty(), ErrorKind::data, "ewc: no samples for the Fisher estimate");
    if (state.fisher.count() == 0) {
        state.fisher = GradSet::zeros_like(params);
    }
    require(state.fisher.same_layout(params), ErrorKind::contract, "ewc: Fisher layout mismatch");
    const double inv_n = 1.0 / static_cast<double>(sample_grads.size());
    for (std::size_t t = 0; t < state.fisher.count(); ++t) {
        auto f = state.fisher[t].values();
        std::vector<double> sum(f.size(), 0.0);
        for (const auto& g : sample_grads) {
            const auto gv = g[t].values();
            for (std::size_t k = 0; k < f.size(); ++k) {
                sum[k] += gv[k] * gv[k];
            }
        }
        for (std::size_t k = 0; k < f.size(); ++k) {
            f[k] += sum[k] * inv_n;
        }
    }
    state.anchor = params;
}

void ewc_consolidate(EwcState& state, const ModelState& model, std::span<const FeatureWindow> train,
                     std::size_t domain_index) {
    require(!train.empty() && state.fisher_samples > 0, ErrorKind::data,
            "ewc: no samples for the Fisher estimate");
    std::vector<std::size_t> idx(train.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    if (idx.size() > state.fisher_samples) {
        Rng rng(derive_seed({state.seed, domain_index, kFisherStream}));
        rng.shuffle(idx);
        idx.resize(state.fisher_samples);
    }
    std::vector<GradSet> grads;
    grads.reserve(idx.size());
    for (std::size_t i : idx) {
        grads.push_back(idsmodel::loss_and_grad(model.params, model.config, train.subspan(i, 1)).second);
    }
    ewc_accumulate(state, grads, model.params);
}

Penalty ewc_penalty(const EwcState& state, const ParamSet& params) {
    Penalty out{0.0, GradSet::zeros_like(params)};
    if (!state.anchor) {
        return out;
    }
    require_layout(*state.anchor, params, "ewc penalty");
    for (std::size_t t = 0; t < params.count(); ++t) {
        const auto p = params[t].values();
        const auto a = (*state.anchor)[t].values();
        const auto f = state.fisher[t].values();
        auto g = out.grads[t].values();
        for (std::size_t k = 0; k < p.size(); ++k) {
            const double d = p[k] - a[k];
            out.value += f[k] * d * d;
            g[k] = state.lambda * f[k] * d;
        }
    }
    out.value *= 0.5 * state.lambda;
    return out;
}

void si_begin_domain(SiState& state, const ParamSet& params) {
    if (!state.anchor) {
        state.anchor = params;
        state.importance = GradSet::zeros_like(params);
    }
    state.omega = GradSet::zeros_like(params);
}

void si_on_step(SiState& state, const GradSet& grads, const GradSet& delta) {
    require(state.omega.same_layout(grads) && state.omega.same_layout(delta), ErrorKind::contract,
            "si: step called before si_begin_domain or with mismatched shapes");
    for (std::size_t t = 0; t < state.omega.count(); ++t) {
        auto w = state.omega[t].values();
        const auto g = grads[t].values();
        const auto d = delta[t].values();
        for (std::size_t k = 0; k < w.size(); ++k) {
            w[k] -= g[k] * d[k];
        }
    }
}

void si_consolidate(SiState& state, const ParamSet& params) {
    if (!state.anchor) {
        si_begin_domain(state, params);
    }
    require_layout(*state.anchor, params, "si consolidate");
    for (std::size_t t = 0; t < params.count(); ++t) {
        auto big = state.importance[t].values();
        const auto w = state.omega[t].values();
        const auto p = params[t].values();
        const auto a = (*state.anchor)[t].values();
        for (std::size_t k = 0; k < big.size(); ++k) {
            const double d = p[k] - a[k];
            big[k] += std::max(0.0, w[k]) / (d * d + state.xi);
        }
    }
    state.anchor = params;
    state.omega.set_zero();
}

Penalty si_penalty(const SiState& state, const ParamSet& params) {
    Penalty out{0.0, GradSet::zeros_like(params)};
    if (!state.anchor) {
        return out;
    }
    require_layout(*state.anchor, params, "si penalty");
    for (std::size_t t = 0; t < params.count(); ++t) {
        const auto p = params[t].values();
        const auto a = (*state.anchor)[t].values();
        const auto big = state.importance[t].values();
        auto g = out.grads[t].values();
        for (std::size_t k = 0; k < p.size(); ++k) {
            const double d = p[k] - a[k];
            out.value += big[k] * d * d;
            g[k] = 2.0 * state.c * big[k] * d;
        }
    }
    out.value *= state.c;
    return out;
}

std::optional<numgrad::LossResult> lwf_output_loss(const LwfState& state,
                                                   std::span<const FeatureWindow> batch,
                                                   const numgrad::Matrix& student_logits) {
    if (!state.teacher) {
        return std::nullopt;
    }
    const numgrad::Matrix teacher_logits =
        idsmodel::forward(state.teacher->params, state.teacher->config, batch, idsmodel::Mode::eval);
    numgrad::LossResult r = numgrad::distillation_loss(student_logits, teacher_logits, state.temperature);
    r.value *= state.weight;
    for (double& v : r.d_logits.values()) {
        v *= state.weight;
    }
    return r;
}

}  // namespace driftids::clstrat
