#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "driftids/idsmodel/model.hpp"
#include "driftids/idsmodel/trainer.hpp"
#include "driftids/numgrad/losses.hpp"

namespace driftids::clstrat {

using dataplane::FeatureWindow;
using idsmodel::ModelState;
using idsmodel::Penalty;
using numgrad::GradSet;
using numgrad::ParamSet;

// Online EWC: one accumulated diagonal Fisher and the latest anchor.
struct EwcState {
    double lambda = 100.0;
    std::size_t fisher_samples = 512;
    std::uint64_t seed = 0;
    std::optional<ParamSet> anchor;
    GradSet fisher;
};

// F += mean of squared per-sample gradients; anchor ← params.
void ewc_accumulate(EwcState& state, std::span<const GradSet> sample_grads, const ParamSet& params);

// Empirical Fisher from up to fisher_samples training windows drawn with the
// state's seed (one gradient per window).
void ewc_consolidate(EwcState& state, const ModelState& model, std::span<const FeatureWindow> train,
                     std::size_t domain_index);

// (λ/2) Σ F (θ − θ*)²; zero before the first consolidation.
Penalty ewc_penalty(const EwcState& state, const ParamSet& params);

// Synaptic Intelligence.
struct SiState {
    double c = 0.5;
    double xi = 0.1;
    std::optional<ParamSet> anchor;
    GradSet omega;      // running path integral of the current domain
    GradSet importance;  // consolidated Ω
};

// Sets the anchor on first use and resets ω.
void si_begin_domain(SiState& state, const ParamSet& params);
// ω += −g ⊙ Δθ
void si_on_step(SiState& state, const GradSet& grads, const GradSet& delta);
// Ω += max(0, ω) / ((θ − θ*)² + ξ); θ* ← θ; ω ← 0.
void si_consolidate(SiState& state, const ParamSet& params);
// c Σ Ω (θ − θ*)²
Penalty si_penalty(const SiState& state, const ParamSet& params);

struct LwfState {
    double temperature = 2.0;
    double weight = 1.0;
    std::optional<ModelState> teacher;
};

// λ_d · KL(teacher ‖ student) on the batch; nullopt without a teacher.
std::optional<numgrad::LossResult> lwf_output_loss(const LwfState& state,
                                                   std::span<const FeatureWindow> batch,
                                                   const numgrad::Matrix& student_logits);

}  // namespace driftids::clstrat
