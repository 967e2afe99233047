#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "driftids/idsmodel/model.hpp"
#include "driftids/numgrad/losses.hpp"

namespace driftids::idsmodel {

using dataplane::WindowBatch;

struct TrainConfig {
    double learning_rate = 0.001;
    std::size_t epochs = 100;
    std::size_t batch_size = 256;
    std::uint64_t seed = 0;
};

struct TrainOutcome {
    double wall_time_seconds = 0.0;
    double final_train_loss = 0.0;
    std::vector<double> per_epoch_losses;
};

struct BatchContext {
    std::size_t domain_index = 0;
    std::size_t epoch = 0;
    std::size_t batch_index = 0;
    std::uint64_t step = 0;  // optimizer steps taken so far in this domain
};

struct Penalty {
    double value = 0.0;
    GradSet grads;
};

// Extension points a continual-learning strategy plugs into the training
// loop. Every hook defaults to a no-op; with no overrides the loop is plain
// fine-tuning.
class TrainingHooks {
public:
    virtual ~TrainingHooks() = default;

    virtual void before_domain(const ModelState& /*model*/, std::size_t /*domain_index*/) {}

    // `batch` is a gathered copy; appending to it never touches the dataset.
    virtual void augment_batch(WindowBatch& /*batch*/, const BatchContext& /*ctx*/) {}

    // Extra loss on the (augmented) batch's logits; d_logits is added to the
    // cross-entropy gradient. nullopt means no term.
    virtual std::optional<numgrad::LossResult> output_loss(const WindowBatch& /*batch*/,
                                                           const Matrix& /*logits*/) {
        return std::nullopt;
    }

    virtual Penalty loss_penalty(const ParamSet& params) {
        return Penalty{0.0, GradSet::zeros_like(params)};
    }

    // Called after each optimizer step with the task-loss gradient and the
    // realized parameter change.
    virtual void on_step(const ParamSet& /*params*/, const GradSet& /*task_grads*/,
                         const GradSet& /*delta*/) {}

    virtual void after_domain(const ModelState& /*model*/, std::size_t /*domain_index*/,
                              std::span<const FeatureWindow> /*train*/) {}
};

// Trains in place on one domain's training windows. Shuffling and dropout
// are seeded from (train_cfg.seed, domain_index, epoch).
TrainOutcome train_on_domain(ModelState& model, std::span<const FeatureWindow> train,
                             const TrainConfig& train_cfg, TrainingHooks& hooks,
                             std::size_t domain_index = 0);

// Same loop with no hooks attached.
TrainOutcome train_on_domain(ModelState& model, std::span<const FeatureWindow> train,
                             const TrainConfig& train_cfg, std::size_t domain_index = 0);

double accuracy(const ModelState& model, std::span<const FeatureWindow> windows);

}  // namespace driftids::idsmodel
