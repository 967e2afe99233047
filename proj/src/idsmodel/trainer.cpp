#include "driftids/idsmodel/trainer.hpp"

#include <chrono>
#include <cmath>
#include <numeric>

namespace driftids::idsmodel {

namespace {

constexpr std::uint64_t kShuffleStream = 0x73687566ULL;
constexpr std::uint64_t kDropoutStream = 0x64726f70ULL;

TrainOutcome train_impl(ModelState& model, std::span<const FeatureWindow> train,
                        const TrainConfig& cfg, TrainingHooks* hooks, std::size_t domain_index) {
    require(!train.empty(), ErrorKind::data, "train_on_domain: empty training set");
    require(cfg.batch_size > 0, ErrorKind::config, "train_on_domain: batch_size must be > 0");
    require(cfg.learning_rate > 0.0, ErrorKind::config, "train_on_domain: learning_rate must be > 0");

    const auto start = std::chrono::steady_clock::now();
    TrainOutcome outcome;
    std::vector<std::size_t> order(train.size());
    std::uint64_t step = 0;
    WindowBatch batch;
    std::vector<int> labels;

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        Rng shuffle_rng(derive_seed({cfg.seed, domain_index, epoch, kShuffleStream}));
        shuffle_rng.shuffle(order);
        Rng dropout_rng(derive_seed({cfg.seed, domain_index, epoch, kDropoutStream}));

        double epoch_loss = 0.0;
        std::size_t batches = 0;
        for (std::size_t first = 0; first < order.size(); first += cfg.batch_size) {
            const std::size_t last = std::min(order.size(), first + cfg.batch_size);
            batch.clear();
            for (std::size_t k = first; k < last; ++k) {
                batch.push_back(train[order[k]]);
            }
            const BatchContext ctx{domain_index, epoch, batches, step};
            if (hooks != nullptr) {
                hooks->augment_batch(batch, ctx);
            }

            labels.resize(batch.size());
            for (std::size_t b = 0; b < batch.size(); ++b) {
                labels[b] = batch[b].label;
            }
            ForwardCache cache;
            const Matrix logits =
                forward(model.params, model.config, batch, Mode::train, &dropout_rng, &cache);
            auto ce = numgrad::softmax_cross_entropy(logits, labels);
            double loss = ce.value;
            if (hooks != nullptr) {
                if (auto extra = hooks->output_loss(batch, logits)) {
                    loss += extra->value;
                    auto d = ce.d_logits.values();
                    auto e = extra->d_logits.values();
                    for (std::size_t k = 0; k < d.size(); ++k) {
                        d[k] += e[k];
                    }
                }
            }
            GradSet task_grads = backward(model.params, cache, ce.d_logits);

            if (hooks == nullptr) {
                require(std::isfinite(loss), ErrorKind::numeric,
                        "non-finite loss at epoch " + std::to_string(epoch) + " batch " +
                            std::to_string(batches));
                numgrad::adam_step(model.params, task_grads, model.adam, cfg.learning_rate);
            } else {
                Penalty penalty = hooks->loss_penalty(model.params);
                loss += penalty.value;
                require(std::isfinite(loss), ErrorKind::numeric,
                        "non-finite loss at epoch " + std::to_string(epoch) + " batch " +
                            std::to_string(batches));
                GradSet total = task_grads;
                numgrad::add_into(total, penalty.grads);
                const ParamSet before = model.params;
                numgrad::adam_step(model.params, total, model.adam, cfg.learning_rate);
                GradSet delta = GradSet::zeros_like(model.params);
                for (std::size_t i = 0; i < delta.count(); ++i) {
                    auto d = delta[i].values();
                    auto now = model.params[i].values();
                    auto was = before[i].values();
                    for (std::size_t k = 0; k < d.size(); ++k) {
                        d[k] = now[k] - was[k];
                    }
                }
                hooks->on_step(model.params, task_grads, delta);
            }
            epoch_loss += loss;
            ++batches;
            ++step;
        }
        outcome.per_epoch_losses.push_back(epoch_loss / static_cast<double>(batches));
    }

    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
    outcome.wall_time_seconds = std::max(elapsed.count(), 1e-9);
    outcome.final_train_loss =
        outcome.per_epoch_losses.empty() ? 0.0 : outcome.per_epoch_losses.back();
    return outcome;
}

}  // namespace

TrainOutcome train_on_domain(ModelState& model, std::span<const FeatureWindow> train,
                             const TrainConfig& train_cfg, TrainingHooks& hooks,
                             std::size_t domain_index) {
    return train_impl(model, train, train_cfg, &hooks, domain_index);
}

TrainOutcome train_on_domain(ModelState& model, std::span<const FeatureWindow> train,
                             const TrainConfig& train_cfg, std::size_t domain_index) {
    return train_impl(model, train, train_cfg, nullptr, domain_index);
}

double accuracy(const ModelState& model, std::span<const FeatureWindow> windows) {
    if (windows.empty()) {
        return 0.0;
    }
    const Scores s = predict_scores(model, windows);
    std::size_t correct = 0;
    for (std::size_t k = 0; k < s.scores.size(); ++k) {
        correct += static_cast<std::size_t>((s.scores[k] >= 0.5 ? 1 : 0) == s.labels[k]);
    }
    return static_cast<double>(correct) / static_cast<double>(s.scores.size());
}

}  // namespace driftids::idsmodel
