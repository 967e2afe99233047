#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "driftids/clstrat/regularizers.hpp"
#include "driftids/clstrat/replay_buffer.hpp"
#include "driftids/clstrat/vae.hpp"
#include "driftids/idsmodel/trainer.hpp"
#include "json.hpp"

namespace driftids::clstrat {

using idsmodel::BatchContext;
using idsmodel::WindowBatch;

// A continual-learning method: training hooks plus the bookkeeping the
// harness reports (stored-sample memory and free-form telemetry).
class Strategy : public idsmodel::TrainingHooks {
public:
    virtual std::string name() const = 0;
    // Samples held in auxiliary memory (the budgeted |A_t|).
    virtual std::size_t memory_samples() const { return 0; }
    virtual nlohmann::json telemetry() const { return nlohmann::json::object(); }
};

class NaiveStrategy final : public Strategy {
public:
    std::string name() const override { return "naive"; }
};

struct ReplayConfig {
    std::size_t capacity = 1000;
    std::size_t samples_per_batch = 256;
    std::uint64_t seed = 0;
};

class ReplayStrategy final : public Strategy {
public:
    explicit ReplayStrategy(const ReplayConfig& config);
    std::string name() const override { return "replay"; }
    void augment_batch(WindowBatch& batch, const BatchContext& ctx) override;
    void after_domain(const ModelState& model, std::size_t domain_index,
                      std::span<const FeatureWindow> train) override;
    std::size_t memory_samples() const override { return buffer_.size(); }
    nlohmann::json telemetry() const override;
    const ReplayBuffer& buffer() const { return buffer_; }
    ReplayBuffer& buffer() { return buffer_; }

private:
    ReplayConfig config_;
    ReplayBuffer buffer_;
};

class EwcStrategy final : public Strategy {
public:
    explicit EwcStrategy(EwcState state) : state_(std::move(state)) {}
    std::string name() const override { return "ewc"; }
    Penalty loss_penalty(const ParamSet& params) override { return ewc_penalty(state_, params); }
    void after_domain(const ModelState& model, std::size_t domain_index,
                      std::span<const FeatureWindow> train) override {
        ewc_consolidate(state_, model, train, domain_index);
    }
    const EwcState& state() const { return state_; }

private:
    EwcState state_;
};

class SiStrategy final : public Strategy {
public:
    explicit SiStrategy(SiState state) : state_(std::move(state)) {}
    std::string name() const override { return "si"; }
    void before_domain(const ModelState& model, std::size_t) override { si_begin_domain(state_, model.params); }
    Penalty loss_penalty(const ParamSet& params) override { return si_penalty(state_, params); }
    void on_step(const ParamSet&, const GradSet& task_grads, const GradSet& delta) override {
        si_on_step(state_, task_grads, delta);
    }
    void after_domain(const ModelState& model, std::size_t, std::span<const FeatureWindow>) override {
        si_consolidate(state_, model.params);
    }
    const SiState& state() const { return state_; }

private:
    SiState state_;
};

class LwfStrategy final : public Strategy {
public:
    explicit LwfStrategy(LwfState state) : state_(std::move(state)) {}
    std::string name() const override { return "lwf"; }
    void before_domain(const ModelState& model, std::size_t domain_index) override {
        if (domain_index > 0) state_.teacher = model;
    }
    std::optional<numgrad::LossResult> output_loss(const WindowBatch& batch, const Matrix& logits) override {
        return lwf_output_loss(state_, batch, logits);
    }
    const LwfState& state() const { return state_; }

private:
    LwfState state_;
};

struct GenReplayConfig {
    std::size_t samples_per_batch = 256;
    std::size_t latent = 16;
    std::size_t hidden = 64;
    std::size_t epochs = 20;
    std::size_t batch_size = 64;
    double learning_rate = 1e-3;
    std::uint64_t seed = 0;
};

// Generative replay: a VAE scholar rehearses earlier domains with samples
// labelled by the classifier as it stood before the current domain.
class GenerativeReplayStrategy final : public Strategy {
public:
    explicit GenerativeReplayStrategy(const GenReplayConfig& config) : config_(config) {}
    std::string name() const override { return "gr"; }
    void before_domain(const ModelState& model, std::size_t domain_index) override;
    void augment_batch(WindowBatch& batch, const BatchContext& ctx) override;
    void after_domain(const ModelState& model, std::size_t domain_index,
                      std::span<const FeatureWindow> train) override;
    nlohmann::json telemetry() const override;

    // Labelled windows from the current generator and labeller; contract
    // error before the generator has been trained.
    std::vector<FeatureWindow> generate(std::size_t n, std::uint64_t seed) const;
    bool trained() const { return generator_.has_value(); }
    const Vae& generator() const { return *generator_; }

private:
    GenReplayConfig config_;
    std::optional<Vae> generator_;
    std::optional<ModelState> labeller_;
    std::size_t window_length_ = 0;
    std::vector<double> generator_losses_;
};

struct StrategyContext {
    std::size_t batch_size = 256;
    std::uint64_t seed = 0;
};

// Method names: naive, replay, ewc, si, lwf, gr.
const std::vector<std::string>& strategy_names();
std::string display_name(const std::string& method);
nlohmann::json default_hyperparameters(const std::string& method);
nlohmann::json neutral_hyperparameters(const std::string& method);
// `hyper` overrides the defaults key by key; unknown keys are config errors.
std::unique_ptr<Strategy> make_strategy(const std::string& method, const nlohmann::json& hyper,
                                        const StrategyContext& ctx);

}  // namespace driftids::clstrat
