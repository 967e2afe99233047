#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "driftids/dataplane/types.hpp"
#include "driftids/numgrad/adam.hpp"
#include "driftids/numgrad/layers.hpp"
#include "driftids/numgrad/tensors.hpp"
#include "driftids/rng.hpp"

namespace driftids::idsmodel {

using dataplane::FeatureWindow;
using numgrad::GradSet;
using numgrad::Matrix;
using numgrad::ParamSet;

struct ModelConfig {
    std::size_t input_dim = dataplane::kFeatureDim;
    std::size_t hidden_size = 64;
    std::size_t fc_size = 32;
    double dropout_rate = 0.2;
    std::size_t num_classes = 2;
    std::uint64_t seed = 0;

    void validate() const;
    bool operator==(const ModelConfig&) const = default;
};

// Parameter tensor names, in flat-view order.
namespace names {
inline constexpr const char* lstm_input = "lstm.input_weight";
inline constexpr const char* lstm_recurrent = "lstm.recurrent_weight";
inline constexpr const char* lstm_bias = "lstm.bias";
inline constexpr const char* fc1_weight = "fc1.weight";
inline constexpr const char* fc1_bias = "fc1.bias";
inline constexpr const char* fc2_weight = "fc2.weight";
inline constexpr const char* fc2_bias = "fc2.bias";
}  // namespace names

struct ModelState {
    ParamSet params;
    numgrad::AdamState adam;
    ModelConfig config;

    bool operator==(const ModelState& other) const {
        return params == other.params && adam == other.adam && config == other.config;
    }
};

// LSTM(14→H) → last hidden state → Dense(H→fc)+ReLU → dropout → Dense(fc→2).
// LSTM weights ~ U(±1/√H), dense weights ~ U(±1/√fan_in), biases 0 except the
// forget gate bias which starts at 1.
ModelState build_model(const ModelConfig& config);

std::size_t parameter_count(const ModelConfig& config);

enum class Mode { train, eval };

struct ForwardCache {
    std::vector<numgrad::LstmCache> steps;
    numgrad::DenseCache fc1;
    numgrad::DenseCache fc2;
    Matrix dropout_mask;  // empty when dropout was not applied
};

// Logits B×2. Train mode applies inverted dropout drawn from `dropout_rng`
// (required when dropout_rate > 0); eval mode is deterministic.
Matrix forward(const ParamSet& params, const ModelConfig& config,
               std::span<const FeatureWindow> windows, Mode mode, Rng* dropout_rng = nullptr,
               ForwardCache* cache = nullptr);

inline Matrix forward(const ModelState& model, std::span<const FeatureWindow> windows,
                      Mode mode = Mode::eval, Rng* dropout_rng = nullptr) {
    return forward(model.params, model.config, windows, mode, dropout_rng);
}

// Backpropagates d_logits through the cached forward pass.
GradSet backward(const ParamSet& params, const ForwardCache& cache, const Matrix& d_logits);

// Mean cross-entropy and its gradient in eval mode (no dropout).
std::pair<double, GradSet> loss_and_grad(const ParamSet& params, const ModelConfig& config,
                                         std::span<const FeatureWindow> windows);

struct Scores {
    std::vector<double> scores;  // P(attack) per window
    std::vector<int> labels;
};

Scores predict_scores(const ModelState& model, std::span<const FeatureWindow> windows);

// Frozen deep copy of a model.
class ModelSnapshot {
public:
    explicit ModelSnapshot(const ModelState& model) : state_(model) {}
    const ModelState& state() const { return state_; }
    ModelState restore() const { return state_; }

private:
    ModelState state_;
};

inline ModelSnapshot snapshot(const ModelState& model) { return ModelSnapshot(model); }

}  // namespace driftids::idsmodel
