#pragma once

#include <cstdint>
#include <utility>

#include "driftids/numgrad/adam.hpp"
#include "driftids/numgrad/matrix.hpp"
#include "driftids/numgrad/tensors.hpp"

namespace driftids::clstrat {

using numgrad::GradSet;
using numgrad::Matrix;
using numgrad::ParamSet;

struct VaeConfig {
    std::size_t input_dim = 140;
    std::size_t hidden = 64;
    std::size_t latent = 16;
    double beta = 1.0;  // KL weight
    std::uint64_t seed = 0;
};

// Small variational autoencoder over flattened windows with values in [0,1]:
// input → hidden (ReLU) → (μ, log σ²) → z → hidden (ReLU) → sigmoid output.
// Reconstruction loss is Bernoulli cross-entropy summed over features.
class Vae {
public:
    explicit Vae(const VaeConfig& config);

    const VaeConfig& config() const { return config_; }
    const ParamSet& params() const { return params_; }
    ParamSet& params() { return params_; }

    // Batch mean of reconstruction + β·KL with the reparameterised latent
    // z = μ + exp(½ log σ²) ⊙ eps, eps supplied by the caller.
    std::pair<double, GradSet> loss_and_grad(const ParamSet& params, const Matrix& x,
                                             const Matrix& eps) const;

    // Minibatch Adam over the rows of `data`; returns the last epoch's mean loss.
    double train(const Matrix& data, std::size_t epochs, std::size_t batch_size, double learning_rate,
                 std::uint64_t seed);

    Matrix reconstruct(const Matrix& x) const;  // decodes μ
    Matrix decode(const Matrix& z) const;
    Matrix sample(std::size_t n, std::uint64_t seed) const;

private:
    VaeConfig config_;
    ParamSet params_;
    numgrad::AdamState adam_;
};

}  // namespace driftids::clstrat
