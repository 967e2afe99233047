#include "driftids/idsmodel/model.hpp"

#include <algorithm>
#include <cmath>

#include "driftids/numgrad/losses.hpp"

namespace driftids::idsmodel {

using numgrad::Activation;

void ModelConfig::validate() const {
    require(input_dim == dataplane::kFeatureDim, ErrorKind::config,
            "model input_dim must be 14, got " + std::to_string(input_dim));
    require(num_classes == 2, ErrorKind::config, "model num_classes must be 2");
    require(hidden_size >= 1 && fc_size >= 1, ErrorKind::config,
            "model hidden_size and fc_size must be >= 1");
    require(dropout_rate >= 0.0 && dropout_rate < 1.0, ErrorKind::config,
            "model dropout_rate must be in [0, 1)");
}

std::size_t parameter_count(const ModelConfig& c) {
    const std::size_t h = c.hidden_size;
    return 4 * (c.input_dim * h + h * h + h) + (h * c.fc_size + c.fc_size) +
           (c.fc_size * c.num_classes + c.num_classes);
}

namespace {

Matrix uniform_matrix(Rng& rng, std::size_t rows, std::size_t cols, double bound) {
    Matrix m(rows, cols);
    for (double& v : m.values()) {
        v = rng.uniform(-bound, bound);
    }
    return m;
}

// Time-major view of a batch: one B×14 matrix per step.
std::vector<Matrix> time_major(std::span<const FeatureWindow> windows, std::size_t input_dim) {
    require(!windows.empty(), ErrorKind::dimension, "forward: empty batch");
    const std::size_t steps = windows.front().features.rows();
    require(steps > 0, ErrorKind::dimension, "forward: zero-length windows");
    std::vector<Matrix> xs(steps, Matrix(windows.size(), input_dim));
    for (std::size_t b = 0; b < windows.size(); ++b) {
        const Matrix& f = windows[b].features;
        require(f.rows() == steps, ErrorKind::dimension,
                "forward: window length " + std::to_string(f.rows()) + " differs from " +
                    std::to_string(steps) + " within batch");
        require(f.cols() == input_dim, ErrorKind::dimension,
                "forward: window feature dim " + std::to_string(f.cols()) + " != " +
                    std::to_string(input_dim));
        for (std::size_t t = 0; t < steps; ++t) {
            std::copy(f.row(t).begin(), f.row(t).end(), xs[t].row(b).begin());
        }
    }
    return xs;
}

}  // namespace

ModelState build_model(const ModelConfig& config) {
    config.validate();
    Rng rng(derive_seed({config.seed, 0x696e6974ULL}));
    const std::size_t h = config.hidden_size;
    const double lstm_bound = 1.0 / std::sqrt(static_cast<double>(h));
    ModelState model;
    model.config = config;
    model.params.add(names::lstm_input, uniform_matrix(rng, config.input_dim, 4 * h, lstm_bound));
    model.params.add(names::lstm_recurrent, uniform_matrix(rng, h, 4 * h, lstm_bound));
    Matrix lstm_bias(1, 4 * h);
    for (std::size_t k = 0; k < h; ++k) {
        lstm_bias(0, h + k) = 1.0;
    }
    model.params.add(names::lstm_bias, std::move(lstm_bias));
    model.params.add(names::fc1_weight,
                     uniform_matrix(rng, h, config.fc_size, 1.0 / std::sqrt(static_cast<double>(h))));
    model.params.add(names::fc1_bias, Matrix(1, config.fc_size));
    model.params.add(names::fc2_weight,
                     uniform_matrix(rng, config.fc_size, config.num_classes,
                                    1.0 / std::sqrt(static_cast<double>(config.fc_size))));
    model.params.add(names::fc2_bias, Matrix(1, config.num_classes));
    model.adam = numgrad::AdamState::for_params(model.params);
    return model;
}

Matrix forward(const ParamSet& params, const ModelConfig& config,
               std::span<const FeatureWindow> windows, Mode mode, Rng* dropout_rng,
               ForwardCache* cache) {
    const std::vector<Matrix> xs = time_major(windows, config.input_dim);
    const std::size_t batch = windows.size();
    const std::size_t h = config.hidden_size;
    const numgrad::LstmWeights w{params.at(names::lstm_input), params.at(names::lstm_recurrent),
                                 params.at(names::lstm_bias)};
    Matrix hidden(batch, h);
    Matrix cell(batch, h);
    if (cache != nullptr) {
        cache->steps.clear();
        cache->steps.reserve(xs.size());
    }
    for (const Matrix& x : xs) {
        auto step = numgrad::lstm_cell_forward(x, hidden, cell, w);
        hidden = std::move(step.h);
        cell = std::move(step.c);
        if (cache != nullptr) {
            cache->steps.push_back(std::move(step.cache));
        }
    }

    Matrix a1 = numgrad::dense_forward(hidden, params.at(names::fc1_weight),
                                       params.at(names::fc1_bias), Activation::relu,
                                       cache ? &cache->fc1 : nullptr);
    if (cache != nullptr) {
        cache->dropout_mask = Matrix();
    }
    if (mode == Mode::train && config.dropout_rate > 0.0) {
        require(dropout_rng != nullptr, ErrorKind::contract, "forward: train mode needs a dropout rng");
        const double keep = 1.0 - config.dropout_rate;
        Matrix mask(a1.rows(), a1.cols());
        for (double& m : mask.values()) {
            m = dropout_rng->uniform() < keep ? 1.0 / keep : 0.0;
        }
        auto av = a1.values();
        auto mv = mask.values();
        for (std::size_t k = 0; k < av.size(); ++k) {
            av[k] *= mv[k];
        }
        if (cache != nullptr) {
            cache->dropout_mask = std::move(mask);
        }
    }
    return numgrad::dense_forward(a1, params.at(names::fc2_weight), params.at(names::fc2_bias),
                                  Activation::none, cache ? &cache->fc2 : nullptr);
}

GradSet backward(const ParamSet& params, const ForwardCache& cache, const Matrix& d_logits) {
    require(!cache.steps.empty(), ErrorKind::contract, "backward: empty forward cache");
    GradSet grads = GradSet::zeros_like(params);
    auto g2 = numgrad::dense_backward(d_logits, cache.fc2, params.at(names::fc2_weight));
    grads.at(names::fc2_weight) = std::move(g2.d_weight);
    grads.at(names::fc2_bias) = std::move(g2.d_bias);
    Matrix d_a1 = std::move(g2.d_x);
    if (!cache.dropout_mask.empty()) {
        auto dv = d_a1.values();
        auto mv = cache.dropout_mask.values();
        for (std::size_t k = 0; k < dv.size(); ++k) {
            dv[k] *= mv[k];
        }
    }
    auto g1 = numgrad::dense_backward(d_a1, cache.fc1, params.at(names::fc1_weight));
    grads.at(names::fc1_weight) = std::move(g1.d_weight);
    grads.at(names::fc1_bias) = std::move(g1.d_bias);

    const numgrad::LstmWeights w{params.at(names::lstm_input), params.at(names::lstm_recurrent),
                                 params.at(names::lstm_bias)};
    const numgrad::LstmGradRefs gw{grads.at(names::lstm_input), grads.at(names::lstm_recurrent),
                                   grads.at(names::lstm_bias)};
    Matrix d_h = std::move(g1.d_x);
    Matrix d_c(d_h.rows(), d_h.cols());
    for (auto it = cache.steps.rbegin(); it != cache.steps.rend(); ++it) {
        auto g = numgrad::lstm_cell_backward(d_h, d_c, *it, w, gw);
        d_h = std::move(g.d_h_prev);
        d_c = std::move(g.d_c_prev);
    }
    return grads;
}

std::pair<double, GradSet> loss_and_grad(const ParamSet& params, const ModelConfig& config,
                                         std::span<const FeatureWindow> windows) {
    ForwardCache cache;
    const Matrix logits = forward(params, config, windows, Mode::eval, nullptr, &cache);
    std::vector<int> labels(windows.size());
    for (std::size_t b = 0; b < windows.size(); ++b) {
        labels[b] = windows[b].label;
    }
    auto loss = numgrad::softmax_cross_entropy(logits, labels);
    return {loss.value, backward(params, cache, loss.d_logits)};
}

Scores predict_scores(const ModelState& model, std::span<const FeatureWindow> windows) {
    constexpr std::size_t kChunk = 1024;
    Scores out;
    out.scores.reserve(windows.size());
    out.labels.reserve(windows.size());
    for (std::size_t start = 0; start < windows.size(); start += kChunk) {
        const auto chunk = windows.subspan(start, std::min(kChunk, windows.size() - start));
        const Matrix logits = forward(model.params, model.config, chunk, Mode::eval);
        for (std::size_t b = 0; b < chunk.size(); ++b) {
            out.scores.push_back(numgrad::attack_probability(logits(b, 0), logits(b, 1)));
            out.labels.push_back(chunk[b].label);
        }
    }
    return out;
}

}  // namespace driftids::idsmodel
