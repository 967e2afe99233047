#include "driftids/clstrat/vae.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "driftids/errors.hpp"
#include "driftids/numgrad/layers.hpp"
#include "driftids/rng.hpp"

namespace driftids::clstrat {

using numgrad::Activation;
using numgrad::DenseCache;

namespace {

Matrix uniform_init(std::size_t rows, std::size_t cols, Rng& rng) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(rows));
    Matrix m(rows, cols);
    for (double& v : m.values()) v = rng.uniform(-bound, bound);
    return m;
}

double softplus(double a) { return a > 0.0 ? a + std::log1p(std::exp(-a)) : std::log1p(std::exp(a)); }

Matrix gather_rows(const Matrix& data, const std::vector<std::size_t>& idx, std::size_t first, std::size_t last) {
    Matrix out(last - first, data.cols());
    for (std::size_t r = first; r < last; ++r) {
        const auto src = data.row(idx[r]);
        std::copy(src.begin(), src.end(), out.row(r - first).begin());
    }
    return out;
}

}  // namespace

Vae::Vae(const VaeConfig& config) : config_(config) {
    require(config.input_dim > 0 && config.hidden > 0 && config.latent > 0, ErrorKind::config,
            "vae: dimensions must be positive");
    Rng rng(derive_seed({config.seed, 0x766165}));
    params_.add("enc.weight", uniform_init(config.input_dim, config.hidden, rng));
    params_.add("enc.bias", Matrix(1, config.hidden));
    params_.add("mu.weight", uniform_init(config.hidden, config.latent, rng));
    params_.add("mu.bias", Matrix(1, config.latent));
    params_.add("logvar.weight", uniform_init(config.hidden, config.latent, rng));
    params_.add("logvar.bias", Matrix(1, config.latent));
    params_.add("dec.weight", uniform_init(config.latent, config.hidden, rng));
    params_.add("dec.bias", Matrix(1, config.hidden));
    params_.add("out.weight", uniform_init(config.hidden, config.input_dim, rng));
    params_.add("out.bias", Matrix(1, config.input_dim));
    adam_ = numgrad::AdamState::for_params(params_);
}

std::pair<double, GradSet> Vae::loss_and_grad(const ParamSet& p, const Matrix& x, const Matrix& eps) const {
    require(x.cols() == config_.input_dim, ErrorKind::dimension, "vae: input width mismatch");
    require(eps.rows() == x.rows() && eps.cols() == config_.latent, ErrorKind::dimension,
            "vae: noise shape mismatch");
    const std::size_t b = x.rows();
    const double inv_b = 1.0 / static_cast<double>(b);

    DenseCache enc, mu_c, lv_c, dec, out_c;
    const Matrix h = numgrad::dense_forward(x, p[0], p[1], Activation::relu, &enc);
    const Matrix mu = numgrad::dense_forward(h, p[2], p[3], Activation::none, &mu_c);
    const Matrix lv = numgrad::dense_forward(h, p[4], p[5], Activation::none, &lv_c);
    Matrix z(b, config_.latent);
    Matrix sd(b, config_.latent);
    for (std::size_t k = 0; k < z.size(); ++k) {
        sd.values()[k] = std::exp(0.5 * lv.values()[k]);
        z.values()[k] = mu.values()[k] + sd.values()[k] * eps.values()[k];
    }
    const Matrix d = numgrad::dense_forward(z, p[6], p[7], Activation::relu, &dec);
    const Matrix a = numgrad::dense_forward(d, p[8], p[9], Activation::none, &out_c);

    double recon = 0.0;
    Matrix d_a(b, config_.input_dim);
    for (std::size_t k = 0; k < a.size(); ++k) {
        const double ak = a.values()[k];
        const double xk = x.values()[k];
        recon += softplus(ak) - xk * ak;
        d_a.values()[k] = (numgrad::sigmoid(ak) - xk) * inv_b;
    }
    double kl = 0.0;
    for (std::size_t k = 0; k < mu.size(); ++k) {
        const double m = mu.values()[k];
        const double l = lv.values()[k];
        kl += -0.5 * (1.0 + l - m * m - std::exp(l));
    }
    const double loss = (recon + config_.beta * kl) * inv_b;

    GradSet g = GradSet::zeros_like(p);
    const auto out_g = numgrad::dense_backward(d_a, out_c, p[8]);
    g[8] = out_g.d_weight;
    g[9] = out_g.d_bias;
    const auto dec_g = numgrad::dense_backward(out_g.d_x, dec, p[6]);
    g[6] = dec_g.d_weight;
    g[7] = dec_g.d_bias;
    Matrix d_mu(b, config_.latent);
    Matrix d_lv(b, config_.latent);
    for (std::size_t k = 0; k < d_mu.size(); ++k) {
        const double dz = dec_g.d_x.values()[k];
        const double s = sd.values()[k];
        d_mu.values()[k] = dz + config_.beta * mu.values()[k] * inv_b;
        d_lv.values()[k] = dz * eps.values()[k] * 0.5 * s + config_.beta * 0.5 * (s * s - 1.0) * inv_b;
    }
    const auto mu_g = numgrad::dense_backward(d_mu, mu_c, p[2]);
    const auto lv_g = numgrad::dense_backward(d_lv, lv_c, p[4]);
    g[2] = mu_g.d_weight;
    g[3] = mu_g.d_bias;
    g[4] = lv_g.d_weight;
    g[5] = lv_g.d_bias;
    Matrix d_h = mu_g.d_x;
    for (std::size_t k = 0; k < d_h.size(); ++k) d_h.values()[k] += lv_g.d_x.values()[k];
    const auto enc_g = numgrad::dense_backward(d_h, enc, p[0]);
    g[0] = enc_g.d_weight;
    g[1] = enc_g.d_bias;
    return {loss, std::move(g)};
}

double Vae::train(const Matrix& data, std::size_t epochs, std::size_t batch_size, double learning_rate,
                  std::uint64_t seed) {
    require(data.cols() == config_.input_dim, ErrorKind::dimension, "vae: training data width mismatch");
    require(data.rows() > 0, ErrorKind::data, "vae: empty training data");
    require(batch_size > 0, ErrorKind::config, "vae: batch_size must be > 0");
    std::vector<std::size_t> order(data.rows());
    double last = 0.0;
    for (std::size_t e = 0; e < epochs; ++e) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        Rng rng(derive_seed({seed, e, 0x6f726472}));
        rng.shuffle(order);
        double total = 0.0;
        std::size_t batches = 0;
        for (std::size_t first = 0; first < order.size(); first += batch_size) {
            const std::size_t end = std::min(order.size(), first + batch_size);
            const Matrix x = gather_rows(data, order, first, end);
            Matrix eps(x.rows(), config_.latent);
            for (double& v : eps.values()) v = rng.normal();
            auto [loss, grads] = loss_and_grad(params_, x, eps);
            numgrad::adam_step(params_, grads, adam_, learning_rate);
            total += loss;
            ++batches;
        }
        last = total / static_cast<double>(batches);
    }
    return last;
}

Matrix Vae::decode(const Matrix& z) const {
    require(z.cols() == config_.latent, ErrorKind::dimension, "vae: latent width mismatch");
    const Matrix d = numgrad::dense_forward(z, params_[6], params_[7], Activation::relu);
    Matrix a = numgrad::dense_forward(d, params_[8], params_[9], Activation::none);
    for (double& v : a.values()) v = std::clamp(numgrad::sigmoid(v), 0.0, 1.0);
    return a;
}

Matrix Vae::reconstruct(const Matrix& x) const {
    const Matrix h = numgrad::dense_forward(x, params_[0], params_[1], Activation::relu);
    return decode(numgrad::dense_forward(h, params_[2], params_[3], Activation::none));
}

Matrix Vae::sample(std::size_t n, std::uint64_t seed) const {
    if (n == 0) {
        return Matrix(0, config_.input_dim);
    }
    Rng rng(seed);
    Matrix z(n, config_.latent);
    for (double& v : z.values()) v = rng.normal();
    return decode(z);
}

}  // namespace driftids::clstrat
