#include "driftids/numgrad/losses.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "driftids/numgrad/layers.hpp"

namespace driftids::numgrad {

namespace {

// log-softmax of one row, max-shifted.
void log_softmax_row(std::span<const double> z, double scale, std::vector<double>& out) {
    out.resize(z.size());
    double m = -INFINITY;
    for (double v : z) {
        m = std::max(m, v * scale);
    }
    double s = 0.0;
    for (double v : z) {
        s += std::exp(v * scale - m);
    }
    const double lse = m + std::log(s);
    for (std::size_t k = 0; k < z.size(); ++k) {
        out[k] = z[k] * scale - lse;
    }
}

}  // namespace

Matrix softmax(const Matrix& logits) {
    Matrix out(logits.rows(), logits.cols());
    std::vector<double> lp;
    for (std::size_t b = 0; b < logits.rows(); ++b) {
        log_softmax_row(logits.row(b), 1.0, lp);
        for (std::size_t k = 0; k < logits.cols(); ++k) {
            out(b, k) = std::exp(lp[k]);
        }
    }
    return out;
}

double attack_probability(double logit_normal, double logit_attack) {
    return sigmoid(logit_attack - logit_normal);
}

LossResult softmax_cross_entropy(const Matrix& logits, std::span<const int> labels) {
    require(logits.rows() == labels.size(), ErrorKind::dimension,
            "cross entropy: " + std::to_string(labels.size()) + " labels for " +
                shape_string(logits) + " logits");
    require(logits.rows() > 0, ErrorKind::dimension, "cross entropy: empty batch");
    require(logits.all_finite(), ErrorKind::numeric, "cross entropy: non-finite logits");
    const std::size_t batch = logits.rows();
    const std::size_t classes = logits.cols();
    LossResult out;
    out.d_logits = Matrix(batch, classes);
    std::vector<double> lp;
    double total = 0.0;
    for (std::size_t b = 0; b < batch; ++b) {
        const int y = labels[b];
        require(y >= 0 && static_cast<std::size_t>(y) < classes, ErrorKind::value,
                "cross entropy: label out of range at row " + std::to_string(b));
        log_softmax_row(logits.row(b), 1.0, lp);
        // -log p_y, written as log1p of the off-class mass for accuracy near 0.
        double off = 0.0;
        for (std::size_t k = 0; k < classes; ++k) {
            if (static_cast<int>(k) != y) {
                off += std::exp(lp[k] - lp[static_cast<std::size_t>(y)]);
            }
        }
        total += std::log1p(off);
        for (std::size_t k = 0; k < classes; ++k) {
            const double p = std::exp(lp[k]);
            out.d_logits(b, k) = (p - (static_cast<int>(k) == y ? 1.0 : 0.0)) / static_cast<double>(batch);
        }
    }
    out.value = total / static_cast<double>(batch);
    return out;
}

LossResult distillation_loss(const Matrix& student, const Matrix& teacher, double temperature) {
    require(temperature > 0.0, ErrorKind::parameter, "distillation: temperature must be > 0");
    require(student.same_shape(teacher), ErrorKind::dimension,
            "distillation: student " + shape_string(student) + " vs teacher " + shape_string(teacher));
    require(student.all_finite() && teacher.all_finite(), ErrorKind::numeric,
            "distillation: non-finite logits");
    const std::size_t batch = student.rows();
    LossResult out;
    out.d_logits = Matrix(batch, student.cols());
    if (batch == 0) {
        return out;
    }
    const double inv_t = 1.0 / temperature;
    std::vector<double> lp_s;
    std::vector<double> lp_t;
    double total = 0.0;
    for (std::size_t b = 0; b < batch; ++b) {
        log_softmax_row(student.row(b), inv_t, lp_s);
        log_softmax_row(teacher.row(b), inv_t, lp_t);
        double kl = 0.0;
        for (std::size_t k = 0; k < lp_s.size(); ++k) {
            const double pt = std::exp(lp_t[k]);
            kl += pt * (lp_t[k] - lp_s[k]);
            out.d_logits(b, k) = (std::exp(lp_s[k]) - pt) * inv_t / static_cast<double>(batch);
        }
        // KL is nonnegative analytically; rounding can leave a tiny negative.
        total += std::max(kl, 0.0);
    }
    out.value = total / static_cast<double>(batch);
    return out;
}

}  // namespace driftids::numgrad
