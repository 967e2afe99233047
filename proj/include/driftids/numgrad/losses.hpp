#pragma once

#include <span>

#include "driftids/numgrad/matrix.hpp"

namespace driftids::numgrad {

struct LossResult {
    double value = 0.0;
    Matrix d_logits;
};

// Mean cross-entropy of softmax(logits) against integer labels in {0, 1};
// d_logits = (softmax - onehot) / B.
LossResult softmax_cross_entropy(const Matrix& logits, std::span<const int> labels);

// Batch mean of KL(softmax(teacher/τ) || softmax(student/τ)); gradient is
// taken with respect to the student logits only.
LossResult distillation_loss(const Matrix& student, const Matrix& teacher, double temperature);

// Row-wise softmax.
Matrix softmax(const Matrix& logits);

// P(class 1) for two-class logits: σ(l1 − l0).
double attack_probability(double logit_normal, double logit_attack);

}  // namespace driftids::numgrad
