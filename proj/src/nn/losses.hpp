#pragma once

#include <array>
#include <vector>

#include "nn/tensor.hpp"

namespace cogadapt::nn {

// Numerically stable softmax over a small logit vector.
Vec softmax(const Vec& logits);

// Weighted focal term for one sample: -alpha[y] * (1 - p_y)^gamma * log(p_y).
// probs must sum to 1 within 1e-5; p_y is clamped at 1e-12 before the log.
// gamma = 0 with unit alpha reduces exactly to negative log-likelihood.
double focal_loss(const Vec& probs, int target, double gamma, const Vec& alpha);

// d loss / d logits for the focal term applied to softmax(logits).
Vec focal_loss_grad_logits(const Vec& logits, int target, double gamma,
                           const Vec& alpha);

// Mean smooth-L1 (Huber with quadratic zone |d| < beta) over all entries.
double smooth_l1(const Tensor2& pred, const Tensor2& target, double beta);
Tensor2 smooth_l1_grad(const Tensor2& pred, const Tensor2& target, double beta);

}  // namespace cogadapt::nn
