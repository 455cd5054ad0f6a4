#include "nn/losses.hpp"

#include <algorithm>
#include <cmath>

namespace cogadapt::nn {

namespace {
constexpr double kProbFloor = 1e-12;
}

Vec softmax(const Vec& logits) {
  if (logits.empty()) throw DimensionError("softmax: empty logits");
  double mx = *std::max_element(logits.begin(), logits.end());
  Vec p(logits.size());
  double z = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    p[i] = std::exp(logits[i] - mx);
    z += p[i];
  }
  for (double& v : p) v /= z;
  return p;
}

static void check_probs(const Vec& probs, int target) {
  if (target < 0 || target >= static_cast<int>(probs.size())) {
    throw DimensionError("focal_loss: target class out of range");
  }
  double s = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0) || p > 1.0) throw RuntimeError("focal_loss: probability outside [0, 1]");
    s += p;
  }
  if (std::abs(s - 1.0) > 1e-5) throw RuntimeError("focal_loss: probabilities do not sum to 1");
}

double focal_loss(const Vec& probs, int target, double gamma, const Vec& alpha) {
  check_probs(probs, target);
  if (alpha.size() != probs.size()) throw DimensionError("focal_loss: alpha size mismatch");
  double pt = std::max(probs[target], kProbFloor);
  double mod = gamma == 0.0 ? 1.0 : std::pow(1.0 - pt, gamma);
  return -alpha[target] * mod * std::log(pt);
}

Vec focal_loss_grad_logits(const Vec& logits, int target, double gamma,
                           const Vec& alpha) {
  Vec q = softmax(logits);
  check_probs(q, target);
  double pt = std::max(q[target], kProbFloor);
  // dL/dp_t, with the same clamped p_t the forward value uses.
  double dl_dp;
  if (gamma == 0.0) {
    dl_dp = -alpha[target] / pt;
  } else {
    double om = 1.0 - pt;
    dl_dp = alpha[target] * (gamma * std::pow(om, gamma - 1.0) * std::log(pt) -
                             std::pow(om, gamma) / pt);
  }
  // dp_t/dlogit_j = p_t (delta_tj - q_j).
  Vec g(q.size());
  for (std::size_t j = 0; j < q.size(); ++j) {
    double delta = (static_cast<int>(j) == target) ? 1.0 : 0.0;
    g[j] = dl_dp * pt * (delta - q[j]);
  }
  return g;
}

double smooth_l1(const Tensor2& pred, const Tensor2& target, double beta) {
  if (pred.channels != target.channels || pred.samples != target.samples) {
    throw DimensionError("smooth_l1: shape mismatch");
  }
  if (beta <= 0.0) throw ConfigError("smooth_l1: beta must be positive");
  double s = 0.0;
  for (std::size_t i = 0; i < pred.data.size(); ++i) {
    double d = std::abs(pred.data[i] - target.data[i]);
    s += d < beta ? 0.5 * d * d / beta : d - 0.5 * beta;
  }
  return s / static_cast<double>(pred.data.size());
}

Tensor2 smooth_l1_grad(const Tensor2& pred, const Tensor2& target, double beta) {
  if (pred.channels != target.channels || pred.samples != target.samples) {
    throw DimensionError("smooth_l1: shape mismatch");
  }
  Tensor2 g(pred.channels, pred.samples);
  double inv_n = 1.0 / static_cast<double>(pred.data.size());
  for (std::size_t i = 0; i < pred.data.size(); ++i) {
    double d = pred.data[i] - target.data[i];
    double gd = std::abs(d) < beta ? d / beta : (d > 0.0 ? 1.0 : -1.0);
    g.data[i] = gd * inv_n;
  }
  return g;
}

}  // namespace cogadapt::nn
