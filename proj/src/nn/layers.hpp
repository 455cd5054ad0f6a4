#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "common/rng.hpp"
#include "nn/tensor.hpp"

namespace cogadapt::nn {

enum class Mode { kTrain, kEval };

// Per-timestep affine map across channels (pointwise 1-D convolution).
// weight is out_ch x in_ch, row-major.
struct LinearChannelMap {
  int in_ch = 0;
  int out_ch = 0;
  Vec weight;
  Vec bias;

  LinearChannelMap() = default;
  LinearChannelMap(int in, int out)
      : in_ch(in), out_ch(out),
        weight(static_cast<std::size_t>(in) * out, 0.0),
        bias(static_cast<std::size_t>(out), 0.0) {}

  double& w(int o, int i) { return weight[static_cast<std::size_t>(o) * in_ch + i]; }
  double w(int o, int i) const { return weight[static_cast<std::size_t>(o) * in_ch + i]; }
};

// stride subsamples the time axis: y[:, t] = W x[:, t*stride] + b.
Tensor2 linear_forward(const LinearChannelMap& m, const Tensor2& x,
                       const std::string& layer, int stride = 1);

// Accumulates into d_weight/d_bias (callers zero them per batch); returns dx.
Tensor2 linear_backward(const LinearChannelMap& m, const Tensor2& x,
                        const Tensor2& dy, Vec& d_weight, Vec& d_bias,
                        int stride = 1);

// dx only, for frozen maps that still sit on the gradient path.
Tensor2 linear_backward_input(const LinearChannelMap& m, int in_samples,
                              const Tensor2& dy, int stride = 1);

// Per-channel batch normalization over (batch, time) jointly.
struct BatchNormState {
  int channels = 0;
  Vec gamma, beta;
  Vec running_mean, running_var;
  double momentum = 0.1;
  double eps = 1e-5;

  BatchNormState() = default;
  explicit BatchNormState(int c)
      : channels(c), gamma(c, 1.0), beta(c, 0.0),
        running_mean(c, 0.0), running_var(c, 1.0) {}
};

struct BnCache {
  std::vector<Tensor2> xhat;  // normalized inputs, one per batch element
  Vec invstd;                 // per channel
  std::size_t count = 0;      // batch * samples
};

// Train mode normalizes with batch statistics (biased variance) and updates
// running stats in place: run = (1-momentum)*run + momentum*batch.
Batch batchnorm_forward(BatchNormState& bn, const Batch& xs, Mode mode,
                        const std::string& layer, BnCache* cache = nullptr);

// dx for each element; d_gamma/d_beta accumulated.
Batch batchnorm_backward(const BatchNormState& bn, const BnCache& cache,
                         const Batch& dys, Mode mode, Vec& d_gamma, Vec& d_beta);

Tensor2 relu(const Tensor2& x);
// Mask taken from the forward *output* (y > 0 iff pre-activation > 0).
Tensor2 relu_backward(const Tensor2& y, const Tensor2& dy);

// Inverted dropout: kept activations scaled by 1/(1-p) at train time,
// identity in eval mode. mask holds the applied multipliers.
Tensor2 dropout_forward(const Tensor2& x, double p, Mode mode, Rng& rng,
                        Tensor2* mask);
Tensor2 dropout_backward(const Tensor2& mask, const Tensor2& dy);

// Temporal mean: one value per channel.
Vec mean_pool(const Tensor2& x);
Tensor2 mean_pool_backward(const Vec& dz, int samples);

}  // namespace cogadapt::nn
