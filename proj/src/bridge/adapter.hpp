#pragma once

#include <string>
#include <vector>

#include "common/rng.hpp"
#include "nn/layers.hpp"
#include "nn/optim.hpp"
#include "nn/tensor.hpp"

namespace cogadapt::bridge {

// Learned 3-to-12 lead map applied independently at every sample:
//   y = W3 * drop(relu(bn2(W2 * relu(bn1(W1 * x)))))
// All maps are pointwise across time (kernel size 1), so the adapter commutes
// with any temporal windowing of its input.
struct AdapterParams {
  nn::LinearChannelMap l1;
  nn::BatchNormState bn1;
  nn::LinearChannelMap l2;
  nn::BatchNormState bn2;
  nn::LinearChannelMap l3;
  double dropout_p = 0.1;

  int in_channels() const { return l1.in_ch; }
  int hidden_channels() const { return l1.out_ch; }
  int out_channels() const { return l3.out_ch; }
};

AdapterParams make_adapter(int in_channels, int hidden_channels,
                           int out_channels, double dropout_p, Rng& rng);

// Activations kept from the forward pass for the backward pass. The input
// batch is copied in so the cache stays valid on its own.
struct AdapterCache {
  nn::Batch x;
  nn::BnCache bn1c;
  nn::Batch a1;  // relu(bn1(...)), input to l2
  nn::BnCache bn2c;
  nn::Batch a2;       // relu(bn2(...)), pre-dropout
  nn::Batch dropped;  // input to l3
  nn::Batch mask;     // dropout multipliers (empty when dropout is inactive)
  nn::Mode mode = nn::Mode::kEval;
};

// Train mode draws dropout masks from `rng`; eval mode never touches it.
nn::Batch adapter_forward(AdapterParams& p, const nn::Batch& x, nn::Mode mode,
                          Rng& rng, AdapterCache* cache = nullptr);
nn::Batch adapter_forward_eval(AdapterParams& p, const nn::Batch& x);

// Accumulates leaf gradients under `prefix` into `grads` and returns d(loss)/dx.
nn::Batch adapter_backward(const AdapterParams& p, const AdapterCache& cache,
                           const nn::Batch& dy, const std::string& prefix,
                           nn::GradientSet& grads);

// Leaf registry. Names are "<prefix>.l1.weight", "<prefix>.bn2.gamma", ... and
// every leaf joins optimizer group `group`. Running statistics go to `buffers`.
void collect_adapter(AdapterParams& p, const std::string& prefix,
                     const std::string& group,
                     std::vector<nn::ParamRef>& params,
                     std::vector<nn::BufferRef>& buffers);

}  // namespace cogadapt::bridge
