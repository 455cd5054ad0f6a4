#include "bridge/adapter.hpp"

#include "common/error.hpp"

namespace cogadapt::bridge {

AdapterParams make_adapter(int in_channels, int hidden_channels,
                           int out_channels, double dropout_p, Rng& rng) {
  if (in_channels <= 0 || hidden_channels <= 0 || out_channels <= 0) {
    throw ConfigError("adapter channel counts must be positive");
  }
  if (dropout_p < 0.0 || dropout_p >= 1.0) {
    throw ConfigError("adapter dropout must lie in [0, 1)");
  }
  AdapterParams p;
  p.l1 = nn::LinearChannelMap(in_channels, hidden_channels);
  nn::kaiming_init(p.l1.weight, in_channels, rng);
  p.bn1 = nn::BatchNormState(hidden_channels);
  p.l2 = nn::LinearChannelMap(hidden_channels, hidden_channels);
  nn::kaiming_init(p.l2.weight, hidden_channels, rng);
  p.bn2 = nn::BatchNormState(hidden_channels);
  p.l3 = nn::LinearChannelMap(hidden_channels, out_channels);
  nn::kaiming_init(p.l3.weight, hidden_channels, rng);
  p.dropout_p = dropout_p;
  return p;
}

nn::Batch adapter_forward(AdapterParams& p, const nn::Batch& x, nn::Mode mode,
                          Rng& rng, AdapterCache* cache) {
  nn::Batch pre1(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    nn::require_shape(x[i], p.l1.in_ch, "adapter input");
    pre1[i] = nn::linear_forward(p.l1, x[i], "adapter.l1");
  }
  nn::BnCache bn1c;
  nn::Batch a1 = nn::batchnorm_forward(p.bn1, pre1, mode, "adapter.bn1", &bn1c);
  for (auto& t : a1) t = nn::relu(t);

  nn::Batch pre2(a1.size());
  for (std::size_t i = 0; i < a1.size(); ++i) {
    pre2[i] = nn::linear_forward(p.l2, a1[i], "adapter.l2");
  }
  nn::BnCache bn2c;
  nn::Batch a2 = nn::batchnorm_forward(p.bn2, pre2, mode, "adapter.bn2", &bn2c);
  for (auto& t : a2) t = nn::relu(t);

  nn::Batch dropped(a2.size());
  nn::Batch mask;
  if (mode == nn::Mode::kTrain && p.dropout_p > 0.0) {
    mask.resize(a2.size());
    for (std::size_t i = 0; i < a2.size(); ++i) {
      dropped[i] = nn::dropout_forward(a2[i], p.dropout_p, mode, rng, &mask[i]);
    }
  } else {
    dropped = a2;
  }

  nn::Batch y(dropped.size());
  for (std::size_t i = 0; i < dropped.size(); ++i) {
    y[i] = nn::linear_forward(p.l3, dropped[i], "adapter.l3");
    nn::require_finite(y[i], "adapter.l3");
  }

  if (cache != nullptr) {
    cache->x = x;
    cache->bn1c = std::move(bn1c);
    cache->a1 = std::move(a1);
    cache->bn2c = std::move(bn2c);
    cache->a2 = std::move(a2);
    cache->dropped = std::move(dropped);
    cache->mask = std::move(mask);
    cache->mode = mode;
    return y;
  }
  return y;
}

nn::Batch adapter_forward_eval(AdapterParams& p, const nn::Batch& x) {
  Rng unused(0);
  return adapter_forward(p, x, nn::Mode::kEval, unused, nullptr);
}

nn::Batch adapter_backward(const AdapterParams& p, const AdapterCache& cache,
                           const nn::Batch& dy, const std::string& prefix,
                           nn::GradientSet& grads) {
  if (dy.size() != cache.x.size()) {
    throw DimensionError("adapter backward batch size mismatch");
  }
  const std::size_t n = dy.size();
  auto& g_w3 = grads[prefix + ".l3.weight"];
  auto& g_b3 = grads[prefix + ".l3.bias"];
  auto& g_w2 = grads[prefix + ".l2.weight"];
  auto& g_b2 = grads[prefix + ".l2.bias"];
  auto& g_w1 = grads[prefix + ".l1.weight"];
  auto& g_b1 = grads[prefix + ".l1.bias"];
  g_w3.assign(p.l3.weight.size(), 0.0);
  g_b3.assign(p.l3.bias.size(), 0.0);
  g_w2.assign(p.l2.weight.size(), 0.0);
  g_b2.assign(p.l2.bias.size(), 0.0);
  g_w1.assign(p.l1.weight.size(), 0.0);
  g_b1.assign(p.l1.bias.size(), 0.0);
  grads[prefix + ".bn1.gamma"].assign(p.bn1.channels, 0.0);
  grads[prefix + ".bn1.beta"].assign(p.bn1.channels, 0.0);
  grads[prefix + ".bn2.gamma"].assign(p.bn2.channels, 0.0);
  grads[prefix + ".bn2.beta"].assign(p.bn2.channels, 0.0);

  nn::Batch d_a2(n);
  for (std::size_t i = 0; i < n; ++i) {
    nn::Tensor2 d_dropped =
        nn::linear_backward(p.l3, cache.dropped[i], dy[i], g_w3, g_b3);
    if (!cache.mask.empty()) {
      d_dropped = nn::dropout_backward(cache.mask[i], d_dropped);
    }
    d_a2[i] = nn::relu_backward(cache.a2[i], d_dropped);
  }
  nn::Batch d_pre2 = nn::batchnorm_backward(
      p.bn2, cache.bn2c, d_a2, cache.mode, grads[prefix + ".bn2.gamma"],
      grads[prefix + ".bn2.beta"]);

  nn::Batch d_a1(n);
  for (std::size_t i = 0; i < n; ++i) {
    nn::Tensor2 d = nn::linear_backward(p.l2, cache.a1[i], d_pre2[i], g_w2, g_b2);
    d_a1[i] = nn::relu_backward(cache.a1[i], d);
  }
  nn::Batch d_pre1 = nn::batchnorm_backward(
      p.bn1, cache.bn1c, d_a1, cache.mode, grads[prefix + ".bn1.gamma"],
      grads[prefix + ".bn1.beta"]);

  nn::Batch dx(n);
  for (std::size_t i = 0; i < n; ++i) {
    dx[i] = nn::linear_backward(p.l1, cache.x[i], d_pre1[i], g_w1, g_b1);
  }
  return dx;
}

void collect_adapter(AdapterParams& p, const std::string& prefix,
                     const std::string& group,
                     std::vector<nn::ParamRef>& params,
                     std::vector<nn::BufferRef>& buffers) {
  using nn::ParamKind;
  params.push_back({prefix + ".l1.weight", group, ParamKind::kWeight, &p.l1.weight});
  params.push_back({prefix + ".l1.bias", group, ParamKind::kBias, &p.l1.bias});
  params.push_back({prefix + ".bn1.gamma", group, ParamKind::kBnGamma, &p.bn1.gamma});
  params.push_back({prefix + ".bn1.beta", group, ParamKind::kBnBeta, &p.bn1.beta});
  params.push_back({prefix + ".l2.weight", group, ParamKind::kWeight, &p.l2.weight});
  params.push_back({prefix + ".l2.bias", group, ParamKind::kBias, &p.l2.bias});
  params.push_back({prefix + ".bn2.gamma", group, ParamKind::kBnGamma, &p.bn2.gamma});
  params.push_back({prefix + ".bn2.beta", group, ParamKind::kBnBeta, &p.bn2.beta});
  params.push_back({prefix + ".l3.weight", group, ParamKind::kWeight, &p.l3.weight});
  params.push_back({prefix + ".l3.bias", group, ParamKind::kBias, &p.l3.bias});
  buffers.push_back({prefix + ".bn1.running_mean", &p.bn1.running_mean});
  buffers.push_back({prefix + ".bn1.running_var", &p.bn1.running_var});
  buffers.push_back({prefix + ".bn2.running_mean", &p.bn2.running_mean});
  buffers.push_back({prefix + ".bn2.running_var", &p.bn2.running_var});
}

}  // namespace cogadapt::bridge
