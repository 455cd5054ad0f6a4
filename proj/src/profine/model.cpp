#include "profine/model.hpp"

#include <cmath>

#include "common/error.hpp"

namespace cogadapt::profine {

void ModelConfig::validate() const {
  if (adapter_hidden <= 0) throw ConfigError("model: adapter_hidden must be positive");
  if (adapter_dropout < 0.0 || adapter_dropout >= 1.0) {
    throw ConfigError("model: adapter_dropout must lie in [0, 1)");
  }
  if (encoder_layers < 0) throw ConfigError("model: encoder_layers must be >= 0");
  if (encoder_dim <= 0) throw ConfigError("model: encoder_dim must be positive");
  if (embed_stride < 1) throw ConfigError("model: embed_stride must be >= 1");
  if (head_hidden <= 0) throw ConfigError("model: head_hidden must be positive");
  if (head_dropout < 0.0 || head_dropout >= 1.0) {
    throw ConfigError("model: head_dropout must lie in [0, 1)");
  }
  if (n_classes < 2) throw ConfigError("model: n_classes must be >= 2");
}

Model make_model(const ModelConfig& cfg, Rng& rng) {
  cfg.validate();
  Model m;
  m.adapter = bridge::make_adapter(3, cfg.adapter_hidden, 12, cfg.adapter_dropout, rng);
  m.encoder.embed = nn::LinearChannelMap(12, cfg.encoder_dim);
  nn::kaiming_init(m.encoder.embed.weight, 12, rng);
  m.encoder.embed_stride = cfg.embed_stride;
  m.encoder.blocks.resize(static_cast<std::size_t>(cfg.encoder_layers));
  for (auto& b : m.encoder.blocks) {
    b.lin = nn::LinearChannelMap(cfg.encoder_dim, cfg.encoder_dim);
    nn::kaiming_init(b.lin.weight, cfg.encoder_dim, rng);
    b.bn = nn::BatchNormState(cfg.encoder_dim);
    b.residual = true;
  }
  m.head.hidden = nn::LinearChannelMap(cfg.encoder_dim, cfg.head_hidden);
  nn::kaiming_init(m.head.hidden.weight, cfg.encoder_dim, rng);
  m.head.out = nn::LinearChannelMap(cfg.head_hidden, cfg.n_classes);  // stays zero
  m.head.dropout_p = cfg.head_dropout;
  return m;
}

void collect_model(Model& m, std::vector<nn::ParamRef>& params,
                   std::vector<nn::BufferRef>& buffers) {
  using nn::ParamKind;
  bridge::collect_adapter(m.adapter, "adapter", "adapter", params, buffers);
  params.push_back({"enc.embed.weight", "enc.embed", ParamKind::kWeight,
                    &m.encoder.embed.weight});
  params.push_back({"enc.embed.bias", "enc.embed", ParamKind::kBias,
                    &m.encoder.embed.bias});
  for (std::size_t j = 0; j < m.encoder.blocks.size(); ++j) {
    EncoderBlock& b = m.encoder.blocks[j];
    std::string base = "enc.l" + std::to_string(j + 1);
    params.push_back({base + ".lin.weight", base, ParamKind::kWeight, &b.lin.weight});
    params.push_back({base + ".lin.bias", base, ParamKind::kBias, &b.lin.bias});
    params.push_back({base + ".bn.gamma", base, ParamKind::kBnGamma, &b.bn.gamma});
    params.push_back({base + ".bn.beta", base, ParamKind::kBnBeta, &b.bn.beta});
    buffers.push_back({base + ".bn.running_mean", &b.bn.running_mean});
    buffers.push_back({base + ".bn.running_var", &b.bn.running_var});
  }
  params.push_back({"head.hidden.weight", "head", ParamKind::kWeight, &m.head.hidden.weight});
  params.push_back({"head.hidden.bias", "head", ParamKind::kBias, &m.head.hidden.bias});
  params.push_back({"head.out.weight", "head", ParamKind::kWeight, &m.head.out.weight});
  params.push_back({"head.out.bias", "head", ParamKind::kBias, &m.head.out.bias});
}

ForwardModes ForwardModes::all_eval(const Model& m) {
  ForwardModes f;
  f.adapter = nn::Mode::kEval;
  f.blocks.assign(m.encoder.blocks.size(), nn::Mode::kEval);
  f.head = nn::Mode::kEval;
  return f;
}

ForwardModes TrainablePlan::training_modes(const Model& m) const {
  if (blocks.size() != m.encoder.blocks.size()) {
    throw DimensionError("trainable plan does not match encoder depth");
  }
  ForwardModes f;
  f.adapter = adapter ? nn::Mode::kTrain : nn::Mode::kEval;
  f.blocks.resize(blocks.size());
  for (std::size_t j = 0; j < blocks.size(); ++j) {
    f.blocks[j] = blocks[j] ? nn::Mode::kTrain : nn::Mode::kEval;
  }
  f.head = head ? nn::Mode::kTrain : nn::Mode::kEval;
  return f;
}

nn::Batch encoder_forward(EncoderParams& enc, const nn::Batch& x12,
                          const std::vector<nn::Mode>& block_modes,
                          std::vector<BlockCache>* caches, nn::Batch* embedded) {
  if (block_modes.size() != enc.blocks.size()) {
    throw DimensionError("encoder_forward: mode list does not match depth");
  }
  nn::Batch h(x12.size());
  for (std::size_t i = 0; i < x12.size(); ++i) {
    h[i] = nn::linear_forward(enc.embed, x12[i], "enc.embed", enc.embed_stride);
  }
  if (embedded != nullptr) *embedded = h;
  if (caches != nullptr) caches->resize(enc.blocks.size());

  for (std::size_t j = 0; j < enc.blocks.size(); ++j) {
    EncoderBlock& b = enc.blocks[j];
    std::string name = "enc.l" + std::to_string(j + 1);
    nn::Batch pre(h.size());
    for (std::size_t i = 0; i < h.size(); ++i) {
      pre[i] = nn::linear_forward(b.lin, h[i], name + ".lin");
    }
    nn::BnCache bnc;
    nn::Batch act = nn::batchnorm_forward(b.bn, pre, block_modes[j], name + ".bn", &bnc);
    for (auto& t : act) t = nn::relu(t);
    nn::Batch out(h.size());
    for (std::size_t i = 0; i < h.size(); ++i) {
      if (b.residual) {
        out[i] = h[i];
        for (std::size_t k = 0; k < out[i].data.size(); ++k) {
          out[i].data[k] += act[i].data[k];
        }
      } else {
        out[i] = act[i];
      }
    }
    if (caches != nullptr) {
      (*caches)[j].input = std::move(h);
      (*caches)[j].bnc = std::move(bnc);
      (*caches)[j].activated = std::move(act);
    }
    h = std::move(out);
  }
  return h;
}

ForwardOutput model_forward(Model& m, const nn::Batch& x3,
                            const ForwardModes& modes, Rng& rng,
                            ModelCache* cache) {
  nn::Batch x12 = bridge::adapter_forward(m.adapter, x3, modes.adapter, rng,
                                          cache ? &cache->adapter : nullptr);
  nn::Batch embedded;
  nn::Batch top = encoder_forward(m.encoder, x12, modes.blocks,
                                  cache ? &cache->blocks : nullptr,
                                  cache ? &embedded : nullptr);

  const std::size_t n = x3.size();
  ForwardOutput out;
  out.logits.resize(n);
  out.probs.resize(n);
  std::vector<nn::Vec> pooled(n);
  nn::Batch head_hidden(n), head_mask, head_dropped(n);
  bool drop_active = modes.head == nn::Mode::kTrain && m.head.dropout_p > 0.0;
  if (drop_active) head_mask.resize(n);

  for (std::size_t i = 0; i < n; ++i) {
    pooled[i] = nn::mean_pool(top[i]);
    nn::Tensor2 z(m.encoder.dim(), 1);
    for (int c = 0; c < z.channels; ++c) z.at(c, 0) = pooled[i][static_cast<std::size_t>(c)];
    nn::Tensor2 hid = nn::relu(nn::linear_forward(m.head.hidden, z, "head.hidden"));
    nn::Tensor2 dropped =
        drop_active
            ? nn::dropout_forward(hid, m.head.dropout_p, modes.head, rng, &head_mask[i])
            : hid;
    nn::Tensor2 logit_t = nn::linear_forward(m.head.out, dropped, "head.out");
    nn::require_finite(logit_t, "head.out");
    nn::Vec logits(static_cast<std::size_t>(m.head.out.out_ch));
    for (int c = 0; c < m.head.out.out_ch; ++c) logits[static_cast<std::size_t>(c)] = logit_t.at(c, 0);
    out.probs[i] = nn::softmax(logits);
    out.logits[i] = std::move(logits);
    head_hidden[i] = std::move(hid);
    head_dropped[i] = std::move(dropped);
  }

  if (cache != nullptr) {
    cache->x12 = std::move(x12);
    cache->embedded = std::move(embedded);
    cache->top = std::move(top);
    cache->pooled = std::move(pooled);
    cache->head_hidden = std::move(head_hidden);
    cache->head_mask = std::move(head_mask);
    cache->head_dropped = std::move(head_dropped);
    cache->modes = modes;
  }
  return out;
}

ForwardOutput model_forward_eval(Model& m, const nn::Batch& x3) {
  Rng unused(0);
  return model_forward(m, x3, ForwardModes::all_eval(m), unused, nullptr);
}

namespace {

double batch_loss(const ForwardOutput& out, const std::vector<int>& targets,
                  const LossSpec& loss) {
  double total = 0.0;
  for (std::size_t i = 0; i < out.probs.size(); ++i) {
    total += nn::focal_loss(out.probs[i], targets[i], loss.gamma, loss.alpha);
  }
  return total / static_cast<double>(out.probs.size());
}

}  // namespace

double compute_gradients(Model& m, const nn::Batch& x3,
                         const std::vector<int>& targets, const LossSpec& loss,
                         const TrainablePlan& plan, Rng& rng,
                         nn::GradientSet& grads) {
  if (x3.empty()) throw ConfigError("compute_gradients: empty batch");
  if (targets.size() != x3.size()) {
    throw DimensionError("compute_gradients: target count mismatch");
  }
  for (int t : targets) {
    if (t < 0 || t >= m.n_classes()) {
      throw ConfigError("compute_gradients: target class out of range");
    }
  }

  ModelCache cache;
  ForwardOutput out = model_forward(m, x3, plan.training_modes(m), rng, &cache);
  double mean_loss = batch_loss(out, targets, loss);
  if (!std::isfinite(mean_loss)) {
    throw RuntimeError("compute_gradients: non-finite loss");
  }

  const std::size_t n = x3.size();
  const double inv_n = 1.0 / static_cast<double>(n);
  const int d = m.encoder.dim();

  // Head: per-window chain from logits back to the pooled features.
  nn::Vec scratch_w, scratch_b;
  nn::Vec* g_out_w = nullptr;
  nn::Vec* g_out_b = nullptr;
  nn::Vec* g_hid_w = nullptr;
  nn::Vec* g_hid_b = nullptr;
  if (plan.head) {
    g_out_w = &grads["head.out.weight"];
    g_out_b = &grads["head.out.bias"];
    g_hid_w = &grads["head.hidden.weight"];
    g_hid_b = &grads["head.hidden.bias"];
    g_out_w->assign(m.head.out.weight.size(), 0.0);
    g_out_b->assign(m.head.out.bias.size(), 0.0);
    g_hid_w->assign(m.head.hidden.weight.size(), 0.0);
    g_hid_b->assign(m.head.hidden.bias.size(), 0.0);
  }

  nn::Batch d_top(n);
  for (std::size_t i = 0; i < n; ++i) {
    nn::Vec dlog = nn::focal_loss_grad_logits(out.logits[i], targets[i],
                                              loss.gamma, loss.alpha);
    nn::Tensor2 dlog_t(m.head.out.out_ch, 1);
    for (int c = 0; c < m.head.out.out_ch; ++c) {
      dlog_t.at(c, 0) = dlog[static_cast<std::size_t>(c)] * inv_n;
    }
    nn::Tensor2 d_dropped =
        plan.head ? nn::linear_backward(m.head.out, cache.head_dropped[i],
                                        dlog_t, *g_out_w, *g_out_b)
                  : nn::linear_backward_input(m.head.out,
                                              cache.head_dropped[i].samples, dlog_t);
    if (!cache.head_mask.empty()) {
      d_dropped = nn::dropout_backward(cache.head_mask[i], d_dropped);
    }
    nn::Tensor2 d_hid = nn::relu_backward(cache.head_hidden[i], d_dropped);
    nn::Tensor2 z(d, 1);
    for (int c = 0; c < d; ++c) z.at(c, 0) = cache.pooled[i][static_cast<std::size_t>(c)];
    nn::Tensor2 d_z =
        plan.head ? nn::linear_backward(m.head.hidden, z, d_hid, *g_hid_w, *g_hid_b)
                  : nn::linear_backward_input(m.head.hidden, 1, d_hid);
    nn::Vec dz(static_cast<std::size_t>(d));
    for (int c = 0; c < d; ++c) dz[static_cast<std::size_t>(c)] = d_z.at(c, 0);
    d_top[i] = nn::mean_pool_backward(dz, cache.top[i].samples);
  }

  // Encoder blocks, top down.
  nn::Batch d_h = std::move(d_top);
  for (int j = m.encoder.depth() - 1; j >= 0; --j) {
    EncoderBlock& b = m.encoder.blocks[static_cast<std::size_t>(j)];
    const BlockCache& bc = cache.blocks[static_cast<std::size_t>(j)];
    bool want = plan.blocks[static_cast<std::size_t>(j)];
    std::string base = "enc.l" + std::to_string(j + 1);

    nn::Batch d_act(n);
    for (std::size_t i = 0; i < n; ++i) {
      d_act[i] = nn::relu_backward(bc.activated[i], d_h[i]);
    }
    nn::Vec* dg;
    nn::Vec* db;
    if (want) {
      dg = &grads[base + ".bn.gamma"];
      db = &grads[base + ".bn.beta"];
      dg->assign(b.bn.gamma.size(), 0.0);
      db->assign(b.bn.beta.size(), 0.0);
    } else {
      scratch_w.assign(b.bn.gamma.size(), 0.0);
      scratch_b.assign(b.bn.beta.size(), 0.0);
      dg = &scratch_w;
      db = &scratch_b;
    }
    nn::Batch d_pre = nn::batchnorm_backward(
        b.bn, bc.bnc, d_act, cache.modes.blocks[static_cast<std::size_t>(j)], *dg, *db);

    if (want) {
      auto& gw = grads[base + ".lin.weight"];
      auto& gb = grads[base + ".lin.bias"];
      gw.assign(b.lin.weight.size(), 0.0);
      gb.assign(b.lin.bias.size(), 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        nn::Tensor2 dx = nn::linear_backward(b.lin, bc.input[i], d_pre[i], gw, gb);
        if (b.residual) {
          for (std::size_t k = 0; k < dx.data.size(); ++k) dx.data[k] += d_h[i].data[k];
        }
        d_h[i] = std::move(dx);
      }
    } else {
      for (std::size_t i = 0; i < n; ++i) {
        nn::Tensor2 dx = nn::linear_backward_input(b.lin, bc.input[i].samples, d_pre[i]);
        if (b.residual) {
          for (std::size_t k = 0; k < dx.data.size(); ++k) dx.data[k] += d_h[i].data[k];
        }
        d_h[i] = std::move(dx);
      }
    }
  }

  // Embed, then adapter. Nothing below the embed needs gradients unless the
  // adapter is trainable.
  if (plan.embed) {
    auto& gw = grads["enc.embed.weight"];
    auto& gb = grads["enc.embed.bias"];
    gw.assign(m.encoder.embed.weight.size(), 0.0);
    gb.assign(m.encoder.embed.bias.size(), 0.0);
    nn::Batch d_x12(n);
    for (std::size_t i = 0; i < n; ++i) {
      d_x12[i] = nn::linear_backward(m.encoder.embed, cache.x12[i], d_h[i], gw, gb,
                                     m.encoder.embed_stride);
    }
    d_h = std::move(d_x12);
  } else if (plan.adapter) {
    nn::Batch d_x12(n);
    for (std::size_t i = 0; i < n; ++i) {
      d_x12[i] = nn::linear_backward_input(m.encoder.embed, cache.x12[i].samples,
                                           d_h[i], m.encoder.embed_stride);
    }
    d_h = std::move(d_x12);
  }
  if (plan.adapter) {
    bridge::adapter_backward(m.adapter, cache.adapter, d_h, "adapter", grads);
  }
  return mean_loss;
}

double compute_loss_only(Model m, const nn::Batch& x3,
                         const std::vector<int>& targets, const LossSpec& loss,
                         const TrainablePlan& plan, Rng& rng) {
  if (targets.size() != x3.size()) {
    throw DimensionError("compute_loss_only: target count mismatch");
  }
  ForwardOutput out = model_forward(m, x3, plan.training_modes(m), rng, nullptr);
  return batch_loss(out, targets, loss);
}

}  // namespace cogadapt::profine
