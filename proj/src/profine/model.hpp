#pragma once

#include <string>
#include <vector>

#include "bridge/adapter.hpp"
#include "common/rng.hpp"
#include "nn/layers.hpp"
#include "nn/losses.hpp"
#include "nn/optim.hpp"
#include "nn/tensor.hpp"

namespace cogadapt::profine {

// Residual per-timestep block: out = h + relu(bn(W h + b)). The encoder is an
// ordered stack of these so layer-wise freeze/rate schedules have a real
// bottom-to-top axis to act on; it is not meant to be a strong architecture.
struct EncoderBlock {
  nn::LinearChannelMap lin;
  nn::BatchNormState bn;
  bool residual = true;
};

struct EncoderParams {
  nn::LinearChannelMap embed;  // 12 -> d, temporal stride applied here
  int embed_stride = 1;
  std::vector<EncoderBlock> blocks;  // bottom (l1) first

  int dim() const { return embed.out_ch; }
  int depth() const { return static_cast<int>(blocks.size()); }
};

struct HeadParams {
  nn::LinearChannelMap hidden;  // d -> hidden width
  nn::LinearChannelMap out;     // hidden -> classes
  double dropout_p = 0.2;
};

struct Model {
  bridge::AdapterParams adapter;
  EncoderParams encoder;
  HeadParams head;

  int n_classes() const { return head.out.out_ch; }
};

struct ModelConfig {
  int adapter_hidden = 64;
  double adapter_dropout = 0.1;
  int encoder_layers = 4;
  int encoder_dim = 32;
  int embed_stride = 1;
  int head_hidden = 256;
  double head_dropout = 0.2;
  int n_classes = 2;

  void validate() const;
};

// Kaiming weights everywhere except the head output layer, which starts at
// zero so an untrained model emits uniform class probabilities.
Model make_model(const ModelConfig& cfg, Rng& rng);

// Leaf registry. Groups: "adapter", "enc.embed", "enc.l1".."enc.lL", "head".
void collect_model(Model& m, std::vector<nn::ParamRef>& params,
                   std::vector<nn::BufferRef>& buffers);

// Batch-norm / dropout mode per component; frozen components run in eval mode
// even while the surrounding model trains, so their statistics stay put.
struct ForwardModes {
  nn::Mode adapter = nn::Mode::kEval;
  std::vector<nn::Mode> blocks;
  nn::Mode head = nn::Mode::kEval;

  static ForwardModes all_eval(const Model& m);
};

struct BlockCache {
  nn::Batch input;
  nn::BnCache bnc;
  nn::Batch activated;  // relu(bn(lin(input))), the residual increment
};

struct ModelCache {
  bridge::AdapterCache adapter;
  nn::Batch x12;       // adapter output, input to embed
  nn::Batch embedded;  // input to block 1 (or to the pool when L = 0)
  std::vector<BlockCache> blocks;
  nn::Batch top;                      // encoder output entering the pool
  std::vector<nn::Vec> pooled;        // one d-vector per window
  nn::Batch head_hidden;              // relu output, one (width x 1) per window
  nn::Batch head_mask;                // dropout multipliers (empty when inactive)
  nn::Batch head_dropped;             // input to the out layer
  ForwardModes modes;
};

struct ForwardOutput {
  std::vector<nn::Vec> logits;
  std::vector<nn::Vec> probs;
};

// Encoder alone (12-channel input), exposed for composition tests.
nn::Batch encoder_forward(EncoderParams& enc, const nn::Batch& x12,
                          const std::vector<nn::Mode>& block_modes,
                          std::vector<BlockCache>* caches, nn::Batch* embedded);

// Full composition: adapter -> encoder -> temporal mean pool -> head -> softmax.
ForwardOutput model_forward(Model& m, const nn::Batch& x3,
                            const ForwardModes& modes, Rng& rng,
                            ModelCache* cache = nullptr);
// All-eval convenience (no dropout, running-stat norms).
ForwardOutput model_forward_eval(Model& m, const nn::Batch& x3);

// gamma = 0 with unit alpha is plain cross-entropy.
struct LossSpec {
  double gamma = 0.0;
  nn::Vec alpha{1.0, 1.0};
};

// Which components receive gradient entries (and run in train mode during
// training passes). Heads stay trainable in every scenario.
struct TrainablePlan {
  bool adapter = false;
  bool embed = false;
  std::vector<bool> blocks;
  bool head = true;

  ForwardModes training_modes(const Model& m) const;
};

// Mean loss over the batch plus gradients restricted to the plan's trainable
// leaves. Frozen components still propagate d(loss)/dx through themselves.
// Train-mode norms use batch statistics and update running stats.
double compute_gradients(Model& m, const nn::Batch& x3,
                         const std::vector<int>& targets, const LossSpec& loss,
                         const TrainablePlan& plan, Rng& rng,
                         nn::GradientSet& grads);

// Same loss value as compute_gradients (identical modes and dropout draws for
// an equally seeded rng) without touching the model: finite-difference probes
// evaluate this on perturbed copies.
double compute_loss_only(Model m, const nn::Batch& x3,
                         const std::vector<int>& targets, const LossSpec& loss,
                         const TrainablePlan& plan, Rng& rng);

}  // namespace cogadapt::profine
