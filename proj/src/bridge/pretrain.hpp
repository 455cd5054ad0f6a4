#pragma once

#include <cstdint>
#include <vector>

#include "bridge/adapter.hpp"
#include "nn/tensor.hpp"

namespace cogadapt::bridge {

struct PretrainConfig {
  double smooth_l1_beta = 0.1;
  double lr = 3e-4;
  double weight_decay = 1e-4;
  int warmup_epochs = 5;
  int max_epochs = 100;
  int min_epochs = 20;
  int early_stop_patience = 5;
  double plateau_factor = 0.5;
  int plateau_patience = 5;
  int batch_size = 512;
  int grad_accum = 4;  // effective batch = batch_size * grad_accum
  std::uint64_t seed = 0;

  void validate() const;
};

struct PretrainEpoch {
  int epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  double lr = 0.0;  // schedule value used for this epoch's steps
};

struct PretrainResult {
  AdapterParams params;  // best-validation checkpoint (deep copy)
  double best_val_loss = 0.0;
  int best_epoch = 0;
  std::vector<PretrainEpoch> log;
};

// Validation loss of `p` on the given pairs in eval mode, mean smooth-L1 per
// window averaged over windows. Also used to verify returned checkpoints.
double pretrain_val_loss(AdapterParams& p, const nn::Batch& val_x,
                         const nn::Batch& val_y, double beta);

// Minimizes mean smooth-L1 over all output channels and timesteps with AdamW
// under warmup + cosine + plateau scheduling. Gradients are summed over
// `grad_accum` micro-batches (window-weighted) before each optimizer step.
// Stops early after `early_stop_patience` epochs without validation
// improvement, but never before `min_epochs`. A non-finite loss aborts.
PretrainResult pretrain_adapter(const AdapterParams& init,
                                const nn::Batch& train_x,
                                const nn::Batch& train_y,
                                const nn::Batch& val_x, const nn::Batch& val_y,
                                const PretrainConfig& cfg);

}  // namespace cogadapt::bridge
