#pragma once

#include <map>
#include <string>
#include <vector>

#include "common/rng.hpp"
#include "nn/tensor.hpp"

namespace cogadapt::nn {

// Decoupled weight decay applies to Weight leaves only; biases and both
// batch-norm affine leaves are exempt.
enum class ParamKind { kWeight, kBias, kBnGamma, kBnBeta };

// Non-owning view of one trainable leaf. `group` keys the learning-rate
// table (e.g. "head", "adapter", "enc.l3").
struct ParamRef {
  std::string name;
  std::string group;
  ParamKind kind;
  Vec* data;
};

// Gradient per leaf, keyed by leaf name. A leaf the loss does not depend on
// (or that the caller did not request) has no entry at all.
using GradientSet = std::map<std::string, Vec>;

// Non-trainable state that still belongs in checkpoints and freeze checks
// (batch-norm running statistics).
struct BufferRef {
  std::string name;
  Vec* data;
};

struct AdamwConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 1e-4;
};

struct OptimizerState {
  struct Moments {
    Vec m, v;
  };
  std::map<std::string, Moments> moments;
  long long step = 0;
};

// One AdamW step over every leaf that has a gradient entry. lr_by_group maps
// each leaf's group to its base rate; lr_scale is the shared schedule
// multiplier. Negative rates are rejected; a zero rate is the identity.
void adamw_step(OptimizerState& st, const AdamwConfig& cfg,
                const std::vector<ParamRef>& params, const GradientSet& grads,
                const std::map<std::string, double>& lr_by_group,
                double lr_scale = 1.0);

// He initialization: N(0, 2/fan_in) weights, zero bias.
void kaiming_init(Vec& weight, int fan_in, Rng& rng);

struct ScheduleConfig {
  double eta_max = 1e-3;
  double eta_min = 0.0;
  int warmup_epochs = 0;
  int total_epochs = 1;
  double plateau_factor = 0.5;
  int plateau_patience = 5;
};

// Tracks the monitored validation loss; each run of `plateau_patience`
// non-improving observations multiplies the schedule by plateau_factor.
struct PlateauState {
  double best = 0.0;
  bool seen = false;
  int since_improve = 0;
  int reductions = 0;

  void observe(double val_loss, const ScheduleConfig& cfg);
};

// Linear warmup from 0 to eta_max over warmup_epochs, then cosine decay to
// eta_min at total_epochs, scaled by plateau_factor^reductions. epoch is
// fractional-friendly on [0, total_epochs]; both branches meet at eta_max.
// Training loops evaluate it at epoch+1 (first epoch is 1), so warmup never
// yields a dead zero-rate epoch.
double schedule_lr(const ScheduleConfig& cfg, double epoch,
                   const PlateauState* plateau = nullptr);

}  // namespace cogadapt::nn
