#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "profine/model.hpp"

namespace cogadapt::profine {

enum class ValMetric { kAuroc, kMacroF1 };

// One fine-tuning scenario. Defaults come from scenario_defaults(); the
// invariants between fields (augmentation only in A, rate ordering in B,
// K within depth) are enforced by validate()/assign_learning_rates.
struct ScenarioConfig {
  char scenario = 'A';        // 'A' frozen encoder, 'B' top-K unfreeze, 'C' full
  std::string split = "loso"; // "kfold" or "loso"; picks rate column and metric
  int epochs = 30;
  int batch_size = 64;
  double lr_head = 1e-3;
  double lr_adapter = 1e-4;
  double lr_encoder_top = 0.0;     // B: the single unfrozen-layer rate
  double lr_encoder_mid = 0.0;     // C only
  double lr_encoder_bottom = 0.0;  // C only (embed joins this tier)
  int unfreeze_top_k = 2;          // B only
  bool adapter_trainable = true;
  double focal_gamma = 2.0;        // A only; 0 means plain cross-entropy
  bool auto_class_weights = true;  // A only
  bool augment = true;             // A only
  bool depth_decay = false;        // C: geometric per-layer rates instead of tiers
  double eta_base = 1e-5;          // C depth decay: top layer rate
  double decay_xi = 0.3;           // C depth decay: adjacent-layer ratio
  double weight_decay = 1e-4;
  double warmup_ratio = 0.1;
  int early_stop_patience = 10;
  int min_epochs = 0;
  std::uint64_t seed = 0;

  ValMetric val_metric() const;
  void validate(int encoder_depth) const;
};

// Table of per-scenario, per-split training hyperparameters.
ScenarioConfig scenario_defaults(char scenario, const std::string& split);

// A: adapter + head; B: plus top-K encoder blocks; C: everything including
// the embed. adapter_trainable=false drops the adapter from every scenario.
TrainablePlan select_trainable(const Model& m, const ScenarioConfig& cfg);

// top gets ceil(L/3) layers, mid gets ceil of the remainder's half, bottom
// the rest; with L=12 that is 4/4/4.
struct TierSplit {
  int top = 0, mid = 0, bottom = 0;
};
TierSplit tier_partition(int depth);

// Per-group rates for the optimizer, keyed like collect_model groups. Only
// trainable groups appear. Scenario B enforces head > adapter > encoder
// strictly; scenario C realizes per-depth decay either as top/mid/bottom
// tiers or, with depth_decay, geometrically (layer j gets eta_base*xi^(L-j),
// embed one factor below the bottom layer).
std::map<std::string, double> assign_learning_rates(const Model& m,
                                                    const ScenarioConfig& cfg,
                                                    const TrainablePlan& plan);

struct ClassWeights {
  nn::Vec alpha;
};

// alpha_c = (n0 + n1) / (2 n_c); both classes must occur.
ClassWeights compute_class_weights(const std::vector<int>& labels);

}  // namespace cogadapt::profine
