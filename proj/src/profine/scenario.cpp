#include "profine/scenario.hpp"

#include <cmath>

#include "common/error.hpp"

namespace cogadapt::profine {

ValMetric ScenarioConfig::val_metric() const {
  if (split == "kfold") return ValMetric::kAuroc;
  if (split == "loso") return ValMetric::kMacroF1;
  throw ConfigError("scenario: split must be \"kfold\" or \"loso\"");
}

void ScenarioConfig::validate(int encoder_depth) const {
  if (scenario != 'A' && scenario != 'B' && scenario != 'C') {
    throw ConfigError("scenario must be A, B, or C");
  }
  (void)val_metric();
  if (epochs <= 0) throw ConfigError("scenario: epochs must be positive");
  if (batch_size <= 0) throw ConfigError("scenario: batch_size must be positive");
  if (lr_head < 0.0 || lr_adapter < 0.0 || lr_encoder_top < 0.0 ||
      lr_encoder_mid < 0.0 || lr_encoder_bottom < 0.0) {
    throw ConfigError("scenario: learning rates must be non-negative");
  }
  if (focal_gamma < 0.0) throw ConfigError("scenario: focal_gamma must be >= 0");
  if (scenario != 'A') {
    if (augment) throw ConfigError("scenario: augmentation is scenario-A only");
    if (focal_gamma != 0.0) {
      throw ConfigError("scenario: focal loss is scenario-A only (B/C use cross-entropy)");
    }
    if (auto_class_weights) {
      throw ConfigError("scenario: automatic class weights are scenario-A only");
    }
  }
  if (scenario == 'B') {
    if (unfreeze_top_k < 1) throw ConfigError("scenario B: unfreeze_top_k must be >= 1");
    if (unfreeze_top_k > encoder_depth) {
      throw ConfigError("scenario B: unfreeze_top_k exceeds encoder depth");
    }
  }
  if (scenario == 'C' && encoder_depth < 1) {
    throw ConfigError("scenario C: encoder must have at least one layer");
  }
  if (depth_decay) {
    if (scenario != 'C') throw ConfigError("scenario: depth_decay applies to scenario C only");
    if (!(decay_xi > 0.0 && decay_xi < 1.0)) {
      throw ConfigError("scenario: decay_xi must lie in (0, 1)");
    }
    if (eta_base < 0.0) throw ConfigError("scenario: eta_base must be non-negative");
  }
  if (weight_decay < 0.0) throw ConfigError("scenario: weight_decay must be non-negative");
  if (warmup_ratio < 0.0 || warmup_ratio >= 1.0) {
    throw ConfigError("scenario: warmup_ratio must lie in [0, 1)");
  }
  if (early_stop_patience < 0) throw ConfigError("scenario: early_stop_patience must be >= 0");
  if (min_epochs < 0 || min_epochs > epochs) {
    throw ConfigError("scenario: min_epochs must lie in [0, epochs]");
  }
}

ScenarioConfig scenario_defaults(char scenario, const std::string& split) {
  if (split != "kfold" && split != "loso") {
    throw ConfigError("scenario_defaults: split must be \"kfold\" or \"loso\"");
  }
  ScenarioConfig c;
  c.scenario = scenario;
  c.split = split;
  switch (scenario) {
    case 'A':
      c.epochs = 30;
      c.batch_size = 64;
      c.lr_head = 1e-3;
      c.lr_adapter = 1e-4;
      c.focal_gamma = 2.0;
      c.auto_class_weights = true;
      c.augment = true;
      break;
    case 'B':
      c.epochs = 20;
      c.batch_size = 64;
      c.lr_head = 5e-4;
      c.lr_adapter = 1e-4;
      c.lr_encoder_top = 1e-5;
      c.unfreeze_top_k = 2;
      c.focal_gamma = 0.0;
      c.auto_class_weights = false;
      c.augment = false;
      break;
    case 'C':
      c.epochs = 10;
      c.batch_size = 32;
      if (split == "kfold") {
        c.lr_head = 1e-4;
        c.lr_adapter = 3e-5;
        c.lr_encoder_top = 1e-5;
        c.lr_encoder_mid = 3e-6;
        c.lr_encoder_bottom = 1e-6;
      } else {
        c.lr_head = 5e-5;
        c.lr_adapter = 1e-5;
        c.lr_encoder_top = 5e-6;
        c.lr_encoder_mid = 1e-6;
        c.lr_encoder_bottom = 5e-7;
      }
      c.focal_gamma = 0.0;
      c.auto_class_weights = false;
      c.augment = false;
      break;
    default:
      throw ConfigError("scenario_defaults: scenario must be A, B, or C");
  }
  return c;
}

TrainablePlan select_trainable(const Model& m, const ScenarioConfig& cfg) {
  int depth = m.encoder.depth();
  cfg.validate(depth);
  TrainablePlan plan;
  plan.head = true;
  plan.adapter = cfg.adapter_trainable;
  plan.blocks.assign(static_cast<std::size_t>(depth), false);
  plan.embed = false;
  if (cfg.scenario == 'B') {
    for (int j = depth - cfg.unfreeze_top_k; j < depth; ++j) {
      plan.blocks[static_cast<std::size_t>(j)] = true;
    }
  } else if (cfg.scenario == 'C') {
    plan.blocks.assign(static_cast<std::size_t>(depth), true);
    plan.embed = true;
  }
  return plan;
}

TierSplit tier_partition(int depth) {
  if (depth < 1) throw ConfigError("tier_partition: depth must be >= 1");
  TierSplit t;
  t.top = (depth + 2) / 3;
  t.mid = (depth - t.top + 1) / 2;
  t.bottom = depth - t.top - t.mid;
  return t;
}

std::map<std::string, double> assign_learning_rates(const Model& m,
                                                    const ScenarioConfig& cfg,
                                                    const TrainablePlan& plan) {
  int depth = m.encoder.depth();
  cfg.validate(depth);
  std::map<std::string, double> lr;
  lr["head"] = cfg.lr_head;
  if (plan.adapter) lr["adapter"] = cfg.lr_adapter;

  if (cfg.scenario == 'B') {
    // Rate ordering for partial unfreezing: fresh modules learn fastest,
    // pretrained layers slowest, strictly.
    if (plan.adapter) {
      if (!(cfg.lr_head > cfg.lr_adapter && cfg.lr_adapter > cfg.lr_encoder_top)) {
        throw ConfigError(
            "scenario B: rates must satisfy head > adapter > encoder strictly");
      }
    } else if (!(cfg.lr_head > cfg.lr_encoder_top)) {
      throw ConfigError("scenario B: rates must satisfy head > encoder strictly");
    }
    for (int j = 0; j < depth; ++j) {
      if (plan.blocks[static_cast<std::size_t>(j)]) {
        lr["enc.l" + std::to_string(j + 1)] = cfg.lr_encoder_top;
      }
    }
  } else if (cfg.scenario == 'C') {
    if (cfg.depth_decay) {
      // Layer j of L gets eta_base * xi^(L-j); the embed continues the
      // progression one step below layer 1.
      for (int j = 1; j <= depth; ++j) {
        lr["enc.l" + std::to_string(j)] =
            cfg.eta_base * std::pow(cfg.decay_xi, static_cast<double>(depth - j));
      }
      lr["enc.embed"] =
          cfg.eta_base * std::pow(cfg.decay_xi, static_cast<double>(depth));
    } else {
      TierSplit tiers = tier_partition(depth);
      for (int j = 1; j <= depth; ++j) {
        double rate;
        if (j > depth - tiers.top) {
          rate = cfg.lr_encoder_top;
        } else if (j > tiers.bottom) {
          rate = cfg.lr_encoder_mid;
        } else {
          rate = cfg.lr_encoder_bottom;
        }
        lr["enc.l" + std::to_string(j)] = rate;
      }
      lr["enc.embed"] = cfg.lr_encoder_bottom;
    }
  }
  return lr;
}

ClassWeights compute_class_weights(const std::vector<int>& labels) {
  long long n0 = 0, n1 = 0;
  for (int y : labels) {
    if (y == 0) {
      ++n0;
    } else if (y == 1) {
      ++n1;
    } else {
      throw ConfigError("compute_class_weights: labels must be binary");
    }
  }
  if (n0 == 0 || n1 == 0) {
    throw ConfigError("compute_class_weights: both classes must be present");
  }
  double total = static_cast<double>(n0 + n1);
  ClassWeights w;
  w.alpha = {total / (2.0 * static_cast<double>(n0)),
             total / (2.0 * static_cast<double>(n1))};
  return w;
}

}  // namespace cogadapt::profine
