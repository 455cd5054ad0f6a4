#pragma once

#include <map>
#include <string>
#include <vector>

#include "profine/model.hpp"
#include "profine/scenario.hpp"
#include "signal/pipeline.hpp"

namespace cogadapt::profine {

struct TrainEpoch {
  int epoch = 0;
  double train_loss = 0.0;
  double val_metric = 0.0;
  std::map<std::string, double> lr;  // per group, at the epoch's last step
};

struct TrainResult {
  Model best;  // checkpoint of the best validation epoch
  double best_val = 0.0;
  int best_epoch = -1;
  std::vector<TrainEpoch> log;
  nn::Vec class_alpha{1.0, 1.0};  // loss weights actually used
};

struct Predictions {
  std::vector<int> truth;
  std::vector<int> pred;
  std::vector<double> score;  // probability of class 1
};

// Eval-mode predictions in window order (deterministic reduction order).
Predictions predict(Model& m, const std::vector<signal::EcgWindow>& windows,
                    int batch_size = 64);

double metric_value(const Predictions& p, ValMetric metric);

// Scenario fine-tuning loop: per epoch, shuffle, optionally augment (A),
// forward/backward restricted to the scenario's trainable set, AdamW with
// per-group rates under warmup+cosine, then validation scoring and early
// stopping. Frozen leaves are hash-checked every epoch; a change is a logic
// error, not a config error. Windows must carry labels.
TrainResult train_scenario(const Model& init,
                           const std::vector<signal::EcgWindow>& train,
                           const std::vector<signal::EcgWindow>& val,
                           const ScenarioConfig& cfg,
                           const signal::AugmentConfig& aug);

}  // namespace cogadapt::profine
