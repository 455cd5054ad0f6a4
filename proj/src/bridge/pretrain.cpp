#include "bridge/pretrain.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "common/error.hpp"
#include "nn/losses.hpp"
#include "nn/optim.hpp"

namespace cogadapt::bridge {

void PretrainConfig::validate() const {
  if (smooth_l1_beta <= 0.0) throw ConfigError("pretrain: smooth_l1_beta must be positive");
  if (lr < 0.0) throw ConfigError("pretrain: lr must be non-negative");
  if (weight_decay < 0.0) throw ConfigError("pretrain: weight_decay must be non-negative");
  // Zero epochs is legal and returns the initialization untouched.
  if (max_epochs < 0) throw ConfigError("pretrain: max_epochs must be non-negative");
  if (warmup_epochs < 0 || (max_epochs > 0 && warmup_epochs >= max_epochs)) {
    throw ConfigError("pretrain: warmup_epochs must lie in [0, max_epochs)");
  }
  if (min_epochs < 0 || min_epochs > max_epochs) {
    throw ConfigError("pretrain: min_epochs must lie in [0, max_epochs]");
  }
  if (early_stop_patience < 0) throw ConfigError("pretrain: early_stop_patience must be non-negative");
  if (plateau_factor <= 0.0 || plateau_factor > 1.0) {
    throw ConfigError("pretrain: plateau_factor must lie in (0, 1]");
  }
  if (plateau_patience <= 0) throw ConfigError("pretrain: plateau_patience must be positive");
  if (batch_size <= 0) throw ConfigError("pretrain: batch_size must be positive");
  if (grad_accum <= 0) throw ConfigError("pretrain: grad_accum must be positive");
}

double pretrain_val_loss(AdapterParams& p, const nn::Batch& val_x,
                         const nn::Batch& val_y, double beta) {
  if (val_x.size() != val_y.size()) {
    throw DimensionError("pretrain: validation pair count mismatch");
  }
  double total = 0.0;
  Rng unused(0);
  // Window-at-a-time keeps eval memory flat; eval-mode norms make batch
  // composition irrelevant.
  for (std::size_t i = 0; i < val_x.size(); ++i) {
    nn::Batch one{val_x[i]};
    nn::Batch out = adapter_forward(p, one, nn::Mode::kEval, unused, nullptr);
    total += nn::smooth_l1(out[0], val_y[i], beta);
  }
  return total / static_cast<double>(val_x.size());
}

PretrainResult pretrain_adapter(const AdapterParams& init,
                                const nn::Batch& train_x,
                                const nn::Batch& train_y,
                                const nn::Batch& val_x, const nn::Batch& val_y,
                                const PretrainConfig& cfg) {
  cfg.validate();
  if (train_x.empty() || val_x.empty()) {
    throw ConfigError("pretrain: needs at least one training and one validation pair");
  }
  if (train_x.size() != train_y.size()) {
    throw DimensionError("pretrain: training pair count mismatch");
  }

  AdapterParams p = init;
  std::vector<nn::ParamRef> params;
  std::vector<nn::BufferRef> buffers;
  collect_adapter(p, "adapter", "adapter", params, buffers);

  nn::AdamwConfig adamw;
  adamw.weight_decay = cfg.weight_decay;
  nn::OptimizerState opt;
  std::map<std::string, double> lr_by_group{{"adapter", 1.0}};

  nn::ScheduleConfig sched;
  sched.eta_max = cfg.lr;
  sched.eta_min = 0.0;
  sched.warmup_epochs = cfg.warmup_epochs;
  sched.total_epochs = cfg.max_epochs;
  sched.plateau_factor = cfg.plateau_factor;
  sched.plateau_patience = cfg.plateau_patience;
  nn::PlateauState plateau;

  Rng rng(cfg.seed);
  std::vector<std::size_t> order(train_x.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  PretrainResult result;
  result.params = p;
  result.best_val_loss = pretrain_val_loss(p, val_x, val_y, cfg.smooth_l1_beta);
  result.best_epoch = -1;  // epoch 0 must improve on the raw initialization
  int epochs_since_best = 0;

  for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    // Schedule epochs are 1-indexed; the rate is frozen across the epoch.
    double lr = nn::schedule_lr(sched, static_cast<double>(epoch + 1), &plateau);
    shuffle_in_place(order, rng);

    double epoch_loss_sum = 0.0;
    std::size_t group_windows = 0;
    int group_micros = 0;
    nn::GradientSet group_grads;

    auto flush_step = [&]() {
      if (group_micros == 0) return;
      // Sum of per-window-mean gradients -> mean over the accumulation group.
      double inv = 1.0 / static_cast<double>(group_windows);
      for (auto& [name, g] : group_grads) {
        for (double& v : g) v *= inv;
      }
      nn::adamw_step(opt, adamw, params, group_grads, lr_by_group, lr);
      group_grads.clear();
      group_windows = 0;
      group_micros = 0;
    };

    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(cfg.batch_size)) {
      std::size_t end = std::min(order.size(),
                                 start + static_cast<std::size_t>(cfg.batch_size));
      nn::Batch bx, by;
      bx.reserve(end - start);
      by.reserve(end - start);
      for (std::size_t i = start; i < end; ++i) {
        bx.push_back(train_x[order[i]]);
        by.push_back(train_y[order[i]]);
      }

      AdapterCache cache;
      nn::Batch out = adapter_forward(p, bx, nn::Mode::kTrain, rng, &cache);
      nn::Batch dy(out.size());
      double micro_loss = 0.0;
      for (std::size_t i = 0; i < out.size(); ++i) {
        micro_loss += nn::smooth_l1(out[i], by[i], cfg.smooth_l1_beta);
        dy[i] = nn::smooth_l1_grad(out[i], by[i], cfg.smooth_l1_beta);
      }
      if (!std::isfinite(micro_loss)) {
        throw RuntimeError("pretrain diverged: non-finite loss at epoch " +
                           std::to_string(epoch) + ", window offset " +
                           std::to_string(start));
      }
      epoch_loss_sum += micro_loss;

      nn::GradientSet micro_grads;
      adapter_backward(p, cache, dy, "adapter", micro_grads);
      for (auto& [name, g] : micro_grads) {
        auto& acc = group_grads[name];
        if (acc.empty()) {
          acc = std::move(g);
        } else {
          for (std::size_t k = 0; k < g.size(); ++k) acc[k] += g[k];
        }
      }
      group_windows += out.size();
      if (++group_micros == cfg.grad_accum) flush_step();
    }
    flush_step();  // leftover micro-batches still take a (smaller) step

    double val = pretrain_val_loss(p, val_x, val_y, cfg.smooth_l1_beta);
    if (!std::isfinite(val)) {
      throw RuntimeError("pretrain diverged: non-finite validation loss at epoch " +
                         std::to_string(epoch));
    }
    plateau.observe(val, sched);

    PretrainEpoch row;
    row.epoch = epoch;
    row.train_loss = epoch_loss_sum / static_cast<double>(train_x.size());
    row.val_loss = val;
    row.lr = lr;
    result.log.push_back(row);

    if (val < result.best_val_loss) {
      result.best_val_loss = val;
      result.best_epoch = epoch;
      result.params = p;
      epochs_since_best = 0;
    } else {
      ++epochs_since_best;
    }
    if (epoch + 1 >= cfg.min_epochs && epochs_since_best > cfg.early_stop_patience) {
      break;
    }
  }
  return result;
}

}  // namespace cogadapt::bridge
