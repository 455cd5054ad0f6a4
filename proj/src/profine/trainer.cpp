#include "profine/trainer.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "common/error.hpp"
#include "common/hash.hpp"
#include "evalkit/metrics.hpp"

namespace cogadapt::profine {

namespace {

// Buffer names look like "adapter.bn1.running_mean" or "enc.l3.bn.running_var";
// the owning optimizer group is the first segment, or the first two for "enc.".
std::string buffer_group(const std::string& name) {
  auto first = name.find('.');
  if (first == std::string::npos) return name;
  if (name.compare(0, 4, "enc.") == 0) {
    auto second = name.find('.', first + 1);
    if (second != std::string::npos) return name.substr(0, second);
  }
  return name.substr(0, first);
}

std::uint64_t hash_frozen(const std::vector<nn::ParamRef>& params,
                          const std::vector<nn::BufferRef>& buffers,
                          const std::map<std::string, double>& trainable_lr) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (const auto& p : params) {
    if (trainable_lr.count(p.group) == 0) h = fnv1a(*p.data, h);
  }
  for (const auto& b : buffers) {
    if (trainable_lr.count(buffer_group(b.name)) == 0) h = fnv1a(*b.data, h);
  }
  return h;
}

}  // namespace

Predictions predict(Model& m, const std::vector<signal::EcgWindow>& windows,
                    int batch_size) {
  if (batch_size <= 0) throw ConfigError("predict: batch_size must be positive");
  Predictions out;
  out.truth.reserve(windows.size());
  out.pred.reserve(windows.size());
  out.score.reserve(windows.size());
  for (std::size_t start = 0; start < windows.size();
       start += static_cast<std::size_t>(batch_size)) {
    std::size_t end = std::min(windows.size(),
                               start + static_cast<std::size_t>(batch_size));
    nn::Batch bx;
    bx.reserve(end - start);
    for (std::size_t i = start; i < end; ++i) {
      if (!windows[i].label.has_value()) {
        throw ConfigError("predict: window without a label");
      }
      bx.push_back(windows[i].data);
    }
    ForwardOutput fo = model_forward_eval(m, bx);
    for (std::size_t i = start; i < end; ++i) {
      const nn::Vec& p = fo.probs[i - start];
      int arg = 0;
      for (std::size_t c = 1; c < p.size(); ++c) {
        if (p[c] > p[arg]) arg = static_cast<int>(c);
      }
      out.truth.push_back(*windows[i].label);
      out.pred.push_back(arg);
      out.score.push_back(p.size() > 1 ? p[1] : 0.0);
    }
  }
  return out;
}

double metric_value(const Predictions& p, ValMetric metric) {
  if (metric == ValMetric::kMacroF1) {
    return evalkit::macro_f1(p.truth, p.pred);
  }
  // AUROC is undefined on a single-class set; fall back to macro-F1 so a
  // degenerate validation fold still produces a usable signal.
  auto a = evalkit::auroc(p.truth, p.score);
  return a.has_value() ? *a : evalkit::macro_f1(p.truth, p.pred);
}

TrainResult train_scenario(const Model& init,
                           const std::vector<signal::EcgWindow>& train,
                           const std::vector<signal::EcgWindow>& val,
                           const ScenarioConfig& cfg,
                           const signal::AugmentConfig& aug) {
  if (train.empty() || val.empty()) {
    throw ConfigError("train_scenario: needs training and validation windows");
  }
  std::vector<int> train_labels;
  train_labels.reserve(train.size());
  for (const auto& w : train) {
    if (!w.label.has_value()) throw ConfigError("train_scenario: unlabeled training window");
    train_labels.push_back(*w.label);
  }
  for (const auto& w : val) {
    if (!w.label.has_value()) throw ConfigError("train_scenario: unlabeled validation window");
  }

  Model m = init;
  TrainablePlan plan = select_trainable(m, cfg);
  std::map<std::string, double> lr = assign_learning_rates(m, cfg, plan);

  std::vector<nn::ParamRef> params;
  std::vector<nn::BufferRef> buffers;
  collect_model(m, params, buffers);
  std::uint64_t frozen_hash = hash_frozen(params, buffers, lr);

  LossSpec loss;
  loss.gamma = cfg.focal_gamma;
  if (cfg.scenario == 'A' && cfg.auto_class_weights) {
    loss.alpha = compute_class_weights(train_labels).alpha;
  } else {
    loss.alpha.assign(static_cast<std::size_t>(m.n_classes()), 1.0);
  }

  nn::AdamwConfig adamw;
  adamw.weight_decay = cfg.weight_decay;
  nn::OptimizerState opt;

  nn::ScheduleConfig sched;
  sched.eta_max = 1.0;  // group rates carry the magnitude; this is the shape
  sched.eta_min = 0.0;
  sched.total_epochs = cfg.epochs;
  sched.warmup_epochs = std::min<int>(
      cfg.epochs - 1,
      static_cast<int>(std::llround(cfg.warmup_ratio * cfg.epochs)));

  Rng rng(cfg.seed);
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::size_t batch = static_cast<std::size_t>(cfg.batch_size);
  std::size_t steps_per_epoch = (train.size() + batch - 1) / batch;

  TrainResult result;
  result.class_alpha = loss.alpha;
  result.best = m;
  result.best_val = -1.0;  // every real metric is >= 0
  int since_best = 0;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    shuffle_in_place(order, rng);
    double loss_sum = 0.0;
    std::size_t step = 0;
    for (std::size_t start = 0; start < order.size(); start += batch, ++step) {
      std::size_t end = std::min(order.size(), start + batch);
      nn::Batch bx;
      std::vector<int> by;
      bx.reserve(end - start);
      by.reserve(end - start);
      for (std::size_t i = start; i < end; ++i) {
        const signal::EcgWindow& w = train[order[i]];
        if (cfg.augment) {
          signal::EcgWindow copy = w;
          signal::augment(copy, aug, rng);
          bx.push_back(std::move(copy.data));
        } else {
          bx.push_back(w.data);
        }
        by.push_back(*w.label);
      }
      nn::GradientSet grads;
      double batch_mean = compute_gradients(m, bx, by, loss, plan, rng, grads);
      if (!std::isfinite(batch_mean)) {
        throw RuntimeError("train_scenario: non-finite loss at epoch " +
                           std::to_string(epoch));
      }
      loss_sum += batch_mean * static_cast<double>(end - start);
      // Warmup is resolved per step; epochs are 1-indexed on the schedule
      // axis so the first epoch never sits at rate zero.
      double t = static_cast<double>(epoch) +
                 static_cast<double>(step + 1) / static_cast<double>(steps_per_epoch);
      nn::adamw_step(opt, adamw, params, grads, lr, nn::schedule_lr(sched, t));
    }

    if (hash_frozen(params, buffers, lr) != frozen_hash) {
      throw std::logic_error("train_scenario: frozen parameters changed");
    }

    Predictions pv = predict(m, val, cfg.batch_size);
    double metric = metric_value(pv, cfg.val_metric());

    TrainEpoch row;
    row.epoch = epoch;
    row.train_loss = loss_sum / static_cast<double>(train.size());
    row.val_metric = metric;
    double end_scale = nn::schedule_lr(sched, static_cast<double>(epoch + 1));
    for (const auto& [group, rate] : lr) row.lr[group] = rate * end_scale;
    result.log.push_back(row);

    if (metric > result.best_val) {
      result.best_val = metric;
      result.best_epoch = epoch;
      result.best = m;
      since_best = 0;
    } else {
      ++since_best;
    }
    if (epoch + 1 >= cfg.min_epochs && since_best > cfg.early_stop_patience) {
      break;
    }
  }
  return result;
}

}  // namespace cogadapt::profine
