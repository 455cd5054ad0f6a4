#include "evalkit/splits.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "common/error.hpp"
#include "common/rng.hpp"

namespace cogadapt::evalkit {

SplitPlan kfold_split(const std::vector<int>& labels, int k, std::uint64_t seed,
                      double val_fraction) {
  if (labels.empty()) throw ConfigError("kfold_split: empty dataset");
  if (k < 2) throw ConfigError("kfold_split: k must be >= 2");
  if (!(val_fraction > 0.0 && val_fraction < 1.0)) {
    throw ConfigError("kfold_split: val_fraction must lie in (0, 1)");
  }

  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != 0 && labels[i] != 1) {
      throw ConfigError("kfold_split: labels must be binary");
    }
    by_class[labels[i]].push_back(i);
  }
  for (const auto& [c, idx] : by_class) {
    if (static_cast<int>(idx.size()) < k) {
      throw ConfigError("kfold_split: k exceeds the count of class " + std::to_string(c));
    }
  }

  Rng base(seed);
  std::map<int, std::vector<std::size_t>> shuffled = by_class;
  for (auto& [c, idx] : shuffled) {
    Rng r = base.substream(static_cast<std::uint64_t>(100 + c));
    shuffle_in_place(idx, r);
  }

  SplitPlan plan;
  plan.folds.resize(static_cast<std::size_t>(k));
  for (int f = 0; f < k; ++f) plan.folds[f].tag = "fold_" + std::to_string(f);

  // Round-robin deal of each class across folds -> test memberships.
  std::vector<int> fold_of(labels.size(), -1);
  for (const auto& [c, idx] : shuffled) {
    for (std::size_t pos = 0; pos < idx.size(); ++pos) {
      int f = static_cast<int>(pos % static_cast<std::size_t>(k));
      plan.folds[f].test.push_back(idx[pos]);
      fold_of[idx[pos]] = f;
    }
  }

  for (int f = 0; f < k; ++f) {
    Fold& fold = plan.folds[f];
    std::map<int, std::vector<std::size_t>> train_by_class;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (fold_of[i] != f) train_by_class[labels[i]].push_back(i);
    }
    for (auto& [c, idx] : train_by_class) {
      Rng r = base.substream(static_cast<std::uint64_t>(1000 + f) * 10 +
                             static_cast<std::uint64_t>(c));
      shuffle_in_place(idx, r);
      std::size_t n_val = static_cast<std::size_t>(
          std::llround(val_fraction * static_cast<double>(idx.size())));
      n_val = std::max<std::size_t>(n_val, 1);
      for (std::size_t pos = 0; pos < idx.size(); ++pos) {
        (pos < n_val ? fold.val : fold.train).push_back(idx[pos]);
      }
    }
    std::sort(fold.train.begin(), fold.train.end());
    std::sort(fold.val.begin(), fold.val.end());
    std::sort(fold.test.begin(), fold.test.end());
  }
  return plan;
}

SplitPlan loso_split(const std::vector<std::string>& subjects) {
  if (subjects.empty()) throw ConfigError("loso_split: empty dataset");
  std::set<std::string> distinct(subjects.begin(), subjects.end());
  if (distinct.size() < 3) {
    throw ConfigError("loso_split: needs at least 3 subjects, got " +
                      std::to_string(distinct.size()));
  }
  std::vector<std::string> order(distinct.begin(), distinct.end());

  SplitPlan plan;
  for (std::size_t si = 0; si < order.size(); ++si) {
    Fold fold;
    fold.tag = order[si];
    const std::string& val_subject = order[(si + 1) % order.size()];
    for (std::size_t i = 0; i < subjects.size(); ++i) {
      if (subjects[i] == order[si]) {
        fold.test.push_back(i);
      } else if (subjects[i] == val_subject) {
        fold.val.push_back(i);
      } else {
        fold.train.push_back(i);
      }
    }
    plan.folds.push_back(std::move(fold));
  }
  return plan;
}

bool EarlyStopState::observe(double value, const EarlyStopConfig& cfg) {
  observations += 1;
  bool improved = observations == 1 ||
                  (cfg.maximize ? value > best : value < best);
  if (improved) {
    best = value;
    best_epoch = observations;
    since_improve = 0;
    return false;
  }
  since_improve += 1;
  return since_improve > cfg.patience && observations >= cfg.min_epochs;
}

}  // namespace cogadapt::evalkit
