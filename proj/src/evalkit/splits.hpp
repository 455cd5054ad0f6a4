#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace cogadapt::evalkit {

struct Fold {
  std::vector<std::size_t> train, val, test;
  std::string tag;  // "fold_3" or the held-out subject id
};

struct SplitPlan {
  std::vector<Fold> folds;
};

// Stratified k-fold over window indices. Per class, indices are shuffled by
// a seed-derived stream and dealt round-robin, so per-fold class counts are
// floor/ceil(n_c/k). Within each fold, 10% of the training side (per class,
// at least one) is carved off as validation. k must be >= 2 and no larger
// than the smaller class count.
SplitPlan kfold_split(const std::vector<int>& labels, int k, std::uint64_t seed,
                      double val_fraction = 0.1);

// Leave-one-subject-out: one fold per distinct subject (sorted id order),
// that subject's windows as test, the next subject round-robin as
// validation, the rest as train. Requires at least 3 subjects.
SplitPlan loso_split(const std::vector<std::string>& subjects);

struct EarlyStopConfig {
  int patience = 10;
  int min_epochs = 0;
  bool maximize = true;
};

struct EarlyStopState {
  double best = 0.0;
  int best_epoch = -1;
  int observations = 0;
  int since_improve = 0;

  // One validation observation per epoch; true means stop now. The counter
  // must exceed patience (the 11th flat observation under patience 10), and
  // never before min_epochs observations have been seen.
  bool observe(double value, const EarlyStopConfig& cfg);
};

}  // namespace cogadapt::evalkit
