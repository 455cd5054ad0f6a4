#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

#include "bridge/pretrain.hpp"
#include "dataio/synth.hpp"
#include "profine/model.hpp"
#include "profine/scenario.hpp"
#include "signal/pipeline.hpp"

namespace cogadapt::run {

using Json = nlohmann::ordered_json;

// Whole-pipeline configuration as one JSON tree. Code defaults are
// desk-scale; configs/default.json layers the full-scale values on top.
// Files and --set overrides may only touch keys that exist in the default
// tree (typos fail loudly), and a "scenario" key left null means "use the
// built-in table default for the chosen scenario and split".
class RunConfig {
 public:
  static RunConfig defaults();
  static RunConfig load(const std::string& path);  // defaults + file overlay

  // dotted_key like "synth.n_subjects". The value is parsed as JSON unless
  // the target is a string. Unknown keys and type changes are ConfigErrors.
  void set(const std::string& dotted_key, const std::string& value);

  void save(const std::string& path) const;  // resolved echo, reload-stable
  const Json& tree() const { return tree_; }

  std::uint64_t seed() const;
  std::string out_dir() const;

  std::string dataset_dir() const;
  std::string windows_dir() const;
  std::string adapter_checkpoint() const;
  std::string fixed_transform_path() const;

  dataio::SynthConfig synth() const;
  signal::WindowingConfig windowing() const;
  signal::AugmentConfig augment() const;
  profine::ModelConfig model() const;

  struct PretrainSection {
    bridge::PretrainConfig cfg;
    double val_fraction = 0.2;
  };
  PretrainSection pretrain() const;

  struct TrainSection {
    std::string split;  // "kfold" or "loso"
    int k_folds = 5;
    double kfold_val_fraction = 0.1;
  };
  TrainSection train() const;

  // scenario_defaults(train.scenario, train.split) overlaid with every
  // non-null "scenario" key; seed = master seed (folds re-derive their own).
  profine::ScenarioConfig scenario_config() const;

 private:
  Json tree_;
};

// Per-fold seed derived from (master seed, fold index); folds are
// reproducible independently of execution order or thread count.
std::uint64_t fold_seed(std::uint64_t master, std::size_t fold_index);

// COGADAPT_THREADS, clamped to [1, n_folds]; unset or invalid means 1.
int fold_thread_budget(std::size_t n_folds);

}  // namespace cogadapt::run
