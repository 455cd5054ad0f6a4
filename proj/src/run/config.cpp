#include "run/config.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>

#include "common/error.hpp"
#include "common/hash.hpp"

namespace cogadapt::run {

namespace {

// File overlays and --set may only replace values that already exist with
// values of the same JSON type; null defaults accept any non-object value.
void check_replacement(const Json& slot, const Json& v, const std::string& path) {
  if (v.is_object()) {
    throw ConfigError("config: key " + path + " cannot be replaced by an object");
  }
  if (slot.is_null() || v.is_null()) return;
  bool ok = (slot.is_number() && v.is_number()) ||
            (slot.is_string() && v.is_string()) ||
            (slot.is_boolean() && v.is_boolean()) ||
            (slot.is_array() && v.is_array());
  if (!ok) {
    throw ConfigError("config: key " + path + " has the wrong type (expected " +
                      std::string(slot.type_name()) + ")");
  }
}

void merge_into(Json& base, const Json& patch, const std::string& path) {
  if (!patch.is_object()) {
    throw ConfigError("config: " + (path.empty() ? std::string("document") : path) +
                      " must be a JSON object");
  }
  for (auto it = patch.begin(); it != patch.end(); ++it) {
    std::string p = path.empty() ? it.key() : path + "." + it.key();
    if (!base.contains(it.key())) throw ConfigError("config: unknown key " + p);
    Json& slot = base[it.key()];
    if (slot.is_object()) {
      merge_into(slot, it.value(), p);
      continue;
    }
    check_replacement(slot, it.value(), p);
    slot = it.value();
  }
}

template <typename T>
T field(const Json& section, const char* key, const std::string& ctx) {
  try {
    return section.at(key).get<T>();
  } catch (const Json::exception& e) {
    std::string where = ctx.empty() ? std::string(key) : ctx + "." + key;
    throw ConfigError("config: " + where + ": " + e.what());
  }
}

// Applies a non-null scenario override.
template <typename T, typename F>
void overlay(const Json& section, const char* key, F&& assign) {
  const Json& v = section.at(key);
  if (v.is_null()) return;
  try {
    assign(v.get<T>());
  } catch (const Json::exception& e) {
    throw ConfigError("config: scenario." + std::string(key) + ": " + e.what());
  }
}

}  // namespace

RunConfig RunConfig::defaults() {
  RunConfig c;
  Json& t = c.tree_;
  t["seed"] = 1;
  t["out_dir"] = "out";

  t["data"]["dataset_dir"] = "";
  t["data"]["windows_dir"] = "";
  t["data"]["adapter_checkpoint"] = "";
  t["data"]["fixed_transform"] = "assets/inverse_dower_12x3.txt";

  t["synth"]["n_subjects"] = 20;
  t["synth"]["minutes_per_subject"] = 2.0;
  t["synth"]["fs"] = 96.0;
  t["synth"]["base_hr_bpm"] = 75.0;
  t["synth"]["hr_subject_spread_bpm"] = 12.0;
  t["synth"]["rr_std_low_ms"] = 80.0;
  t["synth"]["rr_std_high_ms"] = 20.0;
  t["synth"]["high_load_hr_scale"] = 1.3;
  t["synth"]["mixing"] = nullptr;
  t["synth"]["chest_pick"] = "V2";
  t["synth"]["label_period_s"] = 10.0;
  t["synth"]["noise_std"] = 0.02;

  t["windowing"]["window_seconds"] = 5.0;
  t["windowing"]["train_stride_seconds"] = 2.5;
  t["windowing"]["eval_stride_seconds"] = 5.0;
  t["windowing"]["target_fs"] = 96.0;
  t["windowing"]["band_lo_hz"] = 0.5;
  t["windowing"]["band_hi_hz"] = 40.0;
  t["windowing"]["filter_order"] = 4;
  t["windowing"]["normalize_eps"] = 1e-8;

  t["augment"]["apply_prob"] = 0.5;
  t["augment"]["jitter_alpha"] = 0.1;
  t["augment"]["noise_sigma"] = 0.02;
  t["augment"]["max_shift"] = 50;

  t["model"]["adapter_hidden"] = 32;
  t["model"]["adapter_dropout"] = 0.1;
  t["model"]["encoder_layers"] = 4;
  t["model"]["encoder_dim"] = 16;
  t["model"]["embed_stride"] = 4;
  t["model"]["head_hidden"] = 64;
  t["model"]["head_dropout"] = 0.2;

  t["pretrain"]["smooth_l1_beta"] = 0.1;
  t["pretrain"]["lr"] = 3e-4;
  t["pretrain"]["weight_decay"] = 1e-4;
  t["pretrain"]["warmup_epochs"] = 3;
  t["pretrain"]["max_epochs"] = 30;
  t["pretrain"]["min_epochs"] = 5;
  t["pretrain"]["early_stop_patience"] = 5;
  t["pretrain"]["plateau_factor"] = 0.5;
  t["pretrain"]["plateau_patience"] = 5;
  t["pretrain"]["batch_size"] = 128;
  t["pretrain"]["grad_accum"] = 2;
  t["pretrain"]["val_fraction"] = 0.2;

  t["train"]["scenario"] = "A";
  t["train"]["split"] = "loso";
  t["train"]["k_folds"] = 5;
  t["train"]["kfold_val_fraction"] = 0.1;

  // null = use the built-in per-scenario table value.
  for (const char* key :
       {"epochs", "batch_size", "lr_head", "lr_adapter", "lr_encoder_top",
        "lr_encoder_mid", "lr_encoder_bottom", "unfreeze_top_k",
        "adapter_trainable", "focal_gamma", "auto_class_weights", "augment",
        "depth_decay", "eta_base", "decay_xi", "weight_decay", "warmup_ratio",
        "early_stop_patience", "min_epochs"}) {
    t["scenario"][key] = nullptr;
  }
  return c;
}

RunConfig RunConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  Json patch;
  try {
    patch = Json::parse(in);
  } catch (const Json::exception& e) {
    throw ConfigError("config: " + path + ": " + e.what());
  }
  RunConfig c = defaults();
  merge_into(c.tree_, patch, "");
  return c;
}

void RunConfig::set(const std::string& dotted_key, const std::string& value) {
  Json* node = &tree_;
  std::size_t pos = 0;
  while (true) {
    std::size_t dot = dotted_key.find('.', pos);
    std::string part = dotted_key.substr(pos, dot - pos);
    if (part.empty() || !node->is_object() || !node->contains(part)) {
      throw ConfigError("config: unknown key " + dotted_key);
    }
    node = &(*node)[part];
    if (dot == std::string::npos) break;
    pos = dot + 1;
  }
  if (node->is_object()) {
    throw ConfigError("config: key " + dotted_key + " is a section, not a value");
  }
  Json v;
  if (node->is_string()) {
    v = value;
  } else {
    try {
      v = Json::parse(value);
    } catch (const Json::exception&) {
      throw ConfigError("config: cannot parse value for " + dotted_key + ": " + value);
    }
  }
  check_replacement(*node, v, dotted_key);
  *node = v;
}

void RunConfig::save(const std::string& path) const {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw ConfigError("config: cannot write " + path);
  out << tree_.dump(2) << "\n";
  if (!out) throw ConfigError("config: write failed for " + path);
}

std::uint64_t RunConfig::seed() const {
  auto s = field<std::int64_t>(tree_, "seed", "");
  if (s < 0) throw ConfigError("config: seed must be non-negative");
  return static_cast<std::uint64_t>(s);
}

std::string RunConfig::out_dir() const {
  auto d = field<std::string>(tree_, "out_dir", "");
  if (d.empty()) throw ConfigError("config: out_dir is empty");
  return d;
}

std::string RunConfig::dataset_dir() const {
  return field<std::string>(tree_.at("data"), "dataset_dir", "data");
}
std::string RunConfig::windows_dir() const {
  return field<std::string>(tree_.at("data"), "windows_dir", "data");
}
std::string RunConfig::adapter_checkpoint() const {
  return field<std::string>(tree_.at("data"), "adapter_checkpoint", "data");
}
std::string RunConfig::fixed_transform_path() const {
  return field<std::string>(tree_.at("data"), "fixed_transform", "data");
}

dataio::SynthConfig RunConfig::synth() const {
  const Json& s = tree_.at("synth");
  dataio::SynthConfig cfg;
  cfg.n_subjects = field<int>(s, "n_subjects", "synth");
  cfg.minutes_per_subject = field<double>(s, "minutes_per_subject", "synth");
  cfg.fs = field<double>(s, "fs", "synth");
  cfg.base_hr_bpm = field<double>(s, "base_hr_bpm", "synth");
  cfg.hr_subject_spread_bpm = field<double>(s, "hr_subject_spread_bpm", "synth");
  cfg.rr_std_low_ms = field<double>(s, "rr_std_low_ms", "synth");
  cfg.rr_std_high_ms = field<double>(s, "rr_std_high_ms", "synth");
  cfg.high_load_hr_scale = field<double>(s, "high_load_hr_scale", "synth");
  if (!s.at("mixing").is_null()) {
    cfg.mixing = field<std::vector<double>>(s, "mixing", "synth");
  }
  cfg.chest_pick = field<std::string>(s, "chest_pick", "synth");
  cfg.label_period_s = field<double>(s, "label_period_s", "synth");
  cfg.noise_std = field<double>(s, "noise_std", "synth");
  cfg.seed = seed();
  cfg.validate();
  return cfg;
}

signal::WindowingConfig RunConfig::windowing() const {
  const Json& w = tree_.at("windowing");
  signal::WindowingConfig cfg;
  cfg.window_seconds = field<double>(w, "window_seconds", "windowing");
  cfg.train_stride_seconds = field<double>(w, "train_stride_seconds", "windowing");
  cfg.eval_stride_seconds = field<double>(w, "eval_stride_seconds", "windowing");
  cfg.target_fs = field<double>(w, "target_fs", "windowing");
  cfg.band_lo_hz = field<double>(w, "band_lo_hz", "windowing");
  cfg.band_hi_hz = field<double>(w, "band_hi_hz", "windowing");
  cfg.filter_order = field<int>(w, "filter_order", "windowing");
  cfg.normalize_eps = field<double>(w, "normalize_eps", "windowing");
  if (!(cfg.window_seconds > 0.0) || !(cfg.train_stride_seconds > 0.0) ||
      !(cfg.eval_stride_seconds > 0.0) || !(cfg.target_fs > 0.0)) {
    throw ConfigError("config: windowing times and target_fs must be positive");
  }
  if (!(cfg.band_lo_hz > 0.0) || !(cfg.band_hi_hz > cfg.band_lo_hz) ||
      cfg.band_hi_hz >= cfg.target_fs / 2.0) {
    throw ConfigError("config: windowing band must satisfy 0 < lo < hi < target_fs/2");
  }
  if (cfg.filter_order < 1) throw ConfigError("config: windowing.filter_order must be >= 1");
  return cfg;
}

signal::AugmentConfig RunConfig::augment() const {
  const Json& a = tree_.at("augment");
  signal::AugmentConfig cfg;
  cfg.apply_prob = field<double>(a, "apply_prob", "augment");
  cfg.jitter_alpha = field<double>(a, "jitter_alpha", "augment");
  cfg.noise_sigma = field<double>(a, "noise_sigma", "augment");
  cfg.max_shift = field<int>(a, "max_shift", "augment");
  if (cfg.apply_prob < 0.0 || cfg.apply_prob > 1.0) {
    throw ConfigError("config: augment.apply_prob must lie in [0, 1]");
  }
  return cfg;
}

profine::ModelConfig RunConfig::model() const {
  const Json& m = tree_.at("model");
  profine::ModelConfig cfg;
  cfg.adapter_hidden = field<int>(m, "adapter_hidden", "model");
  cfg.adapter_dropout = field<double>(m, "adapter_dropout", "model");
  cfg.encoder_layers = field<int>(m, "encoder_layers", "model");
  cfg.encoder_dim = field<int>(m, "encoder_dim", "model");
  cfg.embed_stride = field<int>(m, "embed_stride", "model");
  cfg.head_hidden = field<int>(m, "head_hidden", "model");
  cfg.head_dropout = field<double>(m, "head_dropout", "model");
  cfg.validate();
  return cfg;
}

RunConfig::PretrainSection RunConfig::pretrain() const {
  const Json& p = tree_.at("pretrain");
  PretrainSection out;
  out.cfg.smooth_l1_beta = field<double>(p, "smooth_l1_beta", "pretrain");
  out.cfg.lr = field<double>(p, "lr", "pretrain");
  out.cfg.weight_decay = field<double>(p, "weight_decay", "pretrain");
  out.cfg.warmup_epochs = field<int>(p, "warmup_epochs", "pretrain");
  out.cfg.max_epochs = field<int>(p, "max_epochs", "pretrain");
  out.cfg.min_epochs = field<int>(p, "min_epochs", "pretrain");
  out.cfg.early_stop_patience = field<int>(p, "early_stop_patience", "pretrain");
  out.cfg.plateau_factor = field<double>(p, "plateau_factor", "pretrain");
  out.cfg.plateau_patience = field<int>(p, "plateau_patience", "pretrain");
  out.cfg.batch_size = field<int>(p, "batch_size", "pretrain");
  out.cfg.grad_accum = field<int>(p, "grad_accum", "pretrain");
  out.cfg.seed = seed();
  // A low epoch override quietly wins over the floors so that, e.g.,
  // max_epochs 0 means "return the initialization".
  out.cfg.min_epochs = std::min(out.cfg.min_epochs, out.cfg.max_epochs);
  out.cfg.warmup_epochs = std::min(out.cfg.warmup_epochs,
                                   std::max(out.cfg.max_epochs - 1, 0));
  out.cfg.validate();
  out.val_fraction = field<double>(p, "val_fraction", "pretrain");
  if (!(out.val_fraction > 0.0) || !(out.val_fraction < 1.0)) {
    throw ConfigError("config: pretrain.val_fraction must lie in (0, 1)");
  }
  return out;
}

RunConfig::TrainSection RunConfig::train() const {
  const Json& t = tree_.at("train");
  TrainSection out;
  out.split = field<std::string>(t, "split", "train");
  if (out.split != "kfold" && out.split != "loso") {
    throw ConfigError("config: train.split must be kfold or loso");
  }
  out.k_folds = field<int>(t, "k_folds", "train");
  if (out.k_folds < 2) throw ConfigError("config: train.k_folds must be >= 2");
  out.kfold_val_fraction = field<double>(t, "kfold_val_fraction", "train");
  if (!(out.kfold_val_fraction > 0.0) || !(out.kfold_val_fraction < 1.0)) {
    throw ConfigError("config: train.kfold_val_fraction must lie in (0, 1)");
  }
  return out;
}

profine::ScenarioConfig RunConfig::scenario_config() const {
  const Json& t = tree_.at("train");
  std::string name = field<std::string>(t, "scenario", "train");
  if (name.size() != 1 || name[0] < 'A' || name[0] > 'C') {
    throw ConfigError("config: train.scenario must be A, B, or C");
  }
  profine::ScenarioConfig sc = profine::scenario_defaults(name[0], train().split);

  const Json& s = tree_.at("scenario");
  overlay<int>(s, "epochs", [&](int v) { sc.epochs = v; });
  overlay<int>(s, "batch_size", [&](int v) { sc.batch_size = v; });
  overlay<double>(s, "lr_head", [&](double v) { sc.lr_head = v; });
  overlay<double>(s, "lr_adapter", [&](double v) { sc.lr_adapter = v; });
  overlay<double>(s, "lr_encoder_top", [&](double v) { sc.lr_encoder_top = v; });
  overlay<double>(s, "lr_encoder_mid", [&](double v) { sc.lr_encoder_mid = v; });
  overlay<double>(s, "lr_encoder_bottom", [&](double v) { sc.lr_encoder_bottom = v; });
  overlay<int>(s, "unfreeze_top_k", [&](int v) { sc.unfreeze_top_k = v; });
  overlay<bool>(s, "adapter_trainable", [&](bool v) { sc.adapter_trainable = v; });
  overlay<double>(s, "focal_gamma", [&](double v) { sc.focal_gamma = v; });
  overlay<bool>(s, "auto_class_weights", [&](bool v) { sc.auto_class_weights = v; });
  overlay<bool>(s, "augment", [&](bool v) { sc.augment = v; });
  overlay<bool>(s, "depth_decay", [&](bool v) { sc.depth_decay = v; });
  overlay<double>(s, "eta_base", [&](double v) { sc.eta_base = v; });
  overlay<double>(s, "decay_xi", [&](double v) { sc.decay_xi = v; });
  overlay<double>(s, "weight_decay", [&](double v) { sc.weight_decay = v; });
  overlay<double>(s, "warmup_ratio", [&](double v) { sc.warmup_ratio = v; });
  overlay<int>(s, "early_stop_patience", [&](int v) { sc.early_stop_patience = v; });
  overlay<int>(s, "min_epochs", [&](int v) { sc.min_epochs = v; });
  sc.seed = seed();
  return sc;
}

std::uint64_t fold_seed(std::uint64_t master, std::size_t fold_index) {
  std::uint64_t buf[2] = {master, static_cast<std::uint64_t>(fold_index)};
  return fnv1a(buf, sizeof buf);
}

int fold_thread_budget(std::size_t n_folds) {
  const char* env = std::getenv("COGADAPT_THREADS");
  long n = 1;
  if (env != nullptr && *env != '\0') {
    char* end = nullptr;
    long parsed = std::strtol(env, &end, 10);
    if (end != nullptr && *end == '\0' && parsed > 0) n = parsed;
  }
  long cap = static_cast<long>(n_folds == 0 ? 1 : n_folds);
  return static_cast<int>(std::min(n, cap));
}

}  // namespace cogadapt::run
