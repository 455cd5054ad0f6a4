#include "run/workflows.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <thread>
#include <utility>
#include <vector>

#include "bridge/pretrain.hpp"
#include "bridge/reconstruct.hpp"
#include "common/error.hpp"
#include "common/rng.hpp"
#include "common/text.hpp"
#include "dataio/checkpoint.hpp"
#include "dataio/csvio.hpp"
#include "dataio/manifest.hpp"
#include "dataio/synth.hpp"
#include "dataio/window_file.hpp"
#include "evalkit/metrics.hpp"
#include "evalkit/splits.hpp"
#include "leads/lead_math.hpp"
#include "profine/trainer.hpp"

namespace cogadapt::run {

namespace fsys = std::filesystem;

namespace {

// Substream indices for run-level randomness, fixed so artifacts are stable
// across releases: 11 = pretrain pair split, 12 = adapter init, 13 = model init.
constexpr std::uint64_t kPretrainSplitStream = 11;
constexpr std::uint64_t kPretrainInitStream = 12;
constexpr std::uint64_t kModelInitStream = 13;

void ensure_fresh_dir(const std::string& dir, bool force) {
  fsys::path p(dir);
  if (fsys::exists(p)) {
    if (!force) {
      throw ConfigError("output path " + dir + " already exists; pass --force to replace it");
    }
    fsys::remove_all(p);
  }
  std::error_code ec;
  fsys::create_directories(p, ec);
  if (ec) throw RuntimeError("cannot create " + dir + ": " + ec.message());
}

// For commands that share a run directory: the directory may exist, the named
// artifacts may not (unless force removes them first).
void claim_artifacts(const std::string& dir, const std::vector<std::string>& names,
                     bool force) {
  std::error_code ec;
  fsys::create_directories(dir, ec);
  if (ec) throw RuntimeError("cannot create " + dir + ": " + ec.message());
  for (const auto& name : names) {
    fsys::path p = fsys::path(dir) / name;
    if (!fsys::exists(p)) continue;
    if (!force) {
      throw ConfigError("artifact " + p.string() + " already exists; pass --force to replace it");
    }
    fsys::remove_all(p);
  }
}

std::ofstream open_csv(const std::string& path, const std::string& header) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw RuntimeError("cannot write " + path);
  out << header << "\n";
  return out;
}

std::string opt_cell(const std::optional<double>& v) {
  return v ? format_f64(*v) : std::string();
}

std::string zero_pad(std::size_t value, int width) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%0*zu", width, value);
  return buf;
}

// ---------------------------------------------------------------- windows --

std::vector<signal::EcgWindow> load_windows(const dataio::Manifest& man,
                                            const std::string& base_dir,
                                            const std::string& split_tag,
                                            bool require_label) {
  std::vector<signal::EcgWindow> out;
  for (const auto& entry : man.windows) {
    if (entry.split != split_tag) continue;
    fsys::path p = fsys::path(base_dir) / entry.file;
    signal::EcgWindow w = dataio::read_window(p.string());
    w.subject = entry.subject;
    w.t_start = entry.t_start;
    w.label = entry.label;
    if (require_label && !w.label) {
      throw ConfigError("window " + entry.file + " has no label; cannot train on it");
    }
    out.push_back(std::move(w));
  }
  return out;
}

struct PairSet {
  nn::Batch x;  // 3-lead inputs (z-scored at preprocess time)
  nn::Batch y;  // 12-lead raw targets
};

// Joins wearable windows (split `family`) with their 12-lead targets
// (split "target_<family>") on (subject, t_start). Both sides come off the
// same segmentation grid, so start times match exactly.
PairSet load_pairs(const dataio::Manifest& man, const std::string& base_dir,
                   const std::string& family) {
  std::map<std::pair<std::string, std::string>, const dataio::ManifestWindow*> targets;
  std::string target_tag = "target_" + family;
  for (const auto& entry : man.windows) {
    if (entry.split == target_tag) {
      targets[{entry.subject, format_f64(entry.t_start)}] = &entry;
    }
  }
  PairSet pairs;
  std::size_t unmatched = 0;
  for (const auto& entry : man.windows) {
    if (entry.split != family) continue;
    auto it = targets.find({entry.subject, format_f64(entry.t_start)});
    if (it == targets.end()) {
      ++unmatched;
      continue;
    }
    signal::EcgWindow wx = dataio::read_window((fsys::path(base_dir) / entry.file).string());
    signal::EcgWindow wy =
        dataio::read_window((fsys::path(base_dir) / it->second->file).string());
    if (wx.data.channels != 3 || wy.data.channels != 12) {
      throw RuntimeError("pair " + entry.file + ": expected 3-lead input and 12-lead target");
    }
    pairs.x.push_back(std::move(wx.data));
    pairs.y.push_back(std::move(wy.data));
  }
  if (pairs.x.empty()) {
    throw ConfigError("no (" + family + ", " + target_tag + ") window pairs in " +
                      base_dir + "; re-run the preprocess command");
  }
  if (unmatched > 0) {
    std::cout << "note: " << unmatched << " " << family
              << " windows lack a 12-lead target and were skipped\n";
  }
  return pairs;
}

// --------------------------------------------------- reconstruction stats --

// Streaming per-lead accumulator; the squared-difference sum is kept
// directly so near-perfect reconstructions do not cancel to noise.
struct LeadAccum {
  double sdd = 0.0, sx = 0.0, sy = 0.0, sxx = 0.0, syy = 0.0, sxy = 0.0;
  std::size_t n = 0;

  void add(double pred, double target) {
    double d = pred - target;
    sdd += d * d;
    sx += pred;
    sy += target;
    sxx += pred * pred;
    syy += target * target;
    sxy += pred * target;
    ++n;
  }
  double rmse() const {
    return n == 0 ? 0.0 : std::sqrt(sdd / static_cast<double>(n));
  }
  std::optional<double> cc() const {
    if (n < 2) return std::nullopt;
    double dn = static_cast<double>(n);
    double vx = sxx - sx * sx / dn;
    double vy = syy - sy * sy / dn;
    if (vx <= 0.0 || vy <= 0.0) return std::nullopt;
    return (sxy - sx * sy / dn) / std::sqrt(vx * vy);
  }
};

using MethodEval = std::pair<std::string, std::array<LeadAccum, 12>>;

template <typename Fn>
std::array<LeadAccum, 12> eval_reconstruction(const PairSet& pairs, Fn&& fwd) {
  std::array<LeadAccum, 12> acc;
  for (std::size_t i = 0; i < pairs.x.size(); ++i) {
    nn::Tensor2 pred = fwd(pairs.x[i]);
    const nn::Tensor2& tgt = pairs.y[i];
    for (int l = 0; l < 12; ++l) {
      for (int s = 0; s < tgt.samples; ++s) {
        acc[static_cast<std::size_t>(l)].add(pred.at(l, s), tgt.at(l, s));
      }
    }
  }
  return acc;
}

void write_reconstruction_csv(const std::string& path,
                              const std::vector<MethodEval>& methods) {
  std::ofstream out = open_csv(path, "lead,method,rmse,cc");
  for (int l = 0; l < 12; ++l) {
    for (const auto& m : methods) {
      const LeadAccum& a = m.second[static_cast<std::size_t>(l)];
      out << leads::kLeadNames[static_cast<std::size_t>(l)] << "," << m.first << ","
          << format_f64(a.rmse()) << "," << opt_cell(a.cc()) << "\n";
    }
  }
  if (!out) throw RuntimeError("write failed for " + path);
}

// Loads adapter leaves (parameters and norm statistics) from a checkpoint
// into a freshly shaped adapter; shape mismatches surface from read_checkpoint.
bridge::AdapterParams load_adapter(const std::string& path,
                                   const profine::ModelConfig& mcfg) {
  if (!fsys::exists(path)) {
    throw ConfigError("adapter checkpoint " + path +
                      " not found; run the pretrain-adapter command or set data.adapter_checkpoint");
  }
  Rng shape_rng(0);
  bridge::AdapterParams p =
      bridge::make_adapter(3, mcfg.adapter_hidden, 12, mcfg.adapter_dropout, shape_rng);
  std::vector<nn::ParamRef> params;
  std::vector<nn::BufferRef> buffers;
  bridge::collect_adapter(p, "adapter", "adapter", params, buffers);
  dataio::read_checkpoint(path, dataio::checkpoint_slots(params, buffers));
  return p;
}

const char* metric_name(profine::ValMetric m) {
  return m == profine::ValMetric::kAuroc ? "auroc" : "macro_f1";
}

}  // namespace

// -------------------------------------------------------------------------
void cmd_synth(const RunConfig& cfg, bool force) {
  dataio::SynthConfig scfg = cfg.synth();
  std::string out = cfg.out_dir();
  ensure_fresh_dir(out, force);

  dataio::Manifest man;
  man.dataset = "synth";
  Json truth;
  truth["mixing"] = scfg.resolved_mixing();
  truth["subjects"] = Json::array();

  for (int i = 0; i < scfg.n_subjects; ++i) {
    dataio::SubjectSynth s = dataio::synth_subject(scfg, i);
    std::string twelve_file = s.truth.subject + "_12lead.csv";
    std::string wear_file = s.truth.subject + "_wearable.csv";
    dataio::emit_csv(s.twelve, (fsys::path(out) / twelve_file).string());
    dataio::emit_csv(s.wearable, (fsys::path(out) / wear_file).string());
    man.subjects.push_back(s.truth.subject);
    man.recordings.push_back({twelve_file, s.truth.subject});
    man.recordings.push_back({wear_file, s.truth.subject});

    Json jt;
    jt["subject"] = s.truth.subject;
    jt["hr_bpm"] = s.truth.hr_bpm;
    jt["block_state"] = s.truth.block_state;
    jt["beat_times"] = s.truth.beat_times;
    jt["rr_intervals"] = s.truth.rr_intervals;
    truth["subjects"].push_back(std::move(jt));
  }
  dataio::write_manifest(man, (fsys::path(out) / "manifest.json").string());
  {
    std::ofstream tf((fsys::path(out) / "truth.json").string(), std::ios::trunc);
    if (!tf) throw RuntimeError("cannot write truth.json in " + out);
    tf << truth.dump(2) << "\n";
  }
  cfg.save((fsys::path(out) / "config_synth.json").string());
  std::cout << "synth: wrote " << scfg.n_subjects << " subjects ("
            << format_f64(scfg.minutes_per_subject) << " min each, fs "
            << format_f64(scfg.fs) << ") to " << out << "\n";
}

// -------------------------------------------------------------------------
namespace {

struct FamilyStats {
  std::size_t windows = 0;
  std::size_t per_class[2] = {0, 0};
  std::size_t discarded = 0;
};

template <typename F>
auto run_stage(const char* stage, const std::string& who, F&& f) {
  try {
    return f();
  } catch (const std::exception& e) {
    throw RuntimeError(std::string("preprocess stage ") + stage + " (" + who +
                       "): " + e.what());
  }
}

}  // namespace

void cmd_preprocess(const RunConfig& cfg, bool force) {
  signal::WindowingConfig wcfg = cfg.windowing();
  std::string in_dir = cfg.dataset_dir();
  if (in_dir.empty()) throw ConfigError("data.dataset_dir is empty; point it at a dataset");
  dataio::Manifest src = dataio::read_manifest((fsys::path(in_dir) / "manifest.json").string());

  std::string out = cfg.out_dir();
  ensure_fresh_dir(out, force);

  dataio::Manifest wm;
  wm.dataset = src.dataset + "-windows";
  wm.subjects = src.subjects;

  std::map<std::string, FamilyStats> stats;
  const std::pair<const char*, double> families[2] = {
      {"train", wcfg.train_stride_seconds}, {"eval", wcfg.eval_stride_seconds}};

  for (const auto& rentry : src.recordings) {
    std::string who = rentry.subject + ":" + rentry.file;
    signal::Recording rec = run_stage("ingest", who, [&] {
      return dataio::ingest_csv((fsys::path(in_dir) / rentry.file).string());
    });
    rec = run_stage("resample", who, [&] { return signal::resample(rec, wcfg.target_fs); });
    rec = run_stage("bandpass", who, [&] {
      return signal::bandpass(rec, wcfg.band_lo_hz, wcfg.band_hi_hz, wcfg.filter_order);
    });
    rec = run_stage("clean", who, [&] { return signal::clean(rec, wcfg.window_seconds); });

    bool wearable = rec.leads.size() == 3;
    if (!wearable && rec.leads.size() != 12) {
      throw ConfigError("recording " + rentry.file + " has " +
                        std::to_string(rec.leads.size()) +
                        " leads; expected 3 (wearable) or 12 (targets)");
    }
    if (wearable && rec.chest_reference == "RL") {
      rec = run_stage("wct_rereference", who,
                      [&] { return signal::wct_rereference_recording(rec); });
    }

    std::size_t produced = 0;
    for (const auto& [family, stride] : families) {
      std::string tag = wearable ? family : std::string("target_") + family;
      FamilyStats& fstat = stats[tag];
      std::vector<signal::EcgWindow> wins;
      if (wearable) {
        signal::LabelStats ls;
        wins = run_stage("segment+label", who, [&] {
          return signal::segment_labeled(rec, wcfg.window_seconds, stride, &ls);
        });
        run_stage("normalize", who, [&] {
          for (auto& w : wins) signal::normalize_window(w, wcfg.normalize_eps);
          return 0;
        });
        fstat.discarded += ls.discarded;
        fstat.per_class[0] += ls.per_class[0];
        fstat.per_class[1] += ls.per_class[1];
      } else {
        wins = run_stage("segment", who,
                         [&] { return signal::segment(rec, wcfg.window_seconds, stride); });
      }
      for (std::size_t k = 0; k < wins.size(); ++k) {
        std::string file = rentry.subject + "_" + tag + "_" + zero_pad(k, 5) + ".cgw";
        dataio::write_window((fsys::path(out) / file).string(), wins[k]);
        dataio::ManifestWindow mw;
        mw.file = file;
        mw.subject = rentry.subject;
        mw.t_start = wins[k].t_start;
        mw.label = wins[k].label;
        mw.split = tag;
        wm.windows.push_back(std::move(mw));
      }
      fstat.windows += wins.size();
      produced += wins.size();
    }
    if (produced == 0) {
      std::cout << "warning: " << rentry.file
                << " yields no windows (shorter than one window?)\n";
    }
  }

  dataio::write_manifest(wm, (fsys::path(out) / "manifest.json").string());
  {
    std::ofstream sf = open_csv((fsys::path(out) / "preprocess_stats.csv").string(),
                                "split,windows,class0,class1,unlabeled_discarded");
    for (const auto& [tag, st] : stats) {
      bool labeled = tag == "train" || tag == "eval";
      sf << tag << "," << st.windows << ","
         << (labeled ? std::to_string(st.per_class[0]) : std::string()) << ","
         << (labeled ? std::to_string(st.per_class[1]) : std::string()) << ","
         << (labeled ? std::to_string(st.discarded) : std::string()) << "\n";
    }
  }
  cfg.save((fsys::path(out) / "config_preprocess.json").string());

  std::cout << "preprocess: ";
  bool first = true;
  for (const auto& [tag, st] : stats) {
    if (!first) std::cout << ", ";
    first = false;
    std::cout << tag << " " << st.windows;
    if (tag == "train" || tag == "eval") {
      std::cout << " (class0 " << st.per_class[0] << ", class1 " << st.per_class[1]
                << ", unlabeled " << st.discarded << ")";
    }
  }
  std::cout << " -> " << out << "\n";
}

// -------------------------------------------------------------------------
void cmd_pretrain_adapter(const RunConfig& cfg, bool force) {
  std::string win_dir = cfg.windows_dir();
  if (win_dir.empty()) throw ConfigError("data.windows_dir is empty; run the preprocess command first");
  dataio::Manifest man = dataio::read_manifest((fsys::path(win_dir) / "manifest.json").string());

  RunConfig::PretrainSection ps = cfg.pretrain();
  profine::ModelConfig mcfg = cfg.model();
  std::string out = cfg.out_dir();
  claim_artifacts(out,
                  {"adapter.cgck", "pretrain_log.csv", "reconstruction_pretrain_val.csv",
                   "config_pretrain.json"},
                  force);

  PairSet pairs = load_pairs(man, win_dir, "train");
  std::size_t n = pairs.x.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng split_rng = Rng(cfg.seed()).substream(kPretrainSplitStream);
  shuffle_in_place(order, split_rng);
  auto n_val = static_cast<std::size_t>(
      std::llround(ps.val_fraction * static_cast<double>(n)));
  n_val = std::clamp<std::size_t>(n_val, 1, n - 1);

  nn::Batch tx, ty, vx, vy;
  for (std::size_t i = 0; i < n; ++i) {
    bool val = i < n_val;
    (val ? vx : tx).push_back(std::move(pairs.x[order[i]]));
    (val ? vy : ty).push_back(std::move(pairs.y[order[i]]));
  }

  Rng init_rng = Rng(cfg.seed()).substream(kPretrainInitStream);
  bridge::AdapterParams init =
      bridge::make_adapter(3, mcfg.adapter_hidden, 12, mcfg.adapter_dropout, init_rng);
  bridge::PretrainResult res = bridge::pretrain_adapter(init, tx, ty, vx, vy, ps.cfg);

  std::vector<nn::ParamRef> params;
  std::vector<nn::BufferRef> buffers;
  bridge::collect_adapter(res.params, "adapter", "adapter", params, buffers);
  dataio::CheckpointMeta meta;
  meta.scenario = "pretrain";
  meta.epoch = res.best_epoch;
  meta.val_metric = res.best_val_loss;
  dataio::write_checkpoint((fsys::path(out) / "adapter.cgck").string(), meta,
                           dataio::checkpoint_leaves(params, buffers));

  {
    std::ofstream lf = open_csv((fsys::path(out) / "pretrain_log.csv").string(),
                                "epoch,train_loss,val_loss,lr");
    for (const auto& row : res.log) {
      lf << row.epoch << "," << format_f64(row.train_loss) << ","
         << format_f64(row.val_loss) << "," << format_f64(row.lr) << "\n";
    }
  }

  std::size_t n_train_pairs = tx.size(), n_val_pairs = vx.size();
  PairSet val_pairs;
  val_pairs.x = std::move(vx);
  val_pairs.y = std::move(vy);
  std::vector<MethodEval> methods;
  methods.push_back({"adapter", eval_reconstruction(val_pairs, [&](const nn::Tensor2& x) {
                       nn::Batch one{x};
                       return bridge::adapter_forward_eval(res.params, one)[0];
                     })});
  write_reconstruction_csv((fsys::path(out) / "reconstruction_pretrain_val.csv").string(),
                           methods);
  cfg.save((fsys::path(out) / "config_pretrain.json").string());

  std::cout << "pretrain-adapter: " << n_train_pairs << " train / " << n_val_pairs
            << " val pairs, best epoch " << res.best_epoch << ", val loss "
            << format_f64(res.best_val_loss) << " -> " << out << "/adapter.cgck\n";
}

// -------------------------------------------------------------------------
void cmd_reconstruct_eval(const RunConfig& cfg, bool force) {
  std::string win_dir = cfg.windows_dir();
  if (win_dir.empty()) throw ConfigError("data.windows_dir is empty; run the preprocess command first");
  dataio::Manifest man = dataio::read_manifest((fsys::path(win_dir) / "manifest.json").string());

  profine::ModelConfig mcfg = cfg.model();
  std::string out = cfg.out_dir();
  claim_artifacts(out, {"reconstruction_train.csv", "reconstruction_eval.csv",
                        "config_reconstruct.json"},
                  force);

  bridge::FixedLeadTransform fixed = bridge::load_fixed_transform(cfg.fixed_transform_path());
  std::string ckpt = cfg.adapter_checkpoint();
  if (ckpt.empty()) ckpt = (fsys::path(out) / "adapter.cgck").string();
  bridge::AdapterParams adapter = load_adapter(ckpt, mcfg);

  PairSet train_pairs = load_pairs(man, win_dir, "train");
  PairSet eval_pairs = load_pairs(man, win_dir, "eval");
  bridge::FixedLeadTransform ls = bridge::least_squares_fit(train_pairs.x, train_pairs.y);

  auto evaluate = [&](const PairSet& pairs) {
    std::vector<MethodEval> methods;
    methods.push_back({fixed.name, eval_reconstruction(pairs, [&](const nn::Tensor2& x) {
                         return bridge::apply_fixed_transform(fixed, x);
                       })});
    methods.push_back({"least_squares", eval_reconstruction(pairs, [&](const nn::Tensor2& x) {
                         return bridge::apply_fixed_transform(ls, x);
                       })});
    methods.push_back({"adapter", eval_reconstruction(pairs, [&](const nn::Tensor2& x) {
                         nn::Batch one{x};
                         return bridge::adapter_forward_eval(adapter, one)[0];
                       })});
    return methods;
  };

  write_reconstruction_csv((fsys::path(out) / "reconstruction_train.csv").string(),
                           evaluate(train_pairs));
  write_reconstruction_csv((fsys::path(out) / "reconstruction_eval.csv").string(),
                           evaluate(eval_pairs));
  cfg.save((fsys::path(out) / "config_reconstruct.json").string());
  std::cout << "reconstruct-eval: " << train_pairs.x.size() << " train / "
            << eval_pairs.x.size() << " eval pairs -> " << out
            << "/reconstruction_{train,eval}.csv\n";
}

// -------------------------------------------------------------------------
namespace {

struct FoldOutcome {
  std::string tag;
  std::size_t n_train = 0, n_val = 0, n_test = 0;
  int best_epoch = -1;
  double val_best = 0.0;
  double accuracy = 0.0;
  double f1 = 0.0;
  std::optional<double> auc;
};

std::vector<signal::EcgWindow> take(const std::vector<signal::EcgWindow>& all,
                                    const std::vector<std::size_t>& idx) {
  std::vector<signal::EcgWindow> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(all[i]);
  return out;
}

std::vector<signal::EcgWindow> by_subject(const std::vector<signal::EcgWindow>& all,
                                          const std::set<std::string>& subjects) {
  std::vector<signal::EcgWindow> out;
  for (const auto& w : all) {
    if (subjects.count(w.subject) != 0) out.push_back(w);
  }
  return out;
}

void write_summary_row(std::ofstream& out, const std::string& metric,
                       const std::vector<double>& values) {
  out << metric << "," << values.size();
  if (values.empty()) {
    out << ",,,,,,,\n";
    return;
  }
  nn::Vec v(values.begin(), values.end());
  evalkit::SubjectSummary s = evalkit::subject_summary(v);
  out << "," << format_f64(s.mean) << "," << format_f64(s.stddev) << ","
      << format_f64(s.median) << "," << format_f64(s.q1) << "," << format_f64(s.q3)
      << "," << format_f64(s.whisker_low) << "," << format_f64(s.whisker_high) << "\n";
}

}  // namespace

void cmd_train(const RunConfig& cfg, bool force) {
  std::string win_dir = cfg.windows_dir();
  if (win_dir.empty()) throw ConfigError("data.windows_dir is empty; run the preprocess command first");
  dataio::Manifest man = dataio::read_manifest((fsys::path(win_dir) / "manifest.json").string());

  RunConfig::TrainSection ts = cfg.train();
  profine::ModelConfig mcfg = cfg.model();
  profine::ScenarioConfig sc0 = cfg.scenario_config();
  sc0.validate(mcfg.encoder_layers);
  signal::AugmentConfig aug = cfg.augment();

  std::string suffix = std::string(1, sc0.scenario) + "_" + ts.split;
  std::string out = cfg.out_dir();
  std::string folds_dir = "folds_" + suffix;
  claim_artifacts(out,
                  {"metrics_" + suffix + ".csv", "summary_" + suffix + ".csv",
                   "distribution_" + suffix + ".csv", "config_train_" + suffix + ".json",
                   folds_dir},
                  force);
  fsys::create_directories(fsys::path(out) / folds_dir);

  std::vector<signal::EcgWindow> dense = load_windows(man, win_dir, "train", true);
  std::vector<signal::EcgWindow> coarse = load_windows(man, win_dir, "eval", true);
  if (dense.empty()) throw ConfigError("no labeled train windows in " + win_dir);

  evalkit::SplitPlan plan;
  if (ts.split == "kfold") {
    std::vector<int> labels;
    labels.reserve(dense.size());
    for (const auto& w : dense) labels.push_back(*w.label);
    plan = evalkit::kfold_split(labels, ts.k_folds, cfg.seed(), ts.kfold_val_fraction);
  } else {
    std::vector<std::string> subjects;
    subjects.reserve(dense.size());
    for (const auto& w : dense) subjects.push_back(w.subject);
    plan = evalkit::loso_split(subjects);
  }
  std::size_t n_folds = plan.folds.size();

  // Shared starting point: one init for every fold; the pretrained adapter
  // is loaded in when a checkpoint is configured.
  Rng model_rng = Rng(cfg.seed()).substream(kModelInitStream);
  profine::Model init = profine::make_model(mcfg, model_rng);
  if (!cfg.adapter_checkpoint().empty()) {
    init.adapter = load_adapter(cfg.adapter_checkpoint(), mcfg);
  }

  std::vector<FoldOutcome> outcomes(n_folds);
  auto run_fold = [&](std::size_t fi) {
    const evalkit::Fold& fold = plan.folds[fi];
    try {
      std::vector<signal::EcgWindow> train_w = take(dense, fold.train);
      std::vector<signal::EcgWindow> val_w, test_w;
      if (ts.split == "kfold") {
        val_w = take(dense, fold.val);
        test_w = take(dense, fold.test);
      } else {
        std::set<std::string> val_subjects;
        for (std::size_t i : fold.val) val_subjects.insert(dense[i].subject);
        val_w = by_subject(coarse, val_subjects);
        test_w = by_subject(coarse, {fold.tag});
      }
      if (train_w.empty() || val_w.empty() || test_w.empty()) {
        throw RuntimeError("empty train/val/test window set");
      }

      profine::ScenarioConfig sc = sc0;
      sc.seed = fold_seed(cfg.seed(), fi);
      profine::TrainResult res = profine::train_scenario(init, train_w, val_w, sc, aug);

      profine::Predictions pred = profine::predict(res.best, test_w);
      FoldOutcome& o = outcomes[fi];
      o.tag = fold.tag;
      o.n_train = train_w.size();
      o.n_val = val_w.size();
      o.n_test = test_w.size();
      o.best_epoch = res.best_epoch;
      o.val_best = res.best_val;
      o.accuracy = evalkit::accuracy(pred.truth, pred.pred);
      o.f1 = evalkit::macro_f1(pred.truth, pred.pred);
      nn::Vec scores(pred.score.begin(), pred.score.end());
      o.auc = evalkit::auroc(pred.truth, scores);

      std::vector<nn::ParamRef> params;
      std::vector<nn::BufferRef> buffers;
      profine::collect_model(res.best, params, buffers);
      dataio::CheckpointMeta meta;
      meta.scenario = std::string(1, sc.scenario);
      meta.epoch = res.best_epoch;
      meta.val_metric = res.best_val;
      dataio::write_checkpoint(
          (fsys::path(out) / folds_dir / (fold.tag + ".cgck")).string(), meta,
          dataio::checkpoint_leaves(params, buffers));
    } catch (const std::exception& e) {
      throw RuntimeError("fold " + fold.tag + ": " + e.what());
    }
  };

  int budget = fold_thread_budget(n_folds);
  if (budget <= 1) {
    for (std::size_t fi = 0; fi < n_folds; ++fi) run_fold(fi);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(n_folds);
    auto worker = [&] {
      while (true) {
        std::size_t fi = next.fetch_add(1);
        if (fi >= n_folds) break;
        try {
          run_fold(fi);
        } catch (...) {
          errors[fi] = std::current_exception();
        }
      }
    };
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(budget));
    for (int b = 0; b < budget; ++b) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    for (auto& err : errors) {
      if (err) std::rethrow_exception(err);
    }
  }

  const char* vm = metric_name(sc0.val_metric());
  {
    std::ofstream mf = open_csv(
        (fsys::path(out) / ("metrics_" + suffix + ".csv")).string(),
        "fold,tag,n_train,n_val,n_test,best_epoch,val_metric,val_best,accuracy,macro_f1,auroc");
    for (std::size_t fi = 0; fi < n_folds; ++fi) {
      const FoldOutcome& o = outcomes[fi];
      mf << fi << "," << o.tag << "," << o.n_train << "," << o.n_val << "," << o.n_test
         << "," << o.best_epoch << "," << vm << "," << format_f64(o.val_best) << ","
         << format_f64(o.accuracy) << "," << format_f64(o.f1) << "," << opt_cell(o.auc)
         << "\n";
    }
  }
  {
    std::ofstream df = open_csv((fsys::path(out) / ("distribution_" + suffix + ".csv")).string(),
                                "tag,accuracy,macro_f1,auroc");
    for (const auto& o : outcomes) {
      df << o.tag << "," << format_f64(o.accuracy) << "," << format_f64(o.f1) << ","
         << opt_cell(o.auc) << "\n";
    }
  }
  {
    std::ofstream sf = open_csv(
        (fsys::path(out) / ("summary_" + suffix + ".csv")).string(),
        "metric,n,mean,stddev,median,q1,q3,whisker_low,whisker_high");
    std::vector<double> acc, f1, auc;
    for (const auto& o : outcomes) {
      acc.push_back(o.accuracy);
      f1.push_back(o.f1);
      if (o.auc) auc.push_back(*o.auc);
    }
    write_summary_row(sf, "accuracy", acc);
    write_summary_row(sf, "macro_f1", f1);
    write_summary_row(sf, "auroc", auc);
  }
  cfg.save((fsys::path(out) / ("config_train_" + suffix + ".json")).string());

  for (std::size_t fi = 0; fi < n_folds; ++fi) {
    const FoldOutcome& o = outcomes[fi];
    std::cout << "fold " << o.tag << ": accuracy " << format_f64(o.accuracy)
              << ", macro_f1 " << format_f64(o.f1);
    if (o.auc) std::cout << ", auroc " << format_f64(*o.auc);
    std::cout << " (best epoch " << o.best_epoch << ", val " << vm << " "
              << format_f64(o.val_best) << ")\n";
  }
  std::cout << "train: scenario " << sc0.scenario << " " << ts.split << ", " << n_folds
            << " folds -> " << out << "\n";
}

// -------------------------------------------------------------------------
namespace {

std::vector<std::vector<std::string>> read_csv_rows(const fsys::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    std::string t = trim(line);
    if (t.empty()) continue;
    rows.push_back(split_csv_line(t));
  }
  return rows;
}

void print_table(const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> width;
  for (const auto& row : rows) {
    if (row.size() > width.size()) width.resize(row.size(), 0);
    for (std::size_t c = 0; c < row.size(); ++c) {
      width[c] = std::max(width[c], row[c].size());
    }
  }
  for (const auto& row : rows) {
    std::string line;
    for (std::size_t c = 0; c < row.size(); ++c) {
      std::string cell = row[c];
      cell.resize(width[c], ' ');
      line += cell;
      if (c + 1 < row.size()) line += "  ";
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    std::cout << line << "\n";
  }
}

}  // namespace

void cmd_report(const std::string& run_dir) {
  if (!fsys::is_directory(run_dir)) {
    throw ConfigError("run directory " + run_dir + " does not exist");
  }
  std::vector<std::string> names;
  for (const auto& e : fsys::directory_iterator(run_dir)) {
    if (e.is_regular_file()) names.push_back(e.path().filename().string());
  }
  std::sort(names.begin(), names.end());

  std::vector<std::string> summaries, reconstructions;
  for (const auto& n : names) {
    if (n.size() > 4 && n.substr(n.size() - 4) == ".csv") {
      if (n.rfind("summary_", 0) == 0) summaries.push_back(n);
      if (n.rfind("reconstruction", 0) == 0) reconstructions.push_back(n);
    }
  }
  if (summaries.empty() && reconstructions.empty()) {
    throw ConfigError("no summary_*.csv or reconstruction*.csv in " + run_dir +
                      "; run the train, pretrain-adapter, or reconstruct-eval command first");
  }

  if (!summaries.empty()) {
    // Classification grid: one row per (scenario, split), mean values verbatim.
    std::vector<std::vector<std::string>> grid{
        {"scenario", "split", "accuracy", "macro_f1", "auroc"}};
    for (const auto& file : summaries) {
      std::string stem = file.substr(8, file.size() - 12);  // "<scenario>_<split>"
      auto us = stem.find('_');
      std::string scenario = us == std::string::npos ? stem : stem.substr(0, us);
      std::string split = us == std::string::npos ? "" : stem.substr(us + 1);
      std::map<std::string, std::string> mean;
      auto rows = read_csv_rows(fsys::path(run_dir) / file);
      for (std::size_t r = 1; r < rows.size(); ++r) {
        if (rows[r].size() >= 3) mean[rows[r][0]] = rows[r][2];
      }
      grid.push_back({scenario, split, mean["accuracy"], mean["macro_f1"], mean["auroc"]});
    }
    std::cout << "classification (fold means)\n";
    print_table(grid);

    for (const auto& file : summaries) {
      std::cout << "\n" << file << "\n";
      print_table(read_csv_rows(fsys::path(run_dir) / file));
    }
  }

  for (const auto& file : reconstructions) {
    std::cout << "\n" << file << "\n";
    print_table(read_csv_rows(fsys::path(run_dir) / file));
  }
}

}  // namespace cogadapt::run
