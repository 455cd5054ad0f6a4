#pragma once

#include <string>

#include "run/config.hpp"

namespace cogadapt::run {

// One function per CLI subcommand. Each writes its artifacts under
// cfg.out_dir() plus a resolved-config echo, refuses to overwrite existing
// artifacts unless force is set, and is byte-for-byte reproducible for a
// fixed seed. ConfigError means the request was bad; RuntimeError means the
// work failed.

// Dataset directory: per-subject 12-lead and wearable CSVs, manifest.json,
// truth.json (generator ground truth).
void cmd_synth(const RunConfig& cfg, bool force);

// dataset_dir -> window set: resample, bandpass, clean, re-reference,
// segment, label, normalize, in that order; errors name the failing stage.
// Wearable windows are stored z-scored under split tags train/eval; 12-lead
// target windows are stored raw under target_train/target_eval.
void cmd_preprocess(const RunConfig& cfg, bool force);

// windows_dir -> adapter.cgck + pretrain_log.csv + per-lead validation
// reconstruction CSV. Pairs are split 80/20 at window level by the seed.
void cmd_pretrain_adapter(const RunConfig& cfg, bool force);

// Compares fixed transform, least squares (fit on train pairs), and the
// pretrained adapter; writes reconstruction_{train,eval}.csv with columns
// lead,method,rmse,cc.
void cmd_reconstruct_eval(const RunConfig& cfg, bool force);

// Scenario fine-tuning under the configured split protocol; one checkpoint
// per fold plus metrics/summary/distribution CSVs suffixed _<scenario>_<split>.
// COGADAPT_THREADS caps parallel folds; results are fold-order deterministic.
void cmd_train(const RunConfig& cfg, bool force);

// Re-reads the CSVs in run_dir and prints the metric grid and reconstruction
// tables. Values are printed verbatim, never recomputed.
void cmd_report(const std::string& run_dir);

}  // namespace cogadapt::run
