// Command-line front end. Talks to the pipeline exclusively through the C
// API so the CLI doubles as a smoke test of the public ABI.
#include <cstdio>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cogadapt/cogadapt.h"

namespace {

struct CommonOpts {
  std::string config;
  std::string out;
  std::string seed;  // kept as text; the config layer validates it
  std::vector<std::string> sets;
  bool force = false;
};

void add_common(CLI::App* cmd, CommonOpts* o) {
  cmd->add_option("--config", o->config, "JSON config overlaid on built-in defaults");
  cmd->add_option("--seed", o->seed, "master seed (overrides config)");
  cmd->add_option("--out", o->out, "output directory (overrides config)");
  cmd->add_option("--set", o->sets,
                  "dotted-key override, e.g. --set synth.n_subjects=6 (repeatable, "
                  "applied last)");
  cmd->add_flag("--force", o->force, "replace existing artifacts");
}

int fail(int rc) {
  std::fprintf(stderr, "error: %s\n", cga_last_error());
  return rc;
}

// Builds the effective config: file, then direct flags, then --set pairs.
int apply(cga_config* cfg, const CommonOpts& o, const std::string& scenario,
          const std::string& split) {
  int rc = 0;
  if (!o.config.empty() && (rc = cga_config_load(cfg, o.config.c_str())) != 0) return rc;
  if (!o.seed.empty() && (rc = cga_config_set(cfg, "seed", o.seed.c_str())) != 0) return rc;
  if (!o.out.empty() && (rc = cga_config_set(cfg, "out_dir", o.out.c_str())) != 0) return rc;
  if (!scenario.empty() &&
      (rc = cga_config_set(cfg, "train.scenario", scenario.c_str())) != 0) {
    return rc;
  }
  if (!split.empty() && (rc = cga_config_set(cfg, "train.split", split.c_str())) != 0) {
    return rc;
  }
  for (const auto& kv : o.sets) {
    auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) {
      std::fprintf(stderr, "error: --set expects key=value, got \"%s\"\n", kv.c_str());
      return CGA_ERR_CONFIG;
    }
    rc = cga_config_set(cfg, kv.substr(0, eq).c_str(), kv.substr(eq + 1).c_str());
    if (rc != 0) return rc;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cogadapt: 3-lead to 12-lead ECG reconstruction and scenario fine-tuning"};
  app.require_subcommand(1);
  app.set_version_flag("--version", [] { return std::string(cga_version()); });

  CommonOpts synth_o, prep_o, pre_o, rec_o, train_o;
  std::string scenario, split, report_dir;

  CLI::App* c_synth = app.add_subcommand("synth", "generate a synthetic paired dataset");
  add_common(c_synth, &synth_o);
  CLI::App* c_prep =
      app.add_subcommand("preprocess", "resample, filter, window, and label a dataset");
  add_common(c_prep, &prep_o);
  CLI::App* c_pre = app.add_subcommand("pretrain-adapter",
                                       "fit the lead adapter on paired windows");
  add_common(c_pre, &pre_o);
  CLI::App* c_rec = app.add_subcommand(
      "reconstruct-eval", "compare fixed, least-squares, and adapter reconstruction");
  add_common(c_rec, &rec_o);
  CLI::App* c_train =
      app.add_subcommand("train", "scenario fine-tuning under a split protocol");
  add_common(c_train, &train_o);
  c_train->add_option("--scenario", scenario, "A, B, or C (overrides config)");
  c_train->add_option("--split", split, "kfold or loso (overrides config)");
  CLI::App* c_report = app.add_subcommand("report", "print the tables of a run directory");
  c_report->add_option("dir", report_dir, "run directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : CGA_ERR_CONFIG;
  }

  if (app.got_subcommand(c_report)) {
    int rc = cga_run_report(report_dir.c_str());
    return rc == 0 ? 0 : fail(rc);
  }

  const CommonOpts* opts = nullptr;
  int (*runner)(const cga_config*, int) = nullptr;
  if (app.got_subcommand(c_synth)) {
    opts = &synth_o;
    runner = cga_run_synth;
  } else if (app.got_subcommand(c_prep)) {
    opts = &prep_o;
    runner = cga_run_preprocess;
  } else if (app.got_subcommand(c_pre)) {
    opts = &pre_o;
    runner = cga_run_pretrain_adapter;
  } else if (app.got_subcommand(c_rec)) {
    opts = &rec_o;
    runner = cga_run_reconstruct_eval;
  } else {
    opts = &train_o;
    runner = cga_run_train;
  }

  cga_config* cfg = cga_config_create();
  if (!cfg) {
    std::fprintf(stderr, "error: out of memory\n");
    return CGA_ERR_RUNTIME;
  }
  int rc = apply(cfg, *opts, app.got_subcommand(c_train) ? scenario : std::string(),
                 app.got_subcommand(c_train) ? split : std::string());
  if (rc == 0) rc = runner(cfg, opts->force ? 1 : 0);
  cga_config_destroy(cfg);
  return rc == 0 ? 0 : fail(rc);
}
