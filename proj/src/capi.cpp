#include "cogadapt/cogadapt.h"

#include <exception>
#include <new>
#include <string>

#include "common/error.hpp"
#include "run/config.hpp"
#include "run/workflows.hpp"

namespace {

thread_local std::string g_last_error;

// Exceptions must not cross the C boundary; the two exception families map
// onto the two failure codes and everything unexpected counts as runtime.
template <typename Fn>
int guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return CGA_OK;
  } catch (const cogadapt::ConfigError& e) {
    g_last_error = e.what();
    return CGA_ERR_CONFIG;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return CGA_ERR_RUNTIME;
  } catch (...) {
    g_last_error = "unknown error";
    return CGA_ERR_RUNTIME;
  }
}

int null_arg(const char* what) {
  g_last_error = std::string(what) + " is NULL";
  return CGA_ERR_CONFIG;
}

}  // namespace

struct cga_config {
  cogadapt::run::RunConfig impl = cogadapt::run::RunConfig::defaults();
};

extern "C" {

const char* cga_version(void) { return "0.1.0"; }

const char* cga_last_error(void) { return g_last_error.c_str(); }

cga_config* cga_config_create(void) {
  try {
    return new cga_config();
  } catch (...) {
    return nullptr;
  }
}

void cga_config_destroy(cga_config* cfg) { delete cfg; }

int cga_config_load(cga_config* cfg, const char* path) {
  if (!cfg) return null_arg("cfg");
  if (!path) return null_arg("path");
  return guarded([&] { cfg->impl = cogadapt::run::RunConfig::load(path); });
}

int cga_config_set(cga_config* cfg, const char* key, const char* value) {
  if (!cfg) return null_arg("cfg");
  if (!key) return null_arg("key");
  if (!value) return null_arg("value");
  return guarded([&] { cfg->impl.set(key, value); });
}

int cga_config_save(const cga_config* cfg, const char* path) {
  if (!cfg) return null_arg("cfg");
  if (!path) return null_arg("path");
  return guarded([&] { cfg->impl.save(path); });
}

int cga_run_synth(const cga_config* cfg, int force) {
  if (!cfg) return null_arg("cfg");
  return guarded([&] { cogadapt::run::cmd_synth(cfg->impl, force != 0); });
}

int cga_run_preprocess(const cga_config* cfg, int force) {
  if (!cfg) return null_arg("cfg");
  return guarded([&] { cogadapt::run::cmd_preprocess(cfg->impl, force != 0); });
}

int cga_run_pretrain_adapter(const cga_config* cfg, int force) {
  if (!cfg) return null_arg("cfg");
  return guarded([&] { cogadapt::run::cmd_pretrain_adapter(cfg->impl, force != 0); });
}

int cga_run_reconstruct_eval(const cga_config* cfg, int force) {
  if (!cfg) return null_arg("cfg");
  return guarded([&] { cogadapt::run::cmd_reconstruct_eval(cfg->impl, force != 0); });
}

int cga_run_train(const cga_config* cfg, int force) {
  if (!cfg) return null_arg("cfg");
  return guarded([&] { cogadapt::run::cmd_train(cfg->impl, force != 0); });
}

int cga_run_report(const char* run_dir) {
  if (!run_dir) return null_arg("run_dir");
  return guarded([&] { cogadapt::run::cmd_report(run_dir); });
}

}  // extern "C"
