/* C interface to the cogadapt pipeline.
 *
 * Every entry point returns a status code; on failure the handle-free
 * cga_last_error() returns a message for the calling thread. Configuration
 * lives behind an opaque handle built from library defaults, optionally
 * overlaid with a JSON file and then with individual dotted-key overrides.
 */
#ifndef COGADAPT_COGADAPT_H_
#define COGADAPT_COGADAPT_H_

#ifdef __cplusplus
extern "C" {
#endif

enum cga_status {
  CGA_OK = 0,
  CGA_ERR_CONFIG = 2,  /* the request was bad: unknown key, bad value, missing input */
  CGA_ERR_RUNTIME = 3  /* the work failed: I/O, numerics, corrupt artifact */
};

typedef struct cga_config cga_config;

const char* cga_version(void);

/* Message from the most recent failing call on this thread; never NULL. */
const char* cga_last_error(void);

/* Library defaults (desk-scale). NULL only on allocation failure. */
cga_config* cga_config_create(void);
void cga_config_destroy(cga_config* cfg);

/* Replaces cfg with defaults + the JSON file at path. */
int cga_config_load(cga_config* cfg, const char* path);

/* Dotted-key override, e.g. ("synth.n_subjects", "6"). String-typed keys
 * take the value verbatim; everything else is parsed as JSON. */
int cga_config_set(cga_config* cfg, const char* key, const char* value);

/* Writes the fully resolved configuration as JSON. */
int cga_config_save(const cga_config* cfg, const char* path);

/* Pipeline stages. Each writes its artifacts under the configured output
 * directory and refuses to overwrite existing ones unless force is nonzero. */
int cga_run_synth(const cga_config* cfg, int force);
int cga_run_preprocess(const cga_config* cfg, int force);
int cga_run_pretrain_adapter(const cga_config* cfg, int force);
int cga_run_reconstruct_eval(const cga_config* cfg, int force);
int cga_run_train(const cga_config* cfg, int force);

/* Prints the tables recorded in an existing run directory to stdout. */
int cga_run_report(const char* run_dir);

#ifdef __cplusplus
}
#endif

#endif /* COGADAPT_COGADAPT_H_ */
