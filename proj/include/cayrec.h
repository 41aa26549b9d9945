/* cayrec — recovery of finite binary operations from partially observed
 * Cayley tables via flatness-regularized trilinear factorization, plus
 * matrix-completion baselines and algebraic oracles.
 *
 * C API: opaque handles and integer status codes. Every function that can
 * fail returns a cayrec_status; cayrec_last_error() describes the most
 * recent failure on the calling thread.
 */
#ifndef CAYREC_H
#define CAYREC_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef int32_t cayrec_status;

enum {
  CAYREC_OK = 0,
  CAYREC_ERR_INVALID_ARG = 1,
  CAYREC_ERR_SHAPE = 2,
  CAYREC_ERR_NOT_LATIN = 3,
  CAYREC_ERR_NOT_GROUP = 4,
  CAYREC_ERR_INVALID_ISOTOPY = 5,
  CAYREC_ERR_SIZE_LIMIT = 6,
  CAYREC_ERR_DIVERGED = 7,
  CAYREC_ERR_IO = 8,
  CAYREC_ERR_PROBE_FAILED = 9,
  CAYREC_ERR_VERIFY_FAILED = 10,
  CAYREC_ERR_INTERNAL = 99
};

/* Message for the last error on this thread; empty string if none. */
const char* cayrec_last_error(void);

/* ---- Cayley tables -------------------------------------------------- */

typedef struct cayrec_table cayrec_table;

cayrec_status cayrec_table_cyclic(int n, cayrec_table** out);
cayrec_status cayrec_table_dihedral(int m, cayrec_table** out);
cayrec_status cayrec_table_product(const cayrec_table* t1, const cayrec_table* t2,
                                   cayrec_table** out);
cayrec_status cayrec_table_random_latin(int n, uint64_t seed, cayrec_table** out);
cayrec_status cayrec_table_nonassociative(int n, uint64_t seed, cayrec_table** out);
/* format: "json" or "text" (see cayrec_table_write) */
cayrec_status cayrec_table_read_file(const char* path, cayrec_table** out);
void cayrec_table_free(cayrec_table* t);

int cayrec_table_order(const cayrec_table* t);
/* a o b; returns -1 on out-of-range indices */
int cayrec_table_cell(const cayrec_table* t, int a, int b);
int cayrec_table_is_latin(const cayrec_table* t);
int cayrec_table_is_associative(const cayrec_table* t);
/* requires a Latin table; returns 1, 0, or a negative status on error */
int cayrec_table_is_isotopic_to_group(const cayrec_table* t);

/* format: "json" -> {"n":..,"cells":[[..]]}, "text" -> order line + rows */
cayrec_status cayrec_table_write_file(const cayrec_table* t, const char* path,
                                      const char* format);

/* ---- Training ------------------------------------------------------- */

typedef struct cayrec_train_config {
  double lr;                 /* default 1e-2 */
  int steps_max;             /* default 50000 */
  double lambda;             /* flatness weight, default 0.05 */
  double lambda_warmup_frac; /* default 0.1 */
  double adam_beta1;         /* default 0.9 */
  double adam_beta2;         /* default 0.999 */
  double adam_eps;           /* default 1e-8 */
  double init_scale;         /* default 1.0 */
  double loss_tol;           /* default 1e-8 */
  int stability_window;      /* default 500 */
  int cooldown_steps;        /* default 3000 */
  int log_every;             /* default 100 */
} cayrec_train_config;

void cayrec_train_config_defaults(cayrec_train_config* cfg);

typedef struct cayrec_train_report {
  int converged;
  int steps_used;
  double recon_loss_final;
  double flatness_final;
  double bound_3n2;
  int exact;
  double cell_accuracy;
  double observed_accuracy;
  double unobserved_accuracy;
  double margin_min;
} cayrec_train_report;

/* Trains on m uniformly sampled cells (m = n*n for full observation; the
 * mask is drawn from mask_seed). Writes a result JSON to result_path when
 * non-NULL and a parameter checkpoint to checkpoint_path when non-NULL. */
cayrec_status cayrec_train_run(const cayrec_table* t, int m, uint64_t mask_seed,
                               const cayrec_train_config* cfg, uint64_t seed,
                               const char* result_path, const char* checkpoint_path,
                               cayrec_train_report* report);

/* ---- Experiments ---------------------------------------------------- */

/* Sample-complexity sweep over a JSON spec:
 *   {"tables":[{"family":"cyclic","n":6}, ...],
 *    "fractions":[0.3,0.4,...] or "m_grid":[12,18,...],
 *    "seeds":10, "seed_base":0, "config":{...overrides...},
 *    "method":"tensor" | "mc", "encodings":["ordinal","onehot"],
 *    "ranks":[2,6,12], "weight_decay":1e-3}
 * Appends rows to csv_path (with header when new), skipping rows already
 * present; writes per-(table,m) aggregates and m* to summary_path when
 * non-NULL. */
cayrec_status cayrec_sweep_run(const char* spec_json, const char* csv_path,
                               const char* summary_path);

/* Full-observation flatness probe with k restarts; writes the landscape
 * JSON {table_id,n,k,converged_count,best_flatness,bound,gap,sv_spread_max}
 * to out_path when non-NULL. out_json, when non-NULL, receives a malloc'd
 * copy of the JSON; free with cayrec_string_free. */
cayrec_status cayrec_landscape_run(const cayrec_table* t, const char* table_id,
                                   const cayrec_train_config* cfg, int k, uint64_t base_seed,
                                   const char* out_path, char** out_json);

/* Rank of the ordinal (or onehot) encoding, with the Gaussian-elimination
 * cross-check; returns rank or negative status. */
int cayrec_table_encoding_rank(const cayrec_table* t, const char* encoding);

/* Matrix-completion baseline on m sampled cells. */
cayrec_status cayrec_baseline_run(const cayrec_table* t, int m, uint64_t mask_seed,
                                  const char* encoding, int rank, double weight_decay,
                                  const cayrec_train_config* cfg, uint64_t seed,
                                  cayrec_train_report* report);

/* Oracle self-verification suite. Returns CAYREC_OK iff every check passes
 * (CAYREC_ERR_VERIFY_FAILED otherwise); the machine-readable report goes
 * to out_path / out_json as for cayrec_landscape_run. */
cayrec_status cayrec_verify(uint64_t seed, const char* out_path, char** out_json);

void cayrec_string_free(char* s);

#ifdef __cplusplus
}
#endif

#endif /* CAYREC_H */
