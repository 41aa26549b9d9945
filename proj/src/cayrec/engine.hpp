#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "cayrec/model.hpp"

namespace cayrec {

// Full-batch adaptive-moment descent on recon_loss + lambda(t) * flatness.
//
// lambda schedule: linear warmup 0 -> lambda over warmup_frac * steps_max
// steps, constant until the decoded table has been stable for
// stability_window steps (or half the step budget has elapsed), then a
// linear cooldown to 0 over cooldown_steps, then a polish phase at
// lambda = 0 with exponentially decaying learning rate. The cooldown is
// required to reach loss_tol: at fixed lambda the loss equilibrates at
// O(lambda^2) because the flatness gradient does not vanish on the
// exact-fit manifold.
struct TrainConfig {
  double lr = 1e-2;
  int steps_max = 50000;
  double lambda = 0.05;
  double lambda_warmup_frac = 0.1;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  double init_scale = 1.0;
  double loss_tol = 1e-8;
  int stability_window = 500;
  int cooldown_steps = 3000;
  double polish_lr_decay = 0.998;
  double polish_lr_floor = 0.01;  // fraction of lr
  int log_every = 100;

  void validate() const;
};

struct TrajectoryPoint {
  int step = 0;
  double recon_loss = 0.0;
  double flatness = 0.0;
  double decode_accuracy = 0.0;
};

struct TrainResult {
  FactorParams params;
  bool converged = false;
  int steps_used = 0;
  double recon_loss_final = 0.0;
  double flatness_final = 0.0;
  uint64_t seed = 0;
  std::vector<TrajectoryPoint> trajectory;
};

struct RecoveryReport {
  bool exact = false;
  double cell_accuracy = 0.0;
  double observed_accuracy = 0.0;
  double unobserved_accuracy = 0.0;
  double flatness_final = 0.0;
  double bound_3n2 = 0.0;
  double margin_min = 0.0;
};

class DivergedError : public Error {
 public:
  DivergedError(int step)
      : Error(ErrorCode::diverged,
              "training diverged at step " + std::to_string(step)),
        step_(step) {}
  int step() const { return step_; }

 private:
  int step_;
};

// m distinct cells drawn uniformly without replacement.
ObservationSet sample_mask(int n, int m, Rng& rng);

TrainResult train(const CayleyTable& t, const ObservationSet& omega, const TrainConfig& cfg,
                  uint64_t seed);

struct RestartSummary {
  uint64_t seed = 0;
  bool converged = false;
  bool diverged = false;
  int steps_used = 0;
  double recon_loss_final = 0.0;
  double flatness_final = 0.0;
  bool exact = false;
};

struct MultiRestartResult {
  TrainResult best;
  std::vector<RestartSummary> runs;
};

// k trainings with seeds base_seed .. base_seed+k-1; best = converged
// first, then lowest final flatness.
MultiRestartResult multi_restart(const CayleyTable& t, const ObservationSet& omega,
                                 const TrainConfig& cfg, int k, uint64_t base_seed);

struct DecodeResult {
  CayleyTable table;
  double margin_min = 0.0;  // smallest argmax margin over cells
};

// cells[a][b] = argmax_c T_abc, ties toward the smallest index.
DecodeResult decode(const FactorParams& p);

RecoveryReport evaluate(const CayleyTable& decoded, const CayleyTable& target,
                        const ObservationSet& omega, double flatness_final,
                        double margin_min = 0.0);

// One CSV row per (table, m, seed) run; tensor and baseline sweeps share
// the schema.
struct SweepRow {
  std::string table_id;
  int n = 0;
  int m = 0;
  uint64_t seed = 0;
  std::string method = "tensor";  // tensor | mc
  std::string encoding;           // mc only: ordinal | onehot
  int r = 0;                      // mc only
  double weight_decay = 0.0;      // mc only
  bool converged = false;
  bool diverged = false;
  int steps = 0;
  double recon_loss_final = 0.0;
  double flatness_final = 0.0;
  double bound_3n2 = 0.0;
  double cell_accuracy = 0.0;
  double unobserved_accuracy = 0.0;
  bool exact = false;

  static std::string csv_header();
  std::string to_csv() const;
  static SweepRow from_csv(const std::string& line);
  // resume key
  std::string key() const;
};

struct SweepAggregate {
  std::string table_id;
  int n = 0;
  int m = 0;
  int runs = 0;
  int exact_count = 0;
  double recovery_rate = 0.0;
};

struct SweepSummary {
  std::vector<SweepAggregate> aggregates;
  // smallest grid m with recovery rate >= 0.9, per table; absent if none
  std::vector<std::pair<std::string, std::optional<int>>> m_star;
};

struct SweepSpec {
  std::vector<std::pair<std::string, CayleyTable>> tables;
  std::vector<int> m_grid;  // per-table grids derived where m > n^2
  int seeds = 10;
  uint64_t seed_base = 0;
  TrainConfig cfg;
};

// Runs the grid; already-done keys are skipped, finished rows stream
// through on_row. Divergence is recorded in the row, never thrown.
SweepSummary sweep_sample_complexity(
    const SweepSpec& spec, const std::function<bool(const std::string&)>& already_done,
    const std::function<void(const SweepRow&)>& on_row,
    std::vector<SweepRow>* prior_rows = nullptr);

// Deterministic mask seed for a sweep cell, shared by tensor and baseline
// sweeps so both see identical observations.
uint64_t mask_seed_for(const std::string& table_id, int m, uint64_t seed);

struct LandscapeSummary {
  std::string table_id;
  int n = 0;
  int k = 0;
  int converged_count = 0;
  double best_flatness = 0.0;
  double bound = 0.0;
  double gap = 0.0;
  double sv_spread_max = 0.0;  // over slices of the best run
};

// Full-observation flatness probe via restarts.
LandscapeSummary landscape_probe(const CayleyTable& t, const TrainConfig& cfg, int k,
                                 uint64_t base_seed, const std::string& table_id = "table");

std::string landscape_to_json(const LandscapeSummary& s);

// Result JSON for a single training run (byte-stable given equal inputs).
std::string train_result_to_json(const TrainResult& res, const RecoveryReport& rep,
                                 const TrainConfig& cfg, const std::string& table_id,
                                 int m_observed);

// %.17g, the float format used in CSV and summary JSON output.
std::string format_g17(double v);

}  // namespace cayrec
