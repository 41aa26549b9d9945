#include "cayrec.h"

#include <cstdlib>
#include <cstring>
#include <string>

#include "cayrec/algebra.hpp"
#include "cayrec/baseline.hpp"
#include "cayrec/engine.hpp"
#include "cayrec/experiment.hpp"
#include "cayrec/model.hpp"
#include "cayrec/verify.hpp"

namespace {

thread_local std::string g_last_error;

cayrec_status code_of(const cayrec::Error& e) {
  using cayrec::ErrorCode;
  switch (e.code()) {
    case ErrorCode::invalid_argument:
      return CAYREC_ERR_INVALID_ARG;
    case ErrorCode::shape_mismatch:
      return CAYREC_ERR_SHAPE;
    case ErrorCode::not_latin:
      return CAYREC_ERR_NOT_LATIN;
    case ErrorCode::not_a_group:
      return CAYREC_ERR_NOT_GROUP;
    case ErrorCode::invalid_isotopy:
      return CAYREC_ERR_INVALID_ISOTOPY;
    case ErrorCode::size_limit:
      return CAYREC_ERR_SIZE_LIMIT;
    case ErrorCode::diverged:
      return CAYREC_ERR_DIVERGED;
    case ErrorCode::io_error:
      return CAYREC_ERR_IO;
    case ErrorCode::probe_failed:
      return CAYREC_ERR_PROBE_FAILED;
  }
  return CAYREC_ERR_INTERNAL;
}

template <typename Fn>
cayrec_status guarded(Fn&& fn) {
  try {
    g_last_error.clear();
    return fn();
  } catch (const cayrec::Error& e) {
    g_last_error = e.what();
    return code_of(e);
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return CAYREC_ERR_INTERNAL;
  }
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out) std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

cayrec::TrainConfig to_cpp(const cayrec_train_config* cfg) {
  cayrec::TrainConfig out;
  if (!cfg) return out;
  out.lr = cfg->lr;
  out.steps_max = cfg->steps_max;
  out.lambda = cfg->lambda;
  out.lambda_warmup_frac = cfg->lambda_warmup_frac;
  out.adam_beta1 = cfg->adam_beta1;
  out.adam_beta2 = cfg->adam_beta2;
  out.adam_eps = cfg->adam_eps;
  out.init_scale = cfg->init_scale;
  out.loss_tol = cfg->loss_tol;
  out.stability_window = cfg->stability_window;
  out.cooldown_steps = cfg->cooldown_steps;
  out.log_every = cfg->log_every;
  return out;
}

}  // namespace

struct cayrec_table {
  cayrec::CayleyTable t;
};

extern "C" {

const char* cayrec_last_error(void) { return g_last_error.c_str(); }

cayrec_status cayrec_table_cyclic(int n, cayrec_table** out) {
  return guarded([&]() {
    *out = new cayrec_table{cayrec::cyclic_group(n)};
    return CAYREC_OK;
  });
}

cayrec_status cayrec_table_dihedral(int m, cayrec_table** out) {
  return guarded([&]() {
    *out = new cayrec_table{cayrec::dihedral_group(m)};
    return CAYREC_OK;
  });
}

cayrec_status cayrec_table_product(const cayrec_table* t1, const cayrec_table* t2,
                                   cayrec_table** out) {
  return guarded([&]() {
    *out = new cayrec_table{cayrec::direct_product(t1->t, t2->t)};
    return CAYREC_OK;
  });
}

cayrec_status cayrec_table_random_latin(int n, uint64_t seed, cayrec_table** out) {
  return guarded([&]() {
    *out = new cayrec_table{cayrec::random_latin_square(n, seed)};
    return CAYREC_OK;
  });
}

cayrec_status cayrec_table_nonassociative(int n, uint64_t seed, cayrec_table** out) {
  return guarded([&]() {
    *out = new cayrec_table{cayrec::find_nonassociative_quasigroup(n, seed)};
    return CAYREC_OK;
  });
}

cayrec_status cayrec_table_read_file(const char* path, cayrec_table** out) {
  return guarded([&]() {
    const std::string text = cayrec::read_file(path);
    cayrec::CayleyTable t;
    if (!text.empty() && text[0] == '{')
      t = cayrec::table_from_json(text);
    else
      t = cayrec::table_from_text(text);
    *out = new cayrec_table{std::move(t)};
    return CAYREC_OK;
  });
}

void cayrec_table_free(cayrec_table* t) { delete t; }

int cayrec_table_order(const cayrec_table* t) { return t ? t->t.n : 0; }

int cayrec_table_cell(const cayrec_table* t, int a, int b) {
  if (!t || a < 0 || a >= t->t.n || b < 0 || b >= t->t.n) return -1;
  return t->t.at(a, b);
}

int cayrec_table_is_latin(const cayrec_table* t) {
  return t && cayrec::is_latin(t->t) ? 1 : 0;
}

int cayrec_table_is_associative(const cayrec_table* t) {
  return t && cayrec::is_associative(t->t) ? 1 : 0;
}

int cayrec_table_is_isotopic_to_group(const cayrec_table* t) {
  int result = 0;
  const cayrec_status st = guarded([&]() {
    result = cayrec::is_isotopic_to_group(t->t) ? 1 : 0;
    return CAYREC_OK;
  });
  return st == CAYREC_OK ? result : -st;
}

cayrec_status cayrec_table_write_file(const cayrec_table* t, const char* path,
                                      const char* format) {
  return guarded([&]() {
    const std::string fmt = format ? format : "json";
    if (fmt == "json")
      cayrec::write_file(path, cayrec::table_to_json(t->t) + "\n");
    else if (fmt == "text")
      cayrec::write_file(path, cayrec::table_to_text(t->t));
    else
      throw cayrec::Error(cayrec::ErrorCode::invalid_argument, "unknown table format: " + fmt);
    return CAYREC_OK;
  });
}

void cayrec_train_config_defaults(cayrec_train_config* cfg) {
  const cayrec::TrainConfig d;
  cfg->lr = d.lr;
  cfg->steps_max = d.steps_max;
  cfg->lambda = d.lambda;
  cfg->lambda_warmup_frac = d.lambda_warmup_frac;
  cfg->adam_beta1 = d.adam_beta1;
  cfg->adam_beta2 = d.adam_beta2;
  cfg->adam_eps = d.adam_eps;
  cfg->init_scale = d.init_scale;
  cfg->loss_tol = d.loss_tol;
  cfg->stability_window = d.stability_window;
  cfg->cooldown_steps = d.cooldown_steps;
  cfg->log_every = d.log_every;
}

cayrec_status cayrec_train_run(const cayrec_table* t, int m, uint64_t mask_seed,
                               const cayrec_train_config* cfg, uint64_t seed,
                               const char* result_path, const char* checkpoint_path,
                               cayrec_train_report* report) {
  return guarded([&]() {
    const cayrec::TrainConfig c = to_cpp(cfg);
    cayrec::Rng mask_rng(mask_seed);
    const cayrec::ObservationSet omega = cayrec::sample_mask(t->t.n, m, mask_rng);
    const cayrec::TrainResult res = cayrec::train(t->t, omega, c, seed);
    const cayrec::DecodeResult dec = cayrec::decode(res.params);
    const cayrec::RecoveryReport rep =
        cayrec::evaluate(dec.table, t->t, omega, res.flatness_final, dec.margin_min);
    if (result_path)
      cayrec::write_file(result_path,
                         cayrec::train_result_to_json(res, rep, c, "table", m) + "\n");
    if (checkpoint_path) cayrec::write_file(checkpoint_path, cayrec::params_to_json(res.params));
    if (report) {
      report->converged = res.converged;
      report->steps_used = res.steps_used;
      report->recon_loss_final = res.recon_loss_final;
      report->flatness_final = res.flatness_final;
      report->bound_3n2 = rep.bound_3n2;
      report->exact = rep.exact;
      report->cell_accuracy = rep.cell_accuracy;
      report->observed_accuracy = rep.observed_accuracy;
      report->unobserved_accuracy = rep.unobserved_accuracy;
      report->margin_min = rep.margin_min;
    }
    return CAYREC_OK;
  });
}

cayrec_status cayrec_sweep_run(const char* spec_json, const char* csv_path,
                               const char* summary_path) {
  return guarded([&]() {
    cayrec::run_sweep_to_files(spec_json, csv_path, summary_path ? summary_path : "");
    return CAYREC_OK;
  });
}

cayrec_status cayrec_landscape_run(const cayrec_table* t, const char* table_id,
                                   const cayrec_train_config* cfg, int k, uint64_t base_seed,
                                   const char* out_path, char** out_json) {
  return guarded([&]() {
    const cayrec::LandscapeSummary s = cayrec::landscape_probe(
        t->t, to_cpp(cfg), k, base_seed, table_id ? table_id : "table");
    const std::string text = cayrec::landscape_to_json(s);
    if (out_path) cayrec::write_file(out_path, text + "\n");
    if (out_json) *out_json = dup_string(text);
    return CAYREC_OK;
  });
}

int cayrec_table_encoding_rank(const cayrec_table* t, const char* encoding) {
  int rank = -CAYREC_ERR_INTERNAL;
  const cayrec_status st = guarded([&]() {
    const cayrec::Encoding enc = cayrec::encoding_from_name(encoding ? encoding : "ordinal");
    const cayrec::Mat m = cayrec::encode_table(t->t, enc);
    const int svd_rank = cayrec::matrix_rank(m);
    const int elim_rank = cayrec::rank_by_elimination(m);
    if (svd_rank != elim_rank)
      throw cayrec::Error(cayrec::ErrorCode::invalid_argument,
                          "rank cross-check disagreement: svd=" + std::to_string(svd_rank) +
                              " elimination=" + std::to_string(elim_rank));
    rank = svd_rank;
    return CAYREC_OK;
  });
  return st == CAYREC_OK ? rank : -st;
}

cayrec_status cayrec_baseline_run(const cayrec_table* t, int m, uint64_t mask_seed,
                                  const char* encoding, int rank, double weight_decay,
                                  const cayrec_train_config* cfg, uint64_t seed,
                                  cayrec_train_report* report) {
  return guarded([&]() {
    const cayrec::Encoding enc = cayrec::encoding_from_name(encoding ? encoding : "ordinal");
    cayrec::Rng mask_rng(mask_seed);
    const cayrec::ObservationSet omega = cayrec::sample_mask(t->t.n, m, mask_rng);
    const cayrec::MCFactors f =
        cayrec::mc_train(t->t, omega, enc, rank, weight_decay, to_cpp(cfg), seed);
    const cayrec::CayleyTable dec = cayrec::mc_decode(f);
    const cayrec::RecoveryReport rep = cayrec::evaluate(dec, t->t, omega, 0.0);
    if (report) {
      report->converged = f.converged;
      report->steps_used = f.steps_used;
      report->recon_loss_final = f.loss_final;
      report->flatness_final = 0.0;
      report->bound_3n2 = rep.bound_3n2;
      report->exact = rep.exact;
      report->cell_accuracy = rep.cell_accuracy;
      report->observed_accuracy = rep.observed_accuracy;
      report->unobserved_accuracy = rep.unobserved_accuracy;
      report->margin_min = 0.0;
    }
    return CAYREC_OK;
  });
}

cayrec_status cayrec_verify(uint64_t seed, const char* out_path, char** out_json) {
  return guarded([&]() -> cayrec_status {
    const auto checks = cayrec::run_verification(seed);
    const std::string text = cayrec::verification_report_json(checks);
    if (out_path) cayrec::write_file(out_path, text + "\n");
    if (out_json) *out_json = dup_string(text);
    for (const auto& c : checks)
      if (!c.pass) {
        g_last_error = "verification check failed: " + c.name;
        return CAYREC_ERR_VERIFY_FAILED;
      }
    return CAYREC_OK;
  });
}

void cayrec_string_free(char* s) { std::free(s); }

}  // extern "C"
