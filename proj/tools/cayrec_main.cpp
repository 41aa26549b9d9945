// cayrec command-line front end. Talks to the core exclusively through the
// C API in cayrec.h.
//
// Exit codes: 0 success (train/baseline: exact recovery), 1 usage error,
// 2 run failure or divergence, 3 verification failure.

#include <cctype>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <cayrec.h>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitRunFailure = 2;
constexpr int kExitVerifyFailure = 3;

int exit_code_for(cayrec_status st) {
  switch (st) {
    case CAYREC_OK:
      return kExitOk;
    case CAYREC_ERR_INVALID_ARG:
    case CAYREC_ERR_SHAPE:
    case CAYREC_ERR_NOT_LATIN:
    case CAYREC_ERR_NOT_GROUP:
    case CAYREC_ERR_INVALID_ISOTOPY:
    case CAYREC_ERR_SIZE_LIMIT:
      return kExitUsage;
    case CAYREC_ERR_VERIFY_FAILED:
      return kExitVerifyFailure;
    default:
      return kExitRunFailure;
  }
}

int fail(cayrec_status st) {
  std::cerr << "error: " << cayrec_last_error() << "\n";
  return exit_code_for(st);
}

struct TableSpec {
  std::string family = "cyclic";
  int n = 0;
  int n2 = 0;       // second factor order for family=product
  uint64_t seed = 0;  // random-latin / nonassoc
  std::string path;   // family=file
};

using TablePtr = std::unique_ptr<cayrec_table, decltype(&cayrec_table_free)>;

cayrec_status build_table(const TableSpec& spec, TablePtr& out) {
  cayrec_table* t = nullptr;
  cayrec_status st;
  if (spec.family == "cyclic") {
    st = cayrec_table_cyclic(spec.n, &t);
  } else if (spec.family == "dihedral") {
    st = cayrec_table_dihedral(spec.n, &t);
  } else if (spec.family == "klein") {
    cayrec_table* z2 = nullptr;
    st = cayrec_table_cyclic(2, &z2);
    if (st == CAYREC_OK) {
      st = cayrec_table_product(z2, z2, &t);
      cayrec_table_free(z2);
    }
  } else if (spec.family == "product") {
    cayrec_table *t1 = nullptr, *t2 = nullptr;
    st = cayrec_table_cyclic(spec.n, &t1);
    if (st == CAYREC_OK) st = cayrec_table_cyclic(spec.n2, &t2);
    if (st == CAYREC_OK) st = cayrec_table_product(t1, t2, &t);
    cayrec_table_free(t1);
    cayrec_table_free(t2);
  } else if (spec.family == "random-latin") {
    st = cayrec_table_random_latin(spec.n, spec.seed, &t);
  } else if (spec.family == "nonassoc") {
    st = cayrec_table_nonassociative(spec.n, spec.seed, &t);
  } else if (spec.family == "file") {
    st = cayrec_table_read_file(spec.path.c_str(), &t);
  } else {
    std::cerr << "error: unknown table family: " << spec.family << "\n";
    return CAYREC_ERR_INVALID_ARG;
  }
  if (st == CAYREC_OK) out.reset(t);
  return st;
}

void add_table_options(CLI::App* cmd, TableSpec& spec) {
  cmd->add_option("family", spec.family,
                  "table family: cyclic|dihedral|klein|product|random-latin|nonassoc|file");
  cmd->add_option("-n,--order", spec.n,
                  "order parameter (cyclic/random-latin/nonassoc: group order; "
                  "dihedral: m, order 2m; product: first factor)");
  cmd->add_option("--n2", spec.n2, "second factor order for family=product");
  cmd->add_option("--table-seed", spec.seed, "seed for random-latin/nonassoc");
  cmd->add_option("--file", spec.path, "table file for family=file");
}

// key=value config files, '#' comments; unknown keys rejected.
bool apply_config_file(const std::string& path, cayrec_train_config& cfg) {
  std::ifstream in(path);
  if (!in) {
    std::cerr << "error: cannot open config file: " << path << "\n";
    return false;
  }
  std::map<std::string, double*> dkeys = {
      {"lr", &cfg.lr},
      {"lambda", &cfg.lambda},
      {"lambda_warmup_frac", &cfg.lambda_warmup_frac},
      {"adam_beta1", &cfg.adam_beta1},
      {"adam_beta2", &cfg.adam_beta2},
      {"adam_eps", &cfg.adam_eps},
      {"init_scale", &cfg.init_scale},
      {"loss_tol", &cfg.loss_tol},
  };
  std::map<std::string, int*> ikeys = {
      {"steps_max", &cfg.steps_max},
      {"stability_window", &cfg.stability_window},
      {"cooldown_steps", &cfg.cooldown_steps},
      {"log_every", &cfg.log_every},
  };
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::string trimmed;
    for (char c : line)
      if (!std::isspace(static_cast<unsigned char>(c))) trimmed += c;
    if (trimmed.empty()) continue;
    const size_t eq = trimmed.find('=');
    if (eq == std::string::npos) {
      std::cerr << "error: " << path << ":" << lineno << ": expected key=value\n";
      return false;
    }
    const std::string key = trimmed.substr(0, eq);
    const std::string value = trimmed.substr(eq + 1);
    try {
      if (auto it = dkeys.find(key); it != dkeys.end())
        *it->second = std::stod(value);
      else if (auto it2 = ikeys.find(key); it2 != ikeys.end())
        *it2->second = std::stoi(value);
      else {
        std::cerr << "error: " << path << ":" << lineno << ": unknown config key: " << key << "\n";
        return false;
      }
    } catch (const std::exception&) {
      std::cerr << "error: " << path << ":" << lineno << ": bad value for " << key << "\n";
      return false;
    }
  }
  return true;
}

// Command-line values land in `cli`; resolve_config() starts from defaults,
// layers the config file, then any flags actually given, in that order.
struct ConfigCli {
  cayrec_train_config cli{};
  CLI::Option* lr = nullptr;
  CLI::Option* steps_max = nullptr;
  CLI::Option* lambda = nullptr;
  CLI::Option* lambda_warmup_frac = nullptr;
  CLI::Option* init_scale = nullptr;
  CLI::Option* loss_tol = nullptr;
  CLI::Option* stability_window = nullptr;
  CLI::Option* cooldown_steps = nullptr;
};

void add_config_options(CLI::App* cmd, ConfigCli& c) {
  cayrec_train_config_defaults(&c.cli);
  c.lr = cmd->add_option("--lr", c.cli.lr, "learning rate");
  c.steps_max = cmd->add_option("--steps-max", c.cli.steps_max, "step budget");
  c.lambda = cmd->add_option("--lambda", c.cli.lambda, "flatness weight");
  c.lambda_warmup_frac =
      cmd->add_option("--lambda-warmup-frac", c.cli.lambda_warmup_frac, "warmup fraction");
  c.init_scale = cmd->add_option("--init-scale", c.cli.init_scale, "init scale");
  c.loss_tol = cmd->add_option("--loss-tol", c.cli.loss_tol, "convergence loss tolerance");
  c.stability_window =
      cmd->add_option("--stability-window", c.cli.stability_window, "decode stability window");
  c.cooldown_steps =
      cmd->add_option("--cooldown-steps", c.cli.cooldown_steps, "lambda cooldown length");
}

bool resolve_config(const std::string& config_path, const ConfigCli& c,
                    cayrec_train_config& cfg) {
  cayrec_train_config_defaults(&cfg);
  if (!config_path.empty() && !apply_config_file(config_path, cfg)) return false;
  if (c.lr->count()) cfg.lr = c.cli.lr;
  if (c.steps_max->count()) cfg.steps_max = c.cli.steps_max;
  if (c.lambda->count()) cfg.lambda = c.cli.lambda;
  if (c.lambda_warmup_frac->count()) cfg.lambda_warmup_frac = c.cli.lambda_warmup_frac;
  if (c.init_scale->count()) cfg.init_scale = c.cli.init_scale;
  if (c.loss_tol->count()) cfg.loss_tol = c.cli.loss_tol;
  if (c.stability_window->count()) cfg.stability_window = c.cli.stability_window;
  if (c.cooldown_steps->count()) cfg.cooldown_steps = c.cli.cooldown_steps;
  return true;
}

std::string read_text_file(const std::string& path, bool& ok) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    ok = false;
    return {};
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  ok = true;
  return ss.str();
}

int resolve_m(int n, int m, double fraction) {
  if (m >= 0) return m;
  if (fraction >= 0.0) return static_cast<int>(fraction * n * n + 0.5);
  return n * n;  // default: full observation
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"recovery of binary operations from partial Cayley tables"};
  app.require_subcommand(1);

  // ---- gen ----
  TableSpec gen_spec;
  std::string gen_out, gen_format = "json";
  CLI::App* gen = app.add_subcommand("gen", "generate a table file");
  add_table_options(gen, gen_spec);
  gen->add_option("-o,--out", gen_out, "output path")->required();
  gen->add_option("--format", gen_format, "json|text");

  // ---- train ----
  TableSpec train_spec;
  ConfigCli train_cli;
  std::string train_config_path, train_out, train_ckpt;
  int train_m = -1;
  double train_fraction = -1.0;
  uint64_t train_seed = 0, train_mask_seed = 0;
  CLI::App* train = app.add_subcommand("train", "train the factor model on a table");
  add_table_options(train, train_spec);
  train->add_option("--config", train_config_path, "key=value config file");
  add_config_options(train, train_cli);
  train->add_option("-m,--observed", train_m, "observed cell count (default n^2)");
  train->add_option("--fraction", train_fraction, "observed fraction of n^2");
  train->add_option("--mask-seed", train_mask_seed, "observation mask seed");
  train->add_option("--seed", train_seed, "training seed");
  train->add_option("-o,--out", train_out, "result JSON path");
  train->add_option("--checkpoint", train_ckpt, "parameter checkpoint path");

  // ---- sweep ----
  std::string sweep_spec_path, sweep_out, sweep_summary;
  int sweep_jobs = 1;
  CLI::App* sweep = app.add_subcommand("sweep", "sample-complexity sweep from a JSON spec");
  sweep->add_option("--spec", sweep_spec_path, "sweep spec JSON file")->required();
  sweep->add_option("-o,--out", sweep_out, "CSV output path (appended, resumable)")->required();
  sweep->add_option("--summary", sweep_summary, "summary JSON path");
  sweep->add_option("--jobs", sweep_jobs, "worker limit (currently serialized)");

  // ---- landscape ----
  TableSpec land_spec;
  ConfigCli land_cli;
  std::string land_config_path, land_out, land_id;
  int land_k = 10;
  uint64_t land_seed = 0;
  CLI::App* landscape = app.add_subcommand("landscape", "full-observation flatness probe");
  add_table_options(landscape, land_spec);
  landscape->add_option("--config", land_config_path, "key=value config file");
  add_config_options(landscape, land_cli);
  landscape->add_option("--seeds,-k", land_k, "restart count");
  landscape->add_option("--seed", land_seed, "base seed");
  landscape->add_option("--id", land_id, "table id used in the report");
  landscape->add_option("-o,--out", land_out, "landscape JSON path");

  // ---- baseline ----
  TableSpec base_spec;
  ConfigCli base_cli;
  std::string base_config_path, base_encoding = "ordinal";
  int base_m = -1, base_rank = 2;
  double base_fraction = -1.0, base_wd = 1e-3;
  uint64_t base_seed = 0, base_mask_seed = 0;
  CLI::App* baseline = app.add_subcommand("baseline", "matrix-completion baseline run");
  add_table_options(baseline, base_spec);
  baseline->add_option("--config", base_config_path, "key=value config file");
  add_config_options(baseline, base_cli);
  baseline->add_option("-m,--observed", base_m, "observed cell count (default n^2)");
  baseline->add_option("--fraction", base_fraction, "observed fraction of n^2");
  baseline->add_option("--mask-seed", base_mask_seed, "observation mask seed");
  baseline->add_option("--seed", base_seed, "training seed");
  baseline->add_option("--encoding", base_encoding, "ordinal|onehot");
  baseline->add_option("-r,--rank", base_rank, "factorization rank");
  baseline->add_option("--weight-decay", base_wd, "weight decay");

  // ---- rank ----
  TableSpec rank_spec;
  std::string rank_encoding = "ordinal";
  CLI::App* rank = app.add_subcommand("rank", "rank of a table encoding");
  add_table_options(rank, rank_spec);
  rank->add_option("--encoding", rank_encoding, "ordinal|onehot");

  // ---- verify ----
  uint64_t verify_seed = 12345;
  std::string verify_out;
  CLI::App* verify = app.add_subcommand("verify", "oracle self-verification suite");
  verify->add_option("--seed", verify_seed, "suite seed");
  verify->add_option("-o,--out", verify_out, "report JSON path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  if (gen->parsed()) {
    TablePtr t(nullptr, cayrec_table_free);
    cayrec_status st = build_table(gen_spec, t);
    if (st != CAYREC_OK) return fail(st);
    st = cayrec_table_write_file(t.get(), gen_out.c_str(), gen_format.c_str());
    if (st != CAYREC_OK) return fail(st);
    const int n = cayrec_table_order(t.get());
    std::cout << "n=" << n << " latin=" << cayrec_table_is_latin(t.get())
              << " associative=" << cayrec_table_is_associative(t.get());
    if (n <= 5) {
      const int iso = cayrec_table_is_isotopic_to_group(t.get());
      if (iso < 0) return fail(static_cast<cayrec_status>(-iso));
      std::cout << " isotopic_to_group=" << iso;
    }
    std::cout << "\n";
    return kExitOk;
  }

  if (train->parsed()) {
    cayrec_train_config train_cfg;
    if (!resolve_config(train_config_path, train_cli, train_cfg)) return kExitUsage;
    TablePtr t(nullptr, cayrec_table_free);
    cayrec_status st = build_table(train_spec, t);
    if (st != CAYREC_OK) return fail(st);
    const int m = resolve_m(cayrec_table_order(t.get()), train_m, train_fraction);
    cayrec_train_report rep;
    st = cayrec_train_run(t.get(), m, train_mask_seed, &train_cfg, train_seed,
                          train_out.empty() ? nullptr : train_out.c_str(),
                          train_ckpt.empty() ? nullptr : train_ckpt.c_str(), &rep);
    if (st != CAYREC_OK) return fail(st);
    std::printf(
        "converged=%d exact=%d steps=%d recon_loss=%.6g flatness=%.6g bound=%g "
        "cell_acc=%.4f unobs_acc=%.4f\n",
        rep.converged, rep.exact, rep.steps_used, rep.recon_loss_final, rep.flatness_final,
        rep.bound_3n2, rep.cell_accuracy, rep.unobserved_accuracy);
    return rep.exact ? kExitOk : kExitRunFailure;
  }

  if (sweep->parsed()) {
    bool ok = false;
    const std::string spec_json = read_text_file(sweep_spec_path, ok);
    if (!ok) {
      std::cerr << "error: cannot read sweep spec: " << sweep_spec_path << "\n";
      return kExitUsage;
    }
    const cayrec_status st = cayrec_sweep_run(
        spec_json.c_str(), sweep_out.c_str(), sweep_summary.empty() ? nullptr : sweep_summary.c_str());
    if (st != CAYREC_OK) return fail(st);
    std::cout << "sweep complete: " << sweep_out << "\n";
    return kExitOk;
  }

  if (landscape->parsed()) {
    cayrec_train_config land_cfg;
    if (!resolve_config(land_config_path, land_cli, land_cfg)) return kExitUsage;
    TablePtr t(nullptr, cayrec_table_free);
    cayrec_status st = build_table(land_spec, t);
    if (st != CAYREC_OK) return fail(st);
    if (land_id.empty()) land_id = land_spec.family + std::to_string(cayrec_table_order(t.get()));
    char* json = nullptr;
    st = cayrec_landscape_run(t.get(), land_id.c_str(), &land_cfg, land_k, land_seed,
                              land_out.empty() ? nullptr : land_out.c_str(), &json);
    if (st != CAYREC_OK) return fail(st);
    std::cout << json << "\n";
    cayrec_string_free(json);
    return kExitOk;
  }

  if (baseline->parsed()) {
    cayrec_train_config base_cfg;
    if (!resolve_config(base_config_path, base_cli, base_cfg)) return kExitUsage;
    TablePtr t(nullptr, cayrec_table_free);
    cayrec_status st = build_table(base_spec, t);
    if (st != CAYREC_OK) return fail(st);
    const int m = resolve_m(cayrec_table_order(t.get()), base_m, base_fraction);
    cayrec_train_report rep;
    st = cayrec_baseline_run(t.get(), m, base_mask_seed, base_encoding.c_str(), base_rank,
                             base_wd, &base_cfg, base_seed, &rep);
    if (st != CAYREC_OK) return fail(st);
    std::printf("converged=%d exact=%d steps=%d loss=%.6g cell_acc=%.4f unobs_acc=%.4f\n",
                rep.converged, rep.exact, rep.steps_used, rep.recon_loss_final,
                rep.cell_accuracy, rep.unobserved_accuracy);
    return rep.exact ? kExitOk : kExitRunFailure;
  }

  if (rank->parsed()) {
    TablePtr t(nullptr, cayrec_table_free);
    const cayrec_status st = build_table(rank_spec, t);
    if (st != CAYREC_OK) return fail(st);
    const int r = cayrec_table_encoding_rank(t.get(), rank_encoding.c_str());
    if (r < 0) return fail(static_cast<cayrec_status>(-r));
    std::cout << "n=" << cayrec_table_order(t.get()) << " encoding=" << rank_encoding
              << " rank=" << r << "\n";
    return kExitOk;
  }

  if (verify->parsed()) {
    char* json = nullptr;
    const cayrec_status st =
        cayrec_verify(verify_seed, verify_out.empty() ? nullptr : verify_out.c_str(), &json);
    if (json) {
      std::cout << json << "\n";
      cayrec_string_free(json);
    }
    if (st == CAYREC_OK) return kExitOk;
    return fail(st);
  }

  return kExitUsage;
}
