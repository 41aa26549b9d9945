#include "cayrec/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

namespace cayrec {

namespace {

using nlohmann::json;

std::pair<std::string, CayleyTable> make_table_impl(const json& j) {
  const std::string family = j.at("family").get<std::string>();
  if (family == "cyclic") {
    const int n = j.at("n").get<int>();
    return {"cyclic" + std::to_string(n), cyclic_group(n)};
  }
  if (family == "dihedral") {
    const int m = j.at("m").get<int>();
    return {"dihedral" + std::to_string(m), dihedral_group(m)};
  }
  if (family == "klein") {
    return {"klein4", direct_product(cyclic_group(2), cyclic_group(2))};
  }
  if (family == "product") {
    const auto& factors = j.at("factors");
    if (factors.size() != 2)
      throw Error(ErrorCode::invalid_argument, "product family needs exactly two factors");
    auto [id1, t1] = make_table_impl(factors[0]);
    auto [id2, t2] = make_table_impl(factors[1]);
    return {id1 + "x" + id2, direct_product(t1, t2)};
  }
  if (family == "random-latin") {
    const int n = j.at("n").get<int>();
    const uint64_t seed = j.value("seed", 0ULL);
    return {"latin" + std::to_string(n) + "_s" + std::to_string(seed),
            random_latin_square(n, seed)};
  }
  if (family == "nonassoc") {
    const int n = j.at("n").get<int>();
    const uint64_t seed = j.value("seed", 0ULL);
    return {"nonassoc" + std::to_string(n) + "_s" + std::to_string(seed),
            find_nonassociative_quasigroup(n, seed)};
  }
  if (family == "file") {
    const std::string path = j.at("path").get<std::string>();
    const std::string text = read_file(path);
    CayleyTable t;
    if (!text.empty() && text[0] == '{')
      t = table_from_json(text);
    else
      t = table_from_text(text);
    std::string stem = path;
    const auto slash = stem.find_last_of('/');
    if (slash != std::string::npos) stem = stem.substr(slash + 1);
    const auto dot = stem.find_last_of('.');
    if (dot != std::string::npos) stem = stem.substr(0, dot);
    return {"file:" + stem, t};
  }
  throw Error(ErrorCode::invalid_argument, "unknown table family: " + family);
}

void apply_config(const json& j, TrainConfig& cfg) {
  cfg.lr = j.value("lr", cfg.lr);
  cfg.steps_max = j.value("steps_max", cfg.steps_max);
  cfg.lambda = j.value("lambda", cfg.lambda);
  cfg.lambda_warmup_frac = j.value("lambda_warmup_frac", cfg.lambda_warmup_frac);
  cfg.adam_beta1 = j.value("adam_beta1", cfg.adam_beta1);
  cfg.adam_beta2 = j.value("adam_beta2", cfg.adam_beta2);
  cfg.adam_eps = j.value("adam_eps", cfg.adam_eps);
  cfg.init_scale = j.value("init_scale", cfg.init_scale);
  cfg.loss_tol = j.value("loss_tol", cfg.loss_tol);
  cfg.stability_window = j.value("stability_window", cfg.stability_window);
  cfg.cooldown_steps = j.value("cooldown_steps", cfg.cooldown_steps);
  cfg.polish_lr_decay = j.value("polish_lr_decay", cfg.polish_lr_decay);
  cfg.polish_lr_floor = j.value("polish_lr_floor", cfg.polish_lr_floor);
  cfg.log_every = j.value("log_every", cfg.log_every);
  cfg.validate();
  // reject unknown keys so config typos fail loudly
  static const std::set<std::string> known = {
      "lr",         "steps_max",        "lambda",           "lambda_warmup_frac",
      "adam_beta1", "adam_beta2",       "adam_eps",         "init_scale",
      "loss_tol",   "stability_window", "cooldown_steps",   "polish_lr_decay",
      "polish_lr_floor", "log_every"};
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!known.count(it.key()))
      throw Error(ErrorCode::invalid_argument, "unknown config key: " + it.key());
}

}  // namespace

std::pair<std::string, CayleyTable> make_table(const std::string& spec_json) {
  try {
    return make_table_impl(json::parse(spec_json));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::invalid_argument, std::string("table spec parse failed: ") + e.what());
  }
}

TrainConfig config_from_json(const std::string& json_text) {
  TrainConfig cfg;
  if (json_text.empty()) return cfg;
  try {
    apply_config(json::parse(json_text), cfg);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::invalid_argument, std::string("config parse failed: ") + e.what());
  }
  return cfg;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io_error, "cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::io_error, "cannot write " + path);
  out << content;
  if (!out) throw Error(ErrorCode::io_error, "write failed for " + path);
}

void run_sweep_to_files(const std::string& spec_json, const std::string& csv_path,
                        const std::string& summary_path) {
  json spec;
  try {
    spec = json::parse(spec_json);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::invalid_argument, std::string("sweep spec parse failed: ") + e.what());
  }

  SweepSpec ss;
  for (const auto& tj : spec.at("tables")) {
    auto [id, table] = make_table_impl(tj);
    ss.tables.emplace_back(id, std::move(table));
  }
  if (ss.tables.empty()) throw Error(ErrorCode::invalid_argument, "sweep: no tables");

  if (spec.contains("m_grid")) {
    for (int m : spec.at("m_grid")) ss.m_grid.push_back(m);
  } else if (spec.contains("fractions")) {
    // fractions are resolved per table order below; collect them here
  } else {
    throw Error(ErrorCode::invalid_argument, "sweep: need m_grid or fractions");
  }
  ss.seeds = spec.value("seeds", 10);
  ss.seed_base = spec.value("seed_base", 0ULL);
  if (spec.contains("config")) apply_config(spec.at("config"), ss.cfg);

  const std::string method = spec.value("method", std::string("tensor"));

  // load prior rows for resumability
  std::vector<SweepRow> prior;
  std::set<std::string> done;
  bool have_file = false;
  {
    std::ifstream in(csv_path);
    if (in) {
      have_file = true;
      std::string line;
      bool first = true;
      while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (first) {
          first = false;
          if (line != SweepRow::csv_header())
            throw Error(ErrorCode::io_error, "sweep CSV header mismatch in " + csv_path);
          continue;
        }
        SweepRow row = SweepRow::from_csv(line);
        done.insert(row.key());
        prior.push_back(std::move(row));
      }
    }
  }
  std::ofstream out(csv_path, std::ios::app);
  if (!out) throw Error(ErrorCode::io_error, "cannot open " + csv_path);
  if (!have_file) out << SweepRow::csv_header() << "\n";

  auto emit = [&out](const SweepRow& row) {
    out << row.to_csv() << "\n";
    out.flush();
  };

  std::vector<SweepRow> all_rows = prior;

  if (method == "tensor") {
    for (const auto& [id, table] : ss.tables) {
      SweepSpec per = ss;
      per.tables = {{id, table}};
      per.m_grid = ss.m_grid;
      if (per.m_grid.empty())
        for (double f : spec.at("fractions"))
          per.m_grid.push_back(static_cast<int>(std::lround(f * table.n * table.n)));
      std::sort(per.m_grid.begin(), per.m_grid.end());
      per.m_grid.erase(std::unique(per.m_grid.begin(), per.m_grid.end()), per.m_grid.end());
      const SweepSummary sum = sweep_sample_complexity(
          per, [&done](const std::string& key) { return done.count(key) > 0; },
          [&](const SweepRow& row) {
            emit(row);
            all_rows.push_back(row);
          },
          &prior);
      (void)sum;
    }
  } else if (method == "mc") {
    std::vector<Encoding> encodings;
    if (spec.contains("encodings"))
      for (const auto& e : spec.at("encodings"))
        encodings.push_back(encoding_from_name(e.get<std::string>()));
    else
      encodings = {Encoding::ordinal, Encoding::onehot};
    std::vector<int> ranks;
    if (spec.contains("ranks"))
      for (int r : spec.at("ranks")) ranks.push_back(r);
    const double wd = spec.value("weight_decay", 1e-3);

    for (const auto& [id, table] : ss.tables) {
      const int n = table.n;
      std::vector<int> m_grid = ss.m_grid;
      if (m_grid.empty())
        for (double f : spec.at("fractions"))
          m_grid.push_back(static_cast<int>(std::lround(f * n * n)));
      std::vector<int> rks = ranks;
      if (rks.empty()) rks = {2, (n + 1) / 2, n};
      for (int m : m_grid) {
        if (m > n * n) continue;
        for (Encoding enc : encodings) {
          for (int r : rks) {
            for (int s = 0; s < ss.seeds; ++s) {
              const uint64_t seed = ss.seed_base + static_cast<uint64_t>(s);
              SweepRow row;
              row.table_id = id;
              row.n = n;
              row.m = m;
              row.seed = seed;
              row.method = "mc";
              row.encoding = encoding_name(enc);
              row.r = r;
              row.weight_decay = wd;
              row.bound_3n2 = 3.0 * n * n;
              if (done.count(row.key())) continue;
              Rng mask_rng(mask_seed_for(id, m, seed));
              const ObservationSet omega = sample_mask(n, m, mask_rng);
              try {
                const MCFactors f = mc_train(table, omega, enc, r, wd, ss.cfg, seed);
                const CayleyTable dec = mc_decode(f);
                const RecoveryReport rep = evaluate(dec, table, omega, 0.0);
                row.converged = f.converged;
                row.steps = f.steps_used;
                row.recon_loss_final = f.loss_final;
                row.cell_accuracy = rep.cell_accuracy;
                row.unobserved_accuracy = rep.unobserved_accuracy;
                row.exact = rep.exact;
              } catch (const DivergedError& e) {
                row.diverged = true;
                row.steps = e.step();
              }
              emit(row);
              all_rows.push_back(row);
            }
          }
        }
      }
    }
  } else {
    throw Error(ErrorCode::invalid_argument, "sweep: unknown method " + method);
  }

  if (summary_path.empty()) return;

  // aggregates over all rows (prior + new), canonical order
  json summary;
  summary["method"] = method;
  auto aggregates = json::array();
  auto mstars = json::array();
  for (const auto& [id, table] : ss.tables) {
    std::set<int> ms;
    for (const SweepRow& row : all_rows)
      if (row.table_id == id) ms.insert(row.m);
    int m_star = -1;
    for (int m : ms) {
      std::map<std::string, std::pair<int, int>> by_config;  // (runs, exact)
      for (const SweepRow& row : all_rows) {
        if (row.table_id != id || row.m != m) continue;
        auto& agg = by_config[row.method + "|" + row.encoding + "|" + std::to_string(row.r)];
        ++agg.first;
        agg.second += row.exact;
      }
      for (const auto& [config, counts] : by_config) {
        json a;
        a["table_id"] = id;
        a["m"] = m;
        a["config"] = config;
        a["runs"] = counts.first;
        a["exact"] = counts.second;
        const double rate = static_cast<double>(counts.second) / counts.first;
        a["recovery_rate"] = rate;
        aggregates.push_back(a);
        if (config.rfind("tensor", 0) == 0 && m_star < 0 && rate >= 0.9) m_star = m;
      }
    }
    json ms_j;
    ms_j["table_id"] = id;
    ms_j["n"] = table.n;
    if (m_star >= 0)
      ms_j["m_star"] = m_star;
    else
      ms_j["m_star"] = nullptr;
    mstars.push_back(ms_j);
  }
  summary["aggregates"] = aggregates;
  summary["m_star"] = mstars;
  write_file(summary_path, summary.dump(2) + "\n");
}

}  // namespace cayrec
