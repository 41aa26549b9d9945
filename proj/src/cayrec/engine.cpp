#include "cayrec/engine.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace cayrec {

void TrainConfig::validate() const {
  if (lr <= 0.0) throw Error(ErrorCode::invalid_argument, "lr must be > 0");
  if (steps_max < 0) throw Error(ErrorCode::invalid_argument, "steps_max must be >= 0");
  if (lambda < 0.0) throw Error(ErrorCode::invalid_argument, "lambda must be >= 0");
  if (lambda_warmup_frac < 0.0 || lambda_warmup_frac > 1.0)
    throw Error(ErrorCode::invalid_argument, "lambda_warmup_frac must be in [0,1]");
  if (adam_beta1 < 0.0 || adam_beta1 >= 1.0 || adam_beta2 < 0.0 || adam_beta2 >= 1.0)
    throw Error(ErrorCode::invalid_argument, "adam betas must be in [0,1)");
  if (adam_eps <= 0.0) throw Error(ErrorCode::invalid_argument, "adam_eps must be > 0");
  if (init_scale <= 0.0) throw Error(ErrorCode::invalid_argument, "init_scale must be > 0");
  if (loss_tol <= 0.0) throw Error(ErrorCode::invalid_argument, "loss_tol must be > 0");
  if (stability_window < 1)
    throw Error(ErrorCode::invalid_argument, "stability_window must be >= 1");
  if (cooldown_steps < 1) throw Error(ErrorCode::invalid_argument, "cooldown_steps must be >= 1");
  if (polish_lr_decay <= 0.0 || polish_lr_decay > 1.0)
    throw Error(ErrorCode::invalid_argument, "polish_lr_decay must be in (0,1]");
  if (polish_lr_floor <= 0.0 || polish_lr_floor > 1.0)
    throw Error(ErrorCode::invalid_argument, "polish_lr_floor must be in (0,1]");
  if (log_every < 1) throw Error(ErrorCode::invalid_argument, "log_every must be >= 1");
}

ObservationSet sample_mask(int n, int m, Rng& rng) {
  if (n < 1) throw Error(ErrorCode::invalid_argument, "sample_mask: n must be >= 1");
  if (m < 0 || m > n * n)
    throw Error(ErrorCode::invalid_argument, "sample_mask: m must be in [0, n^2]");
  std::vector<int> idx(static_cast<size_t>(n) * n);
  for (size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<int>(i);
  // partial Fisher-Yates: first m entries are the sample
  for (int i = 0; i < m; ++i) {
    const int j = i + static_cast<int>(rng.uniform_below(idx.size() - i));
    std::swap(idx[i], idx[j]);
  }
  std::vector<std::pair<int, int>> cells;
  cells.reserve(m);
  for (int i = 0; i < m; ++i) cells.emplace_back(idx[i] / n, idx[i] % n);
  if (m == 0) {
    ObservationSet o;
    o.n = n;
    return o;
  }
  return ObservationSet(n, std::move(cells));
}

DecodeResult decode(const FactorParams& p) {
  const int n = p.n;
  DecodeResult out;
  out.table = CayleyTable(n);
  out.margin_min = std::numeric_limits<double>::infinity();
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      const Mat m = gemm(p.A[a], p.B[b]);
      int best = 0;
      double best_v = -std::numeric_limits<double>::infinity();
      double second_v = -std::numeric_limits<double>::infinity();
      for (int c = 0; c < n; ++c) {
        const double v = trace_of_product(m, p.C[c]) / n;
        if (v > best_v) {
          second_v = best_v;
          best_v = v;
          best = c;
        } else if (v > second_v) {
          second_v = v;
        }
      }
      out.table.at(a, b) = best;
      const double margin = (n > 1) ? best_v - second_v : std::numeric_limits<double>::infinity();
      out.margin_min = std::min(out.margin_min, margin);
    }
  if (!std::isfinite(out.margin_min)) out.margin_min = 0.0;
  return out;
}

RecoveryReport evaluate(const CayleyTable& decoded, const CayleyTable& target,
                        const ObservationSet& omega, double flatness_final, double margin_min) {
  if (decoded.n != target.n || omega.n != target.n)
    throw Error(ErrorCode::shape_mismatch, "evaluate: order mismatch");
  const int n = target.n;
  std::vector<bool> observed(static_cast<size_t>(n) * n, false);
  for (auto [a, b] : omega.cells) observed[static_cast<size_t>(a) * n + b] = true;

  int correct = 0, obs_correct = 0, obs_total = 0;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      const bool ok = decoded.at(a, b) == target.at(a, b);
      correct += ok;
      if (observed[static_cast<size_t>(a) * n + b]) {
        ++obs_total;
        obs_correct += ok;
      }
    }
  const int unobs_total = n * n - obs_total;
  const int unobs_correct = correct - obs_correct;

  RecoveryReport rep;
  rep.cell_accuracy = static_cast<double>(correct) / (n * n);
  rep.exact = (correct == n * n);
  rep.observed_accuracy = obs_total ? static_cast<double>(obs_correct) / obs_total : 1.0;
  rep.unobserved_accuracy = unobs_total ? static_cast<double>(unobs_correct) / unobs_total : 1.0;
  rep.flatness_final = flatness_final;
  rep.bound_3n2 = 3.0 * n * n;
  rep.margin_min = margin_min;
  return rep;
}

TrainResult train(const CayleyTable& t, const ObservationSet& omega, const TrainConfig& cfg,
                  uint64_t seed) {
  cfg.validate();
  if (t.n != omega.n) throw Error(ErrorCode::shape_mismatch, "train: order mismatch");
  const int n = t.n;

  Rng rng(seed);
  FactorParams params = init_params(n, cfg.init_scale, rng);

  TrainResult res;
  res.seed = seed;
  if (cfg.steps_max == 0) {
    res.params = params;
    double flat = 0.0;
    res.recon_loss_final = recon_loss(params, t, omega);
    flat = flatness(params, omega);
    res.flatness_final = flat;
    return res;
  }

  GradParams m1(n), m2(n);  // Adam moments
  const int warmup_steps = std::max(1, static_cast<int>(std::lround(cfg.lambda_warmup_frac *
                                                                    cfg.steps_max)));
  const int forced_cooldown_at = cfg.steps_max / 2;

  enum Phase { kFit = 0, kCooldown = 1, kPolish = 2 };
  Phase phase = kFit;
  int t_cooldown = 0;
  int t_polish = 0;
  double lambda_at_cooldown = cfg.lambda;

  int stable = 0;
  CayleyTable last_dec;
  double loss = 0.0, flat = 0.0;

  auto adam_update = [&](std::vector<Mat>& theta, std::vector<Mat>& m1s, std::vector<Mat>& m2s,
                         const std::vector<Mat>& g, double lr_t, int step) {
    const double bc1 = 1.0 - std::pow(cfg.adam_beta1, step + 1);
    const double bc2 = 1.0 - std::pow(cfg.adam_beta2, step + 1);
    for (int s = 0; s < n; ++s) {
      for (size_t k = 0; k < theta[s].data.size(); ++k) {
        const double gv = g[s].data[k];
        double& mv = m1s[s].data[k];
        double& vv = m2s[s].data[k];
        mv = cfg.adam_beta1 * mv + (1.0 - cfg.adam_beta1) * gv;
        vv = cfg.adam_beta2 * vv + (1.0 - cfg.adam_beta2) * gv * gv;
        theta[s].data[k] -= lr_t * (mv / bc1) / (std::sqrt(vv / bc2) + cfg.adam_eps);
      }
    }
  };

  int step = 0;
  for (; step < cfg.steps_max; ++step) {
    double lr_t = cfg.lr;
    double lambda_t;
    switch (phase) {
      case kFit:
        lambda_t = cfg.lambda * std::min(1.0, static_cast<double>(step) / warmup_steps);
        break;
      case kCooldown:
        lambda_t = lambda_at_cooldown *
                   std::max(0.0, 1.0 - static_cast<double>(t_cooldown) / cfg.cooldown_steps);
        ++t_cooldown;
        if (t_cooldown >= cfg.cooldown_steps) phase = kPolish;
        break;
      case kPolish:
        lambda_t = 0.0;
        lr_t = std::max(cfg.lr * cfg.polish_lr_floor,
                        cfg.lr * std::pow(cfg.polish_lr_decay, t_polish));
        ++t_polish;
        break;
    }

    GradParams g = grad(params, t, omega, lambda_t, &loss, &flat);
    // Adam keeps updates bounded, so a pathological lr inflates the loss
    // without ever reaching inf; treat a runaway loss as divergence too.
    if (!std::isfinite(loss) || loss > 1e12) throw DivergedError(step);

    const DecodeResult dec = decode(params);
    if (step > 0 && dec.table == last_dec)
      ++stable;
    else
      stable = 0;
    last_dec = dec.table;

    if (step % cfg.log_every == 0) {
      int correct = 0;
      for (size_t i = 0; i < dec.table.cells.size(); ++i)
        correct += dec.table.cells[i] == t.cells[i];
      res.trajectory.push_back(
          {step, loss, flat, static_cast<double>(correct) / (n * n)});
    }

    if (phase == kFit &&
        ((stable >= cfg.stability_window && step >= warmup_steps) || step >= forced_cooldown_at)) {
      lambda_at_cooldown = cfg.lambda * std::min(1.0, static_cast<double>(step) / warmup_steps);
      phase = kCooldown;
      t_cooldown = 0;
    }
    if (phase == kPolish && loss <= cfg.loss_tol && stable >= cfg.stability_window) {
      res.converged = true;
      break;
    }

    adam_update(params.A, m1.A, m2.A, g.A, lr_t, step);
    adam_update(params.B, m1.B, m2.B, g.B, lr_t, step);
    adam_update(params.C, m1.C, m2.C, g.C, lr_t, step);
  }

  res.params = std::move(params);
  res.steps_used = std::min(step + (res.converged ? 1 : 0), cfg.steps_max);
  res.recon_loss_final = recon_loss(res.params, t, omega);
  res.flatness_final = flatness(res.params, omega);
  res.converged = res.converged && res.recon_loss_final <= cfg.loss_tol;
  {
    const DecodeResult dec = decode(res.params);
    int correct = 0;
    for (size_t i = 0; i < dec.table.cells.size(); ++i)
      correct += dec.table.cells[i] == t.cells[i];
    res.trajectory.push_back({res.steps_used, res.recon_loss_final, res.flatness_final,
                              static_cast<double>(correct) / (n * n)});
  }
  return res;
}

MultiRestartResult multi_restart(const CayleyTable& t, const ObservationSet& omega,
                                 const TrainConfig& cfg, int k, uint64_t base_seed) {
  if (k < 1) throw Error(ErrorCode::invalid_argument, "multi_restart: k must be >= 1");
  MultiRestartResult out;
  bool have_best = false;
  for (int i = 0; i < k; ++i) {
    const uint64_t seed = base_seed + static_cast<uint64_t>(i);
    RestartSummary sum;
    sum.seed = seed;
    try {
      TrainResult r = train(t, omega, cfg, seed);
      sum.converged = r.converged;
      sum.steps_used = r.steps_used;
      sum.recon_loss_final = r.recon_loss_final;
      sum.flatness_final = r.flatness_final;
      sum.exact = decode(r.params).table == t;
      const bool better =
          !have_best ||
          (r.converged && !out.best.converged) ||
          (r.converged == out.best.converged && r.flatness_final < out.best.flatness_final);
      if (better) {
        out.best = std::move(r);
        have_best = true;
      }
    } catch (const DivergedError&) {
      sum.diverged = true;
    }
    out.runs.push_back(sum);
  }
  if (!have_best)
    throw Error(ErrorCode::diverged, "multi_restart: every restart diverged");
  return out;
}

uint64_t mask_seed_for(const std::string& table_id, int m, uint64_t seed) {
  // FNV-1a over the key, stable across platforms
  uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      h ^= (v >> (8 * i)) & 0xff;
      h *= 1099511628211ULL;
    }
  };
  for (char c : table_id) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ULL;
  }
  mix(static_cast<uint64_t>(m));
  mix(seed);
  return h;
}

std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string SweepRow::csv_header() {
  return "table_id,n,m,seed,method,encoding,r,weight_decay,converged,steps,"
         "recon_loss_final,flatness_final,bound_3n2,cell_accuracy,unobserved_accuracy,exact";
}

std::string SweepRow::to_csv() const {
  std::ostringstream os;
  os << table_id << ',' << n << ',' << m << ',' << seed << ',' << method << ',' << encoding << ','
     << r << ',' << format_g17(weight_decay) << ',' << (diverged ? "diverged" : (converged ? "1" : "0"))
     << ',' << steps << ',' << format_g17(recon_loss_final) << ',' << format_g17(flatness_final)
     << ',' << format_g17(bound_3n2) << ',' << format_g17(cell_accuracy) << ','
     << format_g17(unobserved_accuracy) << ',' << (exact ? 1 : 0);
  return os.str();
}

SweepRow SweepRow::from_csv(const std::string& line) {
  std::vector<std::string> f;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      f.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  f.push_back(cur);
  if (f.size() != 16) throw Error(ErrorCode::io_error, "sweep CSV: bad field count");
  SweepRow row;
  row.table_id = f[0];
  row.n = std::stoi(f[1]);
  row.m = std::stoi(f[2]);
  row.seed = std::stoull(f[3]);
  row.method = f[4];
  row.encoding = f[5];
  row.r = std::stoi(f[6]);
  row.weight_decay = std::stod(f[7]);
  row.diverged = f[8] == "diverged";
  row.converged = f[8] == "1";
  row.steps = std::stoi(f[9]);
  row.recon_loss_final = std::stod(f[10]);
  row.flatness_final = std::stod(f[11]);
  row.bound_3n2 = std::stod(f[12]);
  row.cell_accuracy = std::stod(f[13]);
  row.unobserved_accuracy = std::stod(f[14]);
  row.exact = f[15] == "1";
  return row;
}

std::string SweepRow::key() const {
  return table_id + "|" + std::to_string(m) + "|" + std::to_string(seed) + "|" + method + "|" +
         encoding + "|" + std::to_string(r);
}

SweepSummary sweep_sample_complexity(
    const SweepSpec& spec, const std::function<bool(const std::string&)>& already_done,
    const std::function<void(const SweepRow&)>& on_row, std::vector<SweepRow>* prior_rows) {
  if (spec.tables.empty() || spec.m_grid.empty() || spec.seeds < 1)
    throw Error(ErrorCode::invalid_argument, "sweep: empty grid");

  std::vector<SweepRow> rows;
  if (prior_rows) rows = *prior_rows;

  for (const auto& [table_id, table] : spec.tables) {
    const int n = table.n;
    for (int m : spec.m_grid) {
      if (m > n * n) continue;
      for (int s = 0; s < spec.seeds; ++s) {
        const uint64_t seed = spec.seed_base + static_cast<uint64_t>(s);
        SweepRow row;
        row.table_id = table_id;
        row.n = n;
        row.m = m;
        row.seed = seed;
        row.bound_3n2 = 3.0 * n * n;
        if (already_done && already_done(row.key())) continue;

        Rng mask_rng(mask_seed_for(table_id, m, seed));
        const ObservationSet omega = sample_mask(n, m, mask_rng);
        try {
          TrainResult res = train(table, omega, spec.cfg, seed);
          const DecodeResult dec = decode(res.params);
          const RecoveryReport rep =
              evaluate(dec.table, table, omega, res.flatness_final, dec.margin_min);
          row.converged = res.converged;
          row.steps = res.steps_used;
          row.recon_loss_final = res.recon_loss_final;
          row.flatness_final = res.flatness_final;
          row.cell_accuracy = rep.cell_accuracy;
          row.unobserved_accuracy = rep.unobserved_accuracy;
          row.exact = rep.exact;
        } catch (const DivergedError& e) {
          row.diverged = true;
          row.steps = e.step();
        }
        if (on_row) on_row(row);
        rows.push_back(row);
      }
    }
  }

  SweepSummary summary;
  for (const auto& [table_id, table] : spec.tables) {
    std::optional<int> m_star;
    for (int m : spec.m_grid) {
      if (m > table.n * table.n) continue;
      SweepAggregate agg;
      agg.table_id = table_id;
      agg.n = table.n;
      agg.m = m;
      for (const SweepRow& row : rows)
        if (row.table_id == table_id && row.m == m && row.method == "tensor") {
          ++agg.runs;
          agg.exact_count += row.exact;
        }
      if (agg.runs == 0) continue;
      agg.recovery_rate = static_cast<double>(agg.exact_count) / agg.runs;
      if (!m_star && agg.recovery_rate >= 0.9) m_star = m;
      summary.aggregates.push_back(agg);
    }
    summary.m_star.emplace_back(table_id, m_star);
  }
  return summary;
}

LandscapeSummary landscape_probe(const CayleyTable& t, const TrainConfig& cfg, int k,
                                 uint64_t base_seed, const std::string& table_id) {
  if (!is_latin(t)) throw Error(ErrorCode::not_latin, "landscape_probe: table not Latin");
  const ObservationSet omega = ObservationSet::full(t.n);
  const MultiRestartResult mr = multi_restart(t, omega, cfg, k, base_seed);

  LandscapeSummary s;
  s.table_id = table_id;
  s.n = t.n;
  s.k = k;
  s.bound = 3.0 * t.n * t.n;
  for (const RestartSummary& run : mr.runs) s.converged_count += run.converged;
  if (s.converged_count == 0)
    throw Error(ErrorCode::probe_failed, "landscape_probe: no converged run among restarts");

  s.best_flatness = std::numeric_limits<double>::infinity();
  for (const RestartSummary& run : mr.runs)
    if (run.converged) s.best_flatness = std::min(s.best_flatness, run.flatness_final);
  s.gap = s.best_flatness - s.bound;

  // unitarity diagnostic on the best run's slices
  const FactorParams& p = mr.best.params;
  double spread_max = 0.0;
  for (const auto* stack : {&p.A, &p.B, &p.C})
    for (const Mat& slice : *stack) {
      const auto sv = singular_values(slice);
      if (sv.front() > 0.0)
        spread_max = std::max(spread_max, (sv.front() - sv.back()) / sv.front());
    }
  s.sv_spread_max = spread_max;
  return s;
}

std::string landscape_to_json(const LandscapeSummary& s) {
  std::ostringstream os;
  os << "{\"table_id\":\"" << s.table_id << "\",\"n\":" << s.n << ",\"k\":" << s.k
     << ",\"converged_count\":" << s.converged_count
     << ",\"best_flatness\":" << format_g17(s.best_flatness)
     << ",\"bound\":" << format_g17(s.bound) << ",\"gap\":" << format_g17(s.gap)
     << ",\"sv_spread_max\":" << format_g17(s.sv_spread_max) << "}";
  return os.str();
}

std::string train_result_to_json(const TrainResult& res, const RecoveryReport& rep,
                                 const TrainConfig& cfg, const std::string& table_id,
                                 int m_observed) {
  std::ostringstream os;
  os << "{\"table_id\":\"" << table_id << "\",\"n\":" << res.params.n
     << ",\"m\":" << m_observed << ",\"seed\":" << res.seed
     << ",\"config\":{\"lr\":" << format_g17(cfg.lr) << ",\"steps_max\":" << cfg.steps_max
     << ",\"lambda\":" << format_g17(cfg.lambda)
     << ",\"lambda_warmup_frac\":" << format_g17(cfg.lambda_warmup_frac)
     << ",\"adam_beta1\":" << format_g17(cfg.adam_beta1)
     << ",\"adam_beta2\":" << format_g17(cfg.adam_beta2)
     << ",\"adam_eps\":" << format_g17(cfg.adam_eps)
     << ",\"init_scale\":" << format_g17(cfg.init_scale)
     << ",\"loss_tol\":" << format_g17(cfg.loss_tol)
     << ",\"stability_window\":" << cfg.stability_window
     << ",\"cooldown_steps\":" << cfg.cooldown_steps
     << ",\"polish_lr_decay\":" << format_g17(cfg.polish_lr_decay)
     << ",\"polish_lr_floor\":" << format_g17(cfg.polish_lr_floor)
     << ",\"log_every\":" << cfg.log_every << "}"
     << ",\"converged\":" << (res.converged ? "true" : "false")
     << ",\"steps_used\":" << res.steps_used
     << ",\"recon_loss_final\":" << format_g17(res.recon_loss_final)
     << ",\"flatness_final\":" << format_g17(res.flatness_final)
     << ",\"report\":{\"exact\":" << (rep.exact ? "true" : "false")
     << ",\"cell_accuracy\":" << format_g17(rep.cell_accuracy)
     << ",\"observed_accuracy\":" << format_g17(rep.observed_accuracy)
     << ",\"unobserved_accuracy\":" << format_g17(rep.unobserved_accuracy)
     << ",\"flatness_final\":" << format_g17(rep.flatness_final)
     << ",\"bound_3n2\":" << format_g17(rep.bound_3n2)
     << ",\"margin_min\":" << format_g17(rep.margin_min) << "}"
     << ",\"trajectory\":[";
  for (size_t i = 0; i < res.trajectory.size(); ++i) {
    const auto& pt = res.trajectory[i];
    if (i) os << ',';
    os << "{\"step\":" << pt.step << ",\"recon_loss\":" << format_g17(pt.recon_loss)
       << ",\"flatness\":" << format_g17(pt.flatness)
       << ",\"decode_accuracy\":" << format_g17(pt.decode_accuracy) << "}";
  }
  os << "]}";
  return os.str();
}

}  // namespace cayrec
