#include <doctest.h>

#include <set>

#include "cayrec/engine.hpp"

using namespace cayrec;

TEST_CASE("sample_mask") {
  Rng rng(1);
  CHECK(sample_mask(4, 0, rng).cells.empty());
  const ObservationSet all = sample_mask(4, 16, rng);
  CHECK(all.is_full());

  Rng rng2(2);
  const ObservationSet part = sample_mask(5, 12, rng2);
  CHECK(part.cells.size() == 12);
  std::set<std::pair<int, int>> seen(part.cells.begin(), part.cells.end());
  CHECK(seen.size() == 12);
  CHECK_THROWS_AS(sample_mask(3, 10, rng2), Error);

  // deterministic in the rng seed
  Rng a(9), b(9);
  CHECK(sample_mask(6, 20, a).cells == sample_mask(6, 20, b).cells);
}

TEST_CASE("decode of the regular representation recovers the table") {
  for (int n : {3, 4, 5}) {
    const CayleyTable t = cyclic_group(n);
    const DecodeResult d = decode(regular_representation(t));
    CHECK(d.table == t);
    CHECK(d.margin_min > 0.5);
  }
}

TEST_CASE("decode ties break toward the smallest index") {
  const DecodeResult d = decode(FactorParams(3));
  for (int v : d.table.cells) CHECK(v == 0);
  CHECK(d.margin_min == 0.0);
}

TEST_CASE("evaluate") {
  const CayleyTable t = cyclic_group(4);
  const ObservationSet omega(4, {{0, 0}, {1, 1}, {2, 3}});
  const RecoveryReport exact = evaluate(t, t, omega, 48.0, 0.4);
  CHECK(exact.exact);
  CHECK(exact.cell_accuracy == 1.0);
  CHECK(exact.observed_accuracy == 1.0);
  CHECK(exact.unobserved_accuracy == 1.0);
  CHECK(exact.bound_3n2 == 48.0);
  CHECK(exact.margin_min == 0.4);

  CayleyTable wrong = t;
  wrong.at(0, 0) = (wrong.at(0, 0) + 1) % 4;  // an observed cell
  const RecoveryReport r = evaluate(wrong, t, omega, 0.0);
  CHECK(!r.exact);
  CHECK(r.cell_accuracy == doctest::Approx(15.0 / 16.0));
  CHECK(r.observed_accuracy == doctest::Approx(2.0 / 3.0));
  CHECK(r.unobserved_accuracy == 1.0);

  // full observation: unobserved accuracy defined as 1
  const RecoveryReport full = evaluate(wrong, t, ObservationSet::full(4), 0.0);
  CHECK(full.unobserved_accuracy == 1.0);
}

TEST_CASE("train recovers Z3 from full observation") {
  const CayleyTable t = cyclic_group(3);
  TrainConfig cfg;
  cfg.steps_max = 20000;
  const TrainResult res = train(t, ObservationSet::full(3), cfg, 1);
  CHECK(res.converged);
  CHECK(res.recon_loss_final <= cfg.loss_tol);
  CHECK(decode(res.params).table == t);
  CHECK(res.flatness_final < 1.10 * 27.0);
  CHECK(!res.trajectory.empty());
}

TEST_CASE("train is deterministic in its seed") {
  const CayleyTable t = cyclic_group(3);
  TrainConfig cfg;
  cfg.steps_max = 2000;  // need not converge; bitwise trajectory equality is the point
  const TrainResult a = train(t, ObservationSet::full(3), cfg, 5);
  const TrainResult b = train(t, ObservationSet::full(3), cfg, 5);
  CHECK(a.steps_used == b.steps_used);
  CHECK(a.recon_loss_final == b.recon_loss_final);
  CHECK(a.flatness_final == b.flatness_final);
  CHECK(pack(a.params) == pack(b.params));
}

TEST_CASE("train rejects bad configs and reports divergence") {
  const CayleyTable t = cyclic_group(3);
  TrainConfig bad;
  bad.lr = -1.0;
  CHECK_THROWS_AS(train(t, ObservationSet::full(3), bad, 0), Error);

  TrainConfig huge;
  huge.lr = 1e6;  // blows up immediately
  huge.steps_max = 2000;
  CHECK_THROWS_AS(train(t, ObservationSet::full(3), huge, 0), DivergedError);
}

TEST_CASE("train with steps_max 0 returns the initialization unconverged") {
  const CayleyTable t = cyclic_group(3);
  TrainConfig cfg;
  cfg.steps_max = 0;
  const TrainResult res = train(t, ObservationSet::full(3), cfg, 3);
  CHECK(!res.converged);
  CHECK(res.steps_used == 0);
}

TEST_CASE("multi_restart picks a converged run") {
  const CayleyTable t = cyclic_group(3);
  TrainConfig cfg;
  cfg.steps_max = 20000;
  const MultiRestartResult mr = multi_restart(t, ObservationSet::full(3), cfg, 3, 100);
  CHECK(mr.runs.size() == 3);
  CHECK(mr.best.converged);
  for (const auto& run : mr.runs)
    if (run.converged) CHECK(mr.best.flatness_final <= run.flatness_final + 1e-12);
}

TEST_CASE("sweep row csv round trip") {
  SweepRow row;
  row.table_id = "cyclic6";
  row.n = 6;
  row.m = 20;
  row.seed = 3;
  row.method = "mc";
  row.encoding = "onehot";
  row.r = 4;
  row.weight_decay = 0.001;
  row.converged = true;
  row.steps = 1234;
  row.recon_loss_final = 1.25e-9;
  row.flatness_final = 0.0;
  row.bound_3n2 = 108.0;
  row.cell_accuracy = 0.9722222222222222;
  row.unobserved_accuracy = 0.9375;
  row.exact = false;
  const SweepRow back = SweepRow::from_csv(row.to_csv());
  CHECK(back.to_csv() == row.to_csv());
  CHECK(back.key() == row.key());
  CHECK(SweepRow::csv_header().substr(0, 8) == "table_id");
}

TEST_CASE("mask_seed_for is stable and separates cells") {
  CHECK(mask_seed_for("cyclic6", 20, 3) == mask_seed_for("cyclic6", 20, 3));
  CHECK(mask_seed_for("cyclic6", 20, 3) != mask_seed_for("cyclic6", 20, 4));
  CHECK(mask_seed_for("cyclic6", 20, 3) != mask_seed_for("cyclic6", 21, 3));
  CHECK(mask_seed_for("cyclic6", 20, 3) != mask_seed_for("cyclic8", 20, 3));
}

TEST_CASE("sweep skips already-done keys and streams rows") {
  SweepSpec spec;
  spec.tables.emplace_back("cyclic3", cyclic_group(3));
  spec.m_grid = {9};
  spec.seeds = 2;
  spec.cfg.steps_max = 20000;
  std::vector<SweepRow> rows;
  const SweepSummary sum = sweep_sample_complexity(
      spec, [](const std::string&) { return false; },
      [&](const SweepRow& r) { rows.push_back(r); });
  CHECK(rows.size() == 2);
  REQUIRE(sum.aggregates.size() == 1);
  CHECK(sum.aggregates[0].runs == 2);
  CHECK(sum.aggregates[0].exact_count == 2);
  REQUIRE(sum.m_star.size() == 1);
  CHECK(sum.m_star[0].second.has_value());
  CHECK(*sum.m_star[0].second == 9);

  // all keys already present: nothing runs, prior rows feed the summary
  std::vector<SweepRow> prior = rows;
  std::vector<SweepRow> fresh;
  const SweepSummary sum2 = sweep_sample_complexity(
      spec, [&](const std::string& key) {
        for (const auto& r : prior)
          if (r.key() == key) return true;
        return false;
      },
      [&](const SweepRow& r) { fresh.push_back(r); }, &prior);
  CHECK(fresh.empty());
  REQUIRE(sum2.aggregates.size() == 1);
  CHECK(sum2.aggregates[0].runs == 2);
}

TEST_CASE("landscape probe on Z3") {
  TrainConfig cfg;
  cfg.steps_max = 20000;
  const LandscapeSummary s = landscape_probe(cyclic_group(3), cfg, 2, 50, "cyclic3");
  CHECK(s.converged_count >= 1);
  CHECK(s.bound == 27.0);
  // the fit is only loss_tol-exact, so flatness may sit marginally below
  // the exact-fit bound
  CHECK(s.best_flatness >= s.bound - 0.05);
  CHECK(s.gap == doctest::Approx(s.best_flatness - s.bound));
  CHECK(s.sv_spread_max >= 0.0);
  const std::string json = landscape_to_json(s);
  CHECK(json.find("cyclic3") != std::string::npos);
}

TEST_CASE("train_result_to_json is byte stable") {
  const CayleyTable t = cyclic_group(3);
  TrainConfig cfg;
  cfg.steps_max = 1500;
  const TrainResult a = train(t, ObservationSet::full(3), cfg, 8);
  const TrainResult b = train(t, ObservationSet::full(3), cfg, 8);
  const DecodeResult da = decode(a.params), db = decode(b.params);
  const RecoveryReport ra = evaluate(da.table, t, ObservationSet::full(3), a.flatness_final, da.margin_min);
  const RecoveryReport rb = evaluate(db.table, t, ObservationSet::full(3), b.flatness_final, db.margin_min);
  CHECK(train_result_to_json(a, ra, cfg, "cyclic3", 9) == train_result_to_json(b, rb, cfg, "cyclic3", 9));
}
