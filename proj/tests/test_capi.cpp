#include <doctest.h>

#include <cstdio>
#include <string>

#include <cayrec.h>

namespace {

std::string slurp(const char* path) {
  FILE* f = std::fopen(path, "rb");
  REQUIRE(f != nullptr);
  std::string out;
  char buf[4096];
  size_t got;
  while ((got = std::fread(buf, 1, sizeof buf, f)) > 0) out.append(buf, got);
  std::fclose(f);
  return out;
}

}  // namespace

TEST_CASE("table constructors and queries") {
  cayrec_table* t = nullptr;
  REQUIRE(cayrec_table_cyclic(4, &t) == CAYREC_OK);
  CHECK(cayrec_table_order(t) == 4);
  CHECK(cayrec_table_cell(t, 1, 2) == 3);
  CHECK(cayrec_table_cell(t, 4, 0) == -1);
  CHECK(cayrec_table_is_latin(t) == 1);
  CHECK(cayrec_table_is_associative(t) == 1);
  CHECK(cayrec_table_is_isotopic_to_group(t) == 1);

  CHECK(cayrec_table_cyclic(0, &t) == CAYREC_ERR_INVALID_ARG);
  CHECK(std::string(cayrec_last_error()).size() > 0);

  cayrec_table* d = nullptr;
  REQUIRE(cayrec_table_dihedral(3, &d) == CAYREC_OK);
  CHECK(cayrec_table_order(d) == 6);
  CHECK(cayrec_table_is_associative(d) == 1);

  cayrec_table* prod = nullptr;
  REQUIRE(cayrec_table_product(t, d, &prod) == CAYREC_OK);
  CHECK(cayrec_table_order(prod) == 24);
  CHECK(cayrec_table_is_latin(prod) == 1);

  cayrec_table* q = nullptr;
  REQUIRE(cayrec_table_nonassociative(5, 7, &q) == CAYREC_OK);
  CHECK(cayrec_table_is_latin(q) == 1);
  CHECK(cayrec_table_is_associative(q) == 0);
  CHECK(cayrec_table_is_isotopic_to_group(q) == 0);
  CHECK(cayrec_table_nonassociative(4, 0, &q) != CAYREC_OK);

  cayrec_table_free(prod);
  cayrec_table_free(q);
  cayrec_table_free(d);
  cayrec_table_free(t);
}

TEST_CASE("table file io round trip") {
  cayrec_table* t = nullptr;
  REQUIRE(cayrec_table_random_latin(5, 11, &t) == CAYREC_OK);
  const char* jpath = "capi_table.json";
  const char* tpath = "capi_table.txt";
  REQUIRE(cayrec_table_write_file(t, jpath, "json") == CAYREC_OK);
  REQUIRE(cayrec_table_write_file(t, tpath, "text") == CAYREC_OK);
  CHECK(cayrec_table_write_file(t, tpath, "yaml") == CAYREC_ERR_INVALID_ARG);

  for (const char* path : {jpath, tpath}) {
    cayrec_table* back = nullptr;
    REQUIRE(cayrec_table_read_file(path, &back) == CAYREC_OK);
    CHECK(cayrec_table_order(back) == 5);
    for (int a = 0; a < 5; ++a)
      for (int b = 0; b < 5; ++b)
        CHECK(cayrec_table_cell(back, a, b) == cayrec_table_cell(t, a, b));
    cayrec_table_free(back);
  }
  cayrec_table* missing = nullptr;
  CHECK(cayrec_table_read_file("no_such_file.json", &missing) == CAYREC_ERR_IO);

  std::remove(jpath);
  std::remove(tpath);
  cayrec_table_free(t);
}

TEST_CASE("train run through the c api") {
  cayrec_table* t = nullptr;
  REQUIRE(cayrec_table_cyclic(3, &t) == CAYREC_OK);
  cayrec_train_config cfg;
  cayrec_train_config_defaults(&cfg);
  CHECK(cfg.lr == 1e-2);
  CHECK(cfg.steps_max == 50000);
  cfg.steps_max = 20000;

  cayrec_train_report rep;
  const char* rpath = "capi_result.json";
  const char* cpath = "capi_ckpt.json";
  REQUIRE(cayrec_train_run(t, 9, 1, &cfg, 1, rpath, cpath, &rep) == CAYREC_OK);
  CHECK(rep.converged == 1);
  CHECK(rep.exact == 1);
  CHECK(rep.recon_loss_final <= cfg.loss_tol);
  CHECK(rep.cell_accuracy == 1.0);
  CHECK(rep.bound_3n2 == 27.0);
  CHECK(rep.flatness_final < 1.10 * 27.0);

  const std::string result = slurp(rpath);
  CHECK(result.find("\"converged\"") != std::string::npos);
  const std::string ckpt = slurp(cpath);
  CHECK(ckpt.find("0x") != std::string::npos);  // hexfloat entries

  // divergent config surfaces as a status, not a crash
  cfg.lr = 1e6;
  cfg.steps_max = 2000;
  CHECK(cayrec_train_run(t, 9, 1, &cfg, 1, nullptr, nullptr, &rep) == CAYREC_ERR_DIVERGED);

  std::remove(rpath);
  std::remove(cpath);
  cayrec_table_free(t);
}

TEST_CASE("encoding rank through the c api") {
  cayrec_table* t = nullptr;
  REQUIRE(cayrec_table_cyclic(5, &t) == CAYREC_OK);
  CHECK(cayrec_table_encoding_rank(t, "ordinal") == 5);
  CHECK(cayrec_table_encoding_rank(t, "onehot") == 5);
  CHECK(cayrec_table_encoding_rank(t, "bogus") < 0);
  cayrec_table_free(t);
}

TEST_CASE("baseline run through the c api") {
  cayrec_table* t = nullptr;
  REQUIRE(cayrec_table_cyclic(4, &t) == CAYREC_OK);
  cayrec_train_config cfg;
  cayrec_train_config_defaults(&cfg);
  cfg.steps_max = 20000;
  cayrec_train_report rep;
  REQUIRE(cayrec_baseline_run(t, 16, 1, "ordinal", 4, 0.0, &cfg, 1, &rep) == CAYREC_OK);
  CHECK(rep.converged == 1);
  CHECK(rep.exact == 1);
  cayrec_table_free(t);
}

TEST_CASE("landscape run through the c api") {
  cayrec_table* t = nullptr;
  REQUIRE(cayrec_table_cyclic(3, &t) == CAYREC_OK);
  cayrec_train_config cfg;
  cayrec_train_config_defaults(&cfg);
  cfg.steps_max = 20000;
  char* json = nullptr;
  REQUIRE(cayrec_landscape_run(t, "cyclic3", &cfg, 2, 50, nullptr, &json) == CAYREC_OK);
  REQUIRE(json != nullptr);
  const std::string text(json);
  CHECK(text.find("\"bound\":27") != std::string::npos);
  cayrec_string_free(json);
  cayrec_table_free(t);
}

TEST_CASE("sweep run through the c api") {
  const char* spec = R"({
    "tables": [{"family": "cyclic", "n": 3}],
    "m_grid": [9],
    "seeds": 1,
    "seed_base": 0,
    "config": {"steps_max": 20000}
  })";
  const char* csv = "capi_sweep.csv";
  const char* summary = "capi_sweep_summary.json";
  std::remove(csv);
  REQUIRE(cayrec_sweep_run(spec, csv, summary) == CAYREC_OK);
  const std::string rows = slurp(csv);
  CHECK(rows.find("table_id") == 0);
  CHECK(rows.find("cyclic3") != std::string::npos);
  // resume: rerunning adds nothing
  REQUIRE(cayrec_sweep_run(spec, csv, summary) == CAYREC_OK);
  CHECK(slurp(csv) == rows);
  const std::string sum = slurp(summary);
  CHECK(sum.find("m_star") != std::string::npos);
  std::remove(csv);
  std::remove(summary);
}

TEST_CASE("verification suite passes through the c api") {
  char* json = nullptr;
  REQUIRE(cayrec_verify(12345, nullptr, &json) == CAYREC_OK);
  REQUIRE(json != nullptr);
  const std::string text(json);
  CHECK(text.find("grad_matches_finite_differences") != std::string::npos);
  CHECK(text.find("\"pass\":false") == std::string::npos);
  cayrec_string_free(json);
}
