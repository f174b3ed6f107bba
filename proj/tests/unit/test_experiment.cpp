#include <doctest.h>

#include <cmath>
#include <sstream>

#include "pcopt/experiment.hpp"

using namespace pcopt;

namespace {

std::string key_of(const Settings& s) {
  try {
    build_experiment(s);
  } catch (const ConfigError& e) {
    return e.key();
  }
  return "";
}

Settings with(std::string k, std::string v) {
  Settings s = default_settings();
  s[std::move(k)] = std::move(v);
  return s;
}

}  // namespace

TEST_CASE("presets") {
  for (const auto& name : preset_names()) {
    INFO(name);
    const Settings s = preset_settings(name);
    if (name != "woods-bestfit") CHECK_NOTHROW(build_experiment(s));
  }
  const auto q = build_experiment(preset_settings("quadratic-fixed")).run;
  CHECK(q.benchmark == Benchmark::Quadratic2d);
  CHECK(q.iterations == 6);
  CHECK(q.batch_size == 30);
  CHECK(std::get<FixedBeta>(q.schedule).beta == 5.0);

  const auto a = build_experiment(preset_settings("quadratic-anneal")).run;
  CHECK(std::get<MultiplicativeBeta>(a.schedule).beta_init == 10.0);
  CHECK(std::get<MultiplicativeBeta>(a.schedule).factor == 1.5);

  const auto w = build_experiment(preset_settings("woods-cv")).run;
  CHECK(w.benchmark == Benchmark::Woods4d);
  CHECK(w.iterations == 30);
  CHECK(w.batch_size == 20);
  CHECK(std::get<CrossValidatedBeta>(w.schedule).cv.k2 == 3.0);

  const auto b = build_experiment(preset_settings("rosenbrock-bagging")).run;
  REQUIRE(b.bagging.has_value());
  CHECK(b.bagging->replicates == 5);
  CHECK(b.noise_half_width == 0.25);
  CHECK(b.batch_size == 20);

  const auto m = build_experiment(preset_settings("rosenbrock-modelcv")).run;
  const auto& cv = std::get<CrossValidatedModel>(m.model_policy);
  REQUIRE(cv.candidates.size() == 3);
  CHECK(cv.candidates[0] == ModelSpec::single_gaussian());
  CHECK(cv.candidates[2] == ModelSpec::mixture(3));
  CHECK_FALSE(m.bagging.has_value());

  CHECK_THROWS_AS(preset_settings("nope"), ConfigError);
}

TEST_CASE("settings files") {
  std::istringstream in("# comment\nbeta = 2.5\n\n  iterations=3  # trailing\n");
  const Settings s = parse_settings(in);
  CHECK(s.at("beta") == "2.5");
  CHECK(s.at("iterations") == "3");
  CHECK(s.size() == 2);

  std::istringstream bad("betta = 1\n");
  try {
    parse_settings(bad);
    FAIL("expected an error");
  } catch (const ConfigError& e) {
    CHECK(e.key() == "betta");
  }
  std::istringstream malformed("just words\n");
  CHECK_THROWS_AS(parse_settings(malformed), ConfigError);

  Settings base = default_settings();
  CHECK_THROWS_AS(apply_settings(base, {{"unknown", "1"}}), ConfigError);
  apply_settings(base, {{"seed", "9"}});
  CHECK(build_experiment(base).run.seed == 9);
  CHECK(format_settings({{"a", "1"}, {"b", "x"}}) == "a = 1\nb = x\n");
}

TEST_CASE("invalid values name their key") {
  CHECK(key_of(with("beta", "abc")) == "beta");
  CHECK(key_of(with("beta", "-1")) == "beta");
  CHECK(key_of(with("iterations", "0")) == "iterations");
  CHECK(key_of(with("batch_size", "2.5")) == "batch_size");
  CHECK(key_of(with("benchmark", "sphere")) == "benchmark");
  CHECK(key_of(with("schedule", "linear")) == "schedule");
  CHECK(key_of(with("noise", "-0.5")) == "noise");
  CHECK(key_of(with("model_cv", "1,x")) == "model_cv");
  CHECK(key_of(with("diagnostics", "maybe")) == "diagnostics");
  Settings m = with("schedule", "multiplicative");
  m["beta_factor"] = "1";
  CHECK(key_of(m) == "beta_factor");
  Settings c = with("schedule", "cv");
  c["cv_k1"] = "1.5";
  CHECK(key_of(c) == "cv_k1");
  CHECK(key_of(with("beta_rule_csv", "x.csv")) == "beta_rule_csv");
}

TEST_CASE("number formatting uses nine significant digits") {
  CHECK(format_number(0.1) == "0.1");
  CHECK(format_number(1.0 / 3.0) == "0.333333333");
  CHECK(format_number(1e-20) == "1e-20");
  CHECK(format_number(22.5) == "22.5");
}

TEST_CASE("CSV rows round trip") {
  CHECK(kCsvHeader == "run_id,iteration,oracle_calls,beta,model_components,e_qg,kl_pq,best_g");
  CsvRow r{2, 7, 140, 0.0125, 3, 0.5, std::nullopt, -1.25};
  CHECK(format_csv_row(r) == "2,7,140,0.0125,3,0.5,,-1.25");
  std::stringstream ss;
  ss << kCsvHeader << '\n' << format_csv_row(r) << '\n';
  const auto back = read_csv(ss);
  REQUIRE(back.size() == 1);
  CHECK(back[0].run_id == 2);
  CHECK(back[0].oracle_calls == 140);
  CHECK(back[0].beta == 0.0125);
  CHECK(back[0].e_qg == 0.5);
  CHECK_FALSE(back[0].kl_pq.has_value());

  std::istringstream wrong("a,b\n");
  CHECK_THROWS_AS(read_csv(wrong), InvalidArgument);
  std::istringstream short_line(std::string(kCsvHeader) + "\n1,2,3\n");
  CHECK_THROWS_AS(read_csv(short_line), InvalidArgument);
}

TEST_CASE("multiplicative rule from logged betas") {
  std::vector<CsvRow> rows;
  for (int run = 0; run < 3; ++run) {
    for (int t = 1; t <= 5; ++t) {
      CsvRow r;
      r.run_id = run;
      r.iteration = t;
      r.beta = 0.02 * std::pow(1.7, t - 1) * std::exp(0.1 * (run - 1));
      rows.push_back(r);
    }
  }
  const auto rule = fit_multiplicative_rule(rows);
  CHECK(rule.beta_init == doctest::Approx(0.02));
  CHECK(rule.factor == doctest::Approx(1.7));
  rows.resize(1);
  CHECK_THROWS_AS(fit_multiplicative_rule(rows), InvalidArgument);
}

TEST_CASE("median") {
  CHECK(median({3.0, 1.0, 2.0}) == 2.0);
  CHECK(median({4.0, 1.0, 2.0, 3.0}) == 2.5);
  CHECK(std::isnan(median({})));
}

TEST_CASE("experiment runs use consecutive seeds") {
  Settings s = preset_settings("quadratic-fixed");
  s["runs"] = "3";
  s["iterations"] = "2";
  s["kl_diagnostic"] = "false";
  s["seed"] = "10";
  const auto cfg = build_experiment(s);
  std::vector<int> seen;
  const auto r = run_experiment(cfg, [&](int id, const RunHistory&) { seen.push_back(id); });
  CHECK(seen == std::vector<int>{0, 1, 2});
  CHECK(r.rows.size() == 6);
  CHECK(r.total_oracle_calls == 180);

  RunConfig single = cfg.run;
  single.seed = 11;
  const auto h = run(single);
  CHECK(h.records.back().best_g == r.histories[1].records.back().best_g);
}
