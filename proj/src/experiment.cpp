#include "pcopt/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <sstream>

namespace pcopt {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

// Typed accessors that report the key on failure.
class Reader {
 public:
  explicit Reader(const Settings& s) : s_(s) {}

  const std::string& text(const std::string& key) const {
    const auto it = s_.find(key);
    if (it == s_.end()) throw ConfigError(key, "missing");
    return it->second;
  }

  double real(const std::string& key) const {
    const std::string& v = text(key);
    try {
      std::size_t used = 0;
      const double d = std::stod(v, &used);
      if (used != v.size() || !std::isfinite(d)) throw std::invalid_argument(v);
      return d;
    } catch (const std::exception&) {
      throw ConfigError(key, "expected a number, got '" + v + "'");
    }
  }

  long long integer(const std::string& key, long long lo) const {
    const std::string& v = text(key);
    long long out = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size()) {
      throw ConfigError(key, "expected an integer, got '" + v + "'");
    }
    if (out < lo) throw ConfigError(key, "must be >= " + std::to_string(lo));
    return out;
  }

  bool boolean(const std::string& key) const {
    const std::string& v = text(key);
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw ConfigError(key, "expected true or false, got '" + v + "'");
  }

 private:
  const Settings& s_;
};

Settings overlay(Settings base, const Settings& extra) {
  for (const auto& [k, v] : extra) base[k] = v;
  return base;
}

MultiplicativeRule rule_from_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("beta_rule_csv", "cannot open '" + path + "'");
  try {
    return fit_multiplicative_rule(read_csv(in));
  } catch (const std::exception& e) {
    throw ConfigError("beta_rule_csv", e.what());
  }
}

}  // namespace

const Settings& default_settings() {
  static const Settings defaults = {
      {"bagging_replicates", "0"},
      {"batch_size", "30"},
      {"benchmark", "quadratic2d"},
      {"beta", "5"},
      {"beta_factor", "1.5"},
      {"beta_rule_csv", ""},
      {"components", "1"},
      {"cv_folds", "10"},
      {"cv_k1", "0.5"},
      {"cv_k2", "2"},
      {"cv_max_ext_iter", "4"},
      {"cv_n_beta", "5"},
      {"diagnostic_samples", "1000"},
      {"diagnostics", "true"},
      {"em_max_iters", "200"},
      {"em_restarts", "5"},
      {"em_tol", "1e-8"},
      {"iterations", "6"},
      {"kl_diagnostic", "true"},
      {"max_oracle_calls", "0"},
      {"model_cv", ""},
      {"model_cv_folds", "10"},
      {"noise", "0"},
      {"runs", "1"},
      {"schedule", "fixed"},
      {"seed", "1"},
  };
  return defaults;
}

std::vector<std::string> preset_names() {
  return {"quadratic-fixed",    "quadratic-anneal",   "rosenbrock-cv", "woods-cv",
          "woods-bestfit",      "rosenbrock-bagging", "rosenbrock-modelcv"};
}

Settings preset_settings(std::string_view name) {
  const Settings rosenbrock_cv = {
      {"benchmark", "rosenbrock2d"}, {"schedule", "cv"},       {"beta", "0.001"},
      {"iterations", "20"},          {"batch_size", "10"},     {"cv_max_ext_iter", "4"},
      {"cv_k1", "0.5"},              {"cv_k2", "2"},           {"cv_n_beta", "5"},
      {"cv_folds", "10"},            {"kl_diagnostic", "false"},
  };
  const Settings woods_cv = {
      {"benchmark", "woods4d"}, {"schedule", "cv"}, {"beta", "0.001"},     {"iterations", "30"},
      {"batch_size", "20"},     {"cv_max_ext_iter", "4"}, {"cv_k1", "0.5"}, {"cv_k2", "3"},
      {"cv_n_beta", "5"},       {"cv_folds", "10"},       {"kl_diagnostic", "false"},
  };
  const Settings noisy_rosenbrock =
      overlay(rosenbrock_cv, {{"batch_size", "20"}, {"noise", "0.25"}, {"iterations", "40"}});

  Settings s = default_settings();
  if (name == "quadratic-fixed") {
    return overlay(s, {{"benchmark", "quadratic2d"},
                       {"schedule", "fixed"},
                       {"beta", "5"},
                       {"batch_size", "30"},
                       {"iterations", "6"}});
  }
  if (name == "quadratic-anneal") {
    return overlay(s, {{"benchmark", "quadratic2d"},
                       {"schedule", "multiplicative"},
                       {"beta", "10"},
                       {"beta_factor", "1.5"},
                       {"batch_size", "30"},
                       {"iterations", "6"}});
  }
  if (name == "rosenbrock-cv") return overlay(s, rosenbrock_cv);
  if (name == "woods-cv") return overlay(s, woods_cv);
  if (name == "woods-bestfit") return overlay(overlay(s, woods_cv), {{"schedule", "multiplicative"}});
  if (name == "rosenbrock-bagging") {
    return overlay(overlay(s, noisy_rosenbrock), {{"bagging_replicates", "5"}});
  }
  if (name == "rosenbrock-modelcv") return overlay(overlay(s, noisy_rosenbrock), {{"model_cv", "1,2,3"}});
  throw ConfigError("preset", "unknown preset '" + std::string(name) + "'");
}

Settings parse_settings(std::istream& in) {
  Settings out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    const std::string body = trim(std::string_view(line).substr(0, hash));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(lineno), "expected 'key = value'");
    }
    const std::string key = trim(std::string_view(body).substr(0, eq));
    if (!default_settings().count(key)) throw ConfigError(key, "unknown key");
    out[key] = trim(std::string_view(body).substr(eq + 1));
  }
  return out;
}

Settings read_settings_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot open '" + path + "'");
  return parse_settings(in);
}

void apply_settings(Settings& base, const Settings& overrides) {
  for (const auto& [k, v] : overrides) {
    if (!default_settings().count(k)) throw ConfigError(k, "unknown key");
    base[k] = v;
  }
}

ExperimentConfig build_experiment(const Settings& raw) {
  Settings s = overlay(default_settings(), raw);
  for (const auto& [k, v] : raw) {
    if (!default_settings().count(k)) throw ConfigError(k, "unknown key");
  }
  const Reader r(s);
  ExperimentConfig cfg;
  RunConfig& run = cfg.run;
  try {
    run.benchmark = parse_benchmark(r.text("benchmark"));
  } catch (const InvalidArgument&) {
    throw ConfigError("benchmark", "unknown benchmark '" + r.text("benchmark") + "'");
  }
  run.iterations = static_cast<int>(r.integer("iterations", 1));
  run.batch_size = static_cast<int>(r.integer("batch_size", 1));
  run.noise_half_width = r.real("noise");
  if (run.noise_half_width < 0.0) throw ConfigError("noise", "must be >= 0");
  run.seed = static_cast<std::uint64_t>(r.integer("seed", 0));
  run.diagnostics = r.boolean("diagnostics");
  run.kl_diagnostic = r.boolean("kl_diagnostic");
  run.diagnostic_samples = static_cast<std::size_t>(r.integer("diagnostic_samples", 1));
  if (const auto budget = r.integer("max_oracle_calls", 0); budget > 0) {
    run.max_oracle_calls = static_cast<std::uint64_t>(budget);
  }
  run.em.max_iters = static_cast<int>(r.integer("em_max_iters", 1));
  run.em.n_restarts = static_cast<int>(r.integer("em_restarts", 1));
  run.em.tol = r.real("em_tol");
  if (!(run.em.tol > 0.0)) throw ConfigError("em_tol", "must be > 0");
  cfg.runs = static_cast<int>(r.integer("runs", 1));

  double beta = r.real("beta");
  double factor = r.real("beta_factor");
  if (!r.text("beta_rule_csv").empty()) {
    const MultiplicativeRule rule = rule_from_csv(r.text("beta_rule_csv"));
    beta = rule.beta_init;
    factor = rule.factor;
    if (r.text("schedule") != "multiplicative") {
      throw ConfigError("beta_rule_csv", "requires schedule = multiplicative");
    }
  }
  if (beta < 0.0) throw ConfigError("beta", "must be >= 0");
  const std::string& schedule = r.text("schedule");
  if (schedule == "fixed") {
    run.schedule = FixedBeta{beta};
  } else if (schedule == "multiplicative") {
    if (!(factor > 1.0)) throw ConfigError("beta_factor", "must exceed 1");
    run.schedule = MultiplicativeBeta{beta, factor};
  } else if (schedule == "cv") {
    if (!(beta > 0.0)) throw ConfigError("beta", "cross-validated schedule needs beta > 0");
    BetaCvConfig cv;
    cv.k1 = r.real("cv_k1");
    cv.k2 = r.real("cv_k2");
    cv.n_beta = static_cast<int>(r.integer("cv_n_beta", 3));
    cv.folds = static_cast<int>(r.integer("cv_folds", 2));
    cv.max_ext_iter = static_cast<int>(r.integer("cv_max_ext_iter", 0));
    if (!(cv.k1 > 0.0 && cv.k1 < 1.0)) throw ConfigError("cv_k1", "must lie in (0, 1)");
    if (!(cv.k2 > 1.0)) throw ConfigError("cv_k2", "must exceed 1");
    run.schedule = CrossValidatedBeta{beta, cv};
  } else {
    throw ConfigError("schedule", "expected fixed, multiplicative or cv, got '" + schedule + "'");
  }

  const int components = static_cast<int>(r.integer("components", 1));
  const ModelSpec fixed = components == 1 ? ModelSpec::single_gaussian() : ModelSpec::mixture(components);
  if (r.text("model_cv").empty()) {
    run.model_policy = FixedModel{fixed};
  } else {
    CrossValidatedModel cv;
    for (const auto& item : split(r.text("model_cv"), ',')) {
      int m = 0;
      const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), m);
      if (ec != std::errc() || ptr != item.data() + item.size() || m < 1) {
        throw ConfigError("model_cv", "expected a comma-separated list of component counts");
      }
      cv.candidates.push_back(m == 1 ? ModelSpec::single_gaussian() : ModelSpec::mixture(m));
    }
    cv.folds = static_cast<int>(r.integer("model_cv_folds", 2));
    run.model_policy = cv;
  }
  if (const auto b = r.integer("bagging_replicates", 0); b > 0) {
    run.bagging = BaggingConfig{static_cast<int>(b)};
  }
  return cfg;
}

std::string format_settings(const Settings& s) {
  std::string out;
  for (const auto& [k, v] : s) out += k + " = " + v + "\n";
  return out;
}

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

std::vector<CsvRow> csv_rows(int run_id, const RunHistory& history) {
  std::vector<CsvRow> rows;
  for (const auto& rec : history.records) {
    rows.push_back(CsvRow{run_id, rec.iteration, rec.oracle_calls, rec.beta,
                          rec.density.component_count(), rec.e_qg, rec.kl_pq, rec.best_g});
  }
  return rows;
}

std::string format_csv_row(const CsvRow& row) {
  std::string out = std::to_string(row.run_id) + "," + std::to_string(row.iteration) + "," +
                    std::to_string(row.oracle_calls) + "," + format_number(row.beta) + "," +
                    std::to_string(row.model_components) + ",";
  if (row.e_qg) out += format_number(*row.e_qg);
  out += ",";
  if (row.kl_pq) out += format_number(*row.kl_pq);
  out += "," + format_number(row.best_g);
  return out;
}

std::vector<CsvRow> read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || trim(line) != kCsvHeader) {
    throw InvalidArgument("CSV header does not match the expected columns");
  }
  std::vector<CsvRow> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 8) throw InvalidArgument("CSV line " + std::to_string(lineno) + " has the wrong field count");
    try {
      CsvRow r;
      r.run_id = std::stoi(f[0]);
      r.iteration = std::stoi(f[1]);
      r.oracle_calls = std::stoull(f[2]);
      r.beta = std::stod(f[3]);
      r.model_components = std::stoul(f[4]);
      if (!f[5].empty()) r.e_qg = std::stod(f[5]);
      if (!f[6].empty()) r.kl_pq = std::stod(f[6]);
      r.best_g = std::stod(f[7]);
      rows.push_back(r);
    } catch (const std::logic_error&) {
      throw InvalidArgument("CSV line " + std::to_string(lineno) + " is malformed");
    }
  }
  return rows;
}

MultiplicativeRule fit_multiplicative_rule(const std::vector<CsvRow>& rows) {
  std::map<int, std::pair<double, int>> by_iter;
  for (const auto& r : rows) {
    if (!(r.beta > 0.0)) throw InvalidArgument("log(beta) fit needs positive betas");
    auto& [sum, count] = by_iter[r.iteration];
    sum += std::log(r.beta);
    ++count;
  }
  if (by_iter.size() < 2) throw InvalidArgument("log(beta) fit needs at least two iterations");
  double st = 0.0, sy = 0.0, stt = 0.0, sty = 0.0;
  for (const auto& [it, acc] : by_iter) {
    const double t = it - 1.0;
    const double y = acc.first / acc.second;
    st += t;
    sy += y;
    stt += t * t;
    sty += t * y;
  }
  const double n = static_cast<double>(by_iter.size());
  const double slope = (n * sty - st * sy) / (n * stt - st * st);
  const double intercept = (sy - slope * st) / n;
  return {std::exp(intercept), std::exp(slope)};
}

double median(std::vector<double> values) {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  return values.size() % 2 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, const RunCallback& on_run) {
  if (cfg.runs < 1) throw InvalidArgument("runs must be >= 1");
  ExperimentResult out;
  std::vector<double> finals;
  for (int i = 0; i < cfg.runs; ++i) {
    RunConfig rc = cfg.run;
    rc.seed = cfg.run.seed + static_cast<std::uint64_t>(i);
    Oracle oracle(rc.benchmark, rc.noise_half_width);
    RunHistory h = run(rc, oracle);
    out.total_oracle_calls += oracle.call_count();
    for (auto it = h.records.rbegin(); it != h.records.rend(); ++it) {
      if (it->e_qg) {
        finals.push_back(*it->e_qg);
        break;
      }
    }
    if (on_run) on_run(i, h);
    auto rows = csv_rows(i, h);
    out.rows.insert(out.rows.end(), rows.begin(), rows.end());
    out.histories.push_back(std::move(h));
  }
  out.median_final_e_qg = median(std::move(finals));
  return out;
}

}  // namespace pcopt
