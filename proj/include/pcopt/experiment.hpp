#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "pcopt/optimizer.hpp"

namespace pcopt {

/// Configuration error naming the offending key.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, const std::string& message)
      : std::runtime_error(key + ": " + message), key_(std::move(key)) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

/// Flat key = value settings, ordered by key.
using Settings = std::map<std::string, std::string>;

/// Every recognized key with its default value.
const Settings& default_settings();

std::vector<std::string> preset_names();
/// Settings of a named preset on top of the defaults. Throws ConfigError
/// (key "preset") for unknown names.
Settings preset_settings(std::string_view name);

/// Parses `key = value` lines; `#` starts a comment. Throws ConfigError for
/// malformed lines or unknown keys.
Settings parse_settings(std::istream& in);
Settings read_settings_file(const std::string& path);

/// Overlays `overrides` onto `base`, rejecting unknown keys.
void apply_settings(Settings& base, const Settings& overrides);

struct ExperimentConfig {
  RunConfig run;
  int runs = 1;
};

/// Validates and converts settings; throws ConfigError naming the bad key.
ExperimentConfig build_experiment(const Settings& s);

/// `key = value` lines for every setting, sorted by key.
std::string format_settings(const Settings& s);

struct CsvRow {
  int run_id = 0;
  int iteration = 0;
  std::uint64_t oracle_calls = 0;
  double beta = 0.0;
  std::size_t model_components = 0;
  std::optional<double> e_qg;
  std::optional<double> kl_pq;
  double best_g = 0.0;
};

inline constexpr std::string_view kCsvHeader =
    "run_id,iteration,oracle_calls,beta,model_components,e_qg,kl_pq,best_g";

/// Nine significant digits, as printf("%.9g").
std::string format_number(double v);
std::vector<CsvRow> csv_rows(int run_id, const RunHistory& history);
std::string format_csv_row(const CsvRow& row);
/// Reads rows written by format_csv_row; throws InvalidArgument on a header
/// mismatch or malformed line.
std::vector<CsvRow> read_csv(std::istream& in);

/// beta_t = beta_init * factor^(t - 1), fitted by least squares to the
/// per-iteration mean of log(beta) over all runs.
struct MultiplicativeRule {
  double beta_init = 1.0;
  double factor = 1.0;
};

MultiplicativeRule fit_multiplicative_rule(const std::vector<CsvRow>& rows);

struct ExperimentResult {
  std::vector<RunHistory> histories;
  std::vector<CsvRow> rows;
  /// Median over runs of the last recorded e_qg; NaN if none.
  double median_final_e_qg = 0.0;
  std::uint64_t total_oracle_calls = 0;
};

using RunCallback = std::function<void(int run_id, const RunHistory& history)>;

/// Runs `cfg.runs` independent runs; run i uses seed + i and gets run_id i.
/// `on_run` sees each history as soon as its run finishes.
ExperimentResult run_experiment(const ExperimentConfig& cfg, const RunCallback& on_run = {});

double median(std::vector<double> values);

}  // namespace pcopt
