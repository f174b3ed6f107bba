// Command-line front end: experiment runs and small demos.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "pcopt/demos.hpp"
#include "pcopt/experiment.hpp"
#include "pcopt/risk.hpp"

namespace {

using namespace pcopt;

struct RunOptions {
  std::string preset;
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> runs;
  std::string out = "pcopt_run.csv";
  std::string from_csv;
  std::vector<std::string> sets;
  bool verbose = false;
};

int cmd_run(const RunOptions& o) {
  Settings s = default_settings();
  if (!o.preset.empty()) s = preset_settings(o.preset);
  if (!o.config.empty()) apply_settings(s, read_settings_file(o.config));
  Settings overrides;
  for (const auto& kv : o.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError(kv, "--set expects key=value");
    overrides[kv.substr(0, eq)] = kv.substr(eq + 1);
  }
  if (o.seed) overrides["seed"] = std::to_string(*o.seed);
  if (o.runs) overrides["runs"] = std::to_string(*o.runs);
  if (!o.from_csv.empty()) overrides["beta_rule_csv"] = o.from_csv;
  apply_settings(s, overrides);
  if (o.preset == "woods-bestfit" && s.at("beta_rule_csv").empty()) {
    throw ConfigError("beta_rule_csv", "woods-bestfit needs --from-csv with a prior woods-cv CSV");
  }
  const ExperimentConfig cfg = build_experiment(s);
  set_warnings_enabled(o.verbose);

  std::ofstream sidecar(o.out + ".config");
  sidecar << format_settings(s);
  std::ofstream csv(o.out);
  if (!csv) throw ConfigError("out", "cannot write '" + o.out + "'");
  csv << kCsvHeader << '\n';
  bool all_complete = true;
  const ExperimentResult result = run_experiment(cfg, [&](int run_id, const RunHistory& h) {
    for (const auto& row : csv_rows(run_id, h)) csv << format_csv_row(row) << '\n';
    csv.flush();
    if (h.aborted) {
      all_complete = false;
      std::cerr << "run " << run_id << " aborted: " << h.abort_reason << '\n';
    }
    if (o.verbose) std::cerr << "run " << run_id << " done\n";
  });
  std::printf("runs=%d median_final_e_qg=%s total_oracle_calls=%llu csv=%s\n", cfg.runs,
              format_number(result.median_final_e_qg).c_str(),
              static_cast<unsigned long long>(result.total_oracle_calls), o.out.c_str());
  return all_complete ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Probability Collectives blackbox optimizer"};
  app.require_subcommand(1);

  RunOptions run_opts;
  auto* run = app.add_subcommand("run", "Run an optimization experiment and write a CSV");
  std::string preset_help = "Named preset:";
  for (const auto& p : preset_names()) preset_help += " " + p;
  run->add_option("--preset", run_opts.preset, preset_help);
  run->add_option("--config", run_opts.config, "key = value settings file");
  run->add_option("--seed", run_opts.seed, "Base seed; run i uses seed + i");
  run->add_option("--runs", run_opts.runs, "Number of independent runs");
  run->add_option("--out", run_opts.out, "CSV output path")->capture_default_str();
  run->add_option("--from-csv", run_opts.from_csv,
                  "Prior CSV whose mean log(beta) trajectory sets a multiplicative rule");
  run->add_option("--set", run_opts.sets, "Override a setting, key=value");
  run->add_flag("--verbose", run_opts.verbose, "Print warnings and progress to stderr");

  TwoPhiModel model{0.0, 0.5, 1.0, 1.0, 1.0, 0.0};
  std::size_t risk_n = 1'000'000;
  std::uint64_t risk_seed = 1;
  auto* risk = app.add_subcommand("risk-demo", "Closed-form vs Monte Carlo two-estimator risk");
  risk->add_option("--mu1", model.mu1, "Mean of the phi1 loss estimate")->required();
  risk->add_option("--mu2", model.mu2, "Mean of the phi2 loss estimate")->required();
  risk->add_option("--sigma-a", model.sigma_a, "Std-dev along (1, 1)")->capture_default_str();
  risk->add_option("--sigma-b", model.sigma_b, "Std-dev along (1, -1)")->capture_default_str();
  risk->add_option("--loss1", model.loss1, "True loss of phi1")->capture_default_str();
  risk->add_option("--loss2", model.loss2, "True loss of phi2")->capture_default_str();
  risk->add_option("-n", risk_n, "Monte Carlo draws")->capture_default_str();
  risk->add_option("--seed", risk_seed)->capture_default_str();

  std::string fb_bench = "quadratic2d";
  std::size_t n_factual = 30;
  std::size_t n_fictitious = 10'000;
  std::uint64_t fb_seed = 1;
  auto* fbmc = app.add_subcommand("fbmc-demo", "Fit-based vs plain Monte Carlo box integral");
  fbmc->add_option("--benchmark", fb_bench, "quadratic2d or rosenbrock2d")->capture_default_str();
  fbmc->add_option("--n-factual", n_factual)->capture_default_str();
  fbmc->add_option("--n-fictitious", n_fictitious)->capture_default_str();
  fbmc->add_option("--seed", fb_seed)->capture_default_str();

  int elite_k = 1;
  std::size_t elite_nt = kDefaultEliteTuples;
  std::uint64_t elite_seed = 1;
  auto* elite = app.add_subcommand("elite-demo", "Elite estimates on a Rosenbrock surrogate");
  elite->add_option("-K,--k", elite_k, "Queries per tuple")->capture_default_str();
  elite->add_option("--n-tuples", elite_nt, "Fictitious tuples N_T")->capture_default_str();
  elite->add_option("--seed", elite_seed)->capture_default_str();

  if (argc == 2 && std::string(argv[1]) == "risk-demo") {
    std::cout << risk->help();
    return 2;
  }
  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(run_opts);
    if (risk->parsed()) {
      Rng rng = derive_stream(risk_seed, 0);
      const double p = prob_choose_phi1(model);
      const double rk = risk_two_phi(model);
      const RiskMonteCarlo mc = mc_validate(model, risk_n, rng);
      std::printf("analytic_prob=%s analytic_risk=%s\n", format_number(p).c_str(),
                  format_number(rk).c_str());
      std::printf("mc_prob=%s +- %s mc_risk=%s +- %s\n", format_number(mc.prob).c_str(),
                  format_number(mc.prob_se).c_str(), format_number(mc.risk).c_str(),
                  format_number(mc.risk_se).c_str());
      return 0;
    }
    if (fbmc->parsed()) {
      const FbmcDemoResult r = fbmc_demo(parse_benchmark(fb_bench), n_factual, n_fictitious, fb_seed);
      std::printf("truth=%s\n", format_number(r.truth).c_str());
      std::printf("is_estimate=%s is_error=%s\n", format_number(r.is_estimate).c_str(),
                  format_number(std::abs(r.is_estimate - r.truth)).c_str());
      std::printf("fb_estimate=%s fb_error=%s\n", format_number(r.fb_estimate).c_str(),
                  format_number(std::abs(r.fb_estimate - r.truth)).c_str());
      return 0;
    }
    if (elite->parsed()) {
      const EliteDemoResult r = elite_demo(elite_k, elite_nt, elite_seed);
      for (std::size_t i = 0; i < r.names.size(); ++i) {
        std::printf("%zu  %-30s %s\n", i, r.names[i].c_str(), format_number(r.estimates[i]).c_str());
      }
      std::printf("selected=%zu\n", r.selected);
      return 0;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const InvalidArgument& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
