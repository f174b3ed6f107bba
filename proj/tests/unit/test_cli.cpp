#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "pcopt/experiment.hpp"

namespace fs = std::filesystem;

namespace {

struct Result {
  int status = -1;
  std::string out;
};

// Runs the CLI with `args`, capturing stdout and stderr together.
Result cli(const std::string& args) {
  const std::string cmd = std::string("\"") + PCOPT_CLI_PATH + "\" " + args + " 2>&1";
  Result r;
  FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
  const int st = pclose(p);
  r.status = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "pcopt_cli_test";
  fs::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_CASE("same seed gives a byte-identical CSV") {
  const auto a = scratch("a.csv");
  const auto b = scratch("b.csv");
  REQUIRE(cli("run --preset quadratic-fixed --seed 5 --runs 2 --out " + a.string()).status == 0);
  REQUIRE(cli("run --preset quadratic-fixed --seed 5 --runs 2 --out " + b.string()).status == 0);
  const std::string sa = slurp(a);
  CHECK(sa == slurp(b));
  CHECK(sa.substr(0, sa.find('\n')) == pcopt::kCsvHeader);
  std::istringstream in(sa);
  CHECK(pcopt::read_csv(in).size() == 12);
}

TEST_CASE("invalid configuration exits nonzero and names the key") {
  const auto r = cli("run --preset quadratic-fixed --set beta=-3 --out " +
                     scratch("bad.csv").string());
  CHECK(r.status != 0);
  CHECK(r.out.find("beta") != std::string::npos);

  const auto u = cli("run --set colour=blue --out " + scratch("bad.csv").string());
  CHECK(u.status != 0);
  CHECK(u.out.find("colour") != std::string::npos);

  const auto p = cli("run --preset nope");
  CHECK(p.status != 0);
  CHECK(p.out.find("preset") != std::string::npos);
}

TEST_CASE("risk demo") {
  const auto help = cli("risk-demo");
  CHECK(help.status != 0);
  CHECK(help.out.find("--mu1") != std::string::npos);

  const auto r = cli("risk-demo --mu1 0 --mu2 0 -n 10000");
  CHECK(r.status == 0);
  CHECK(r.out.find("analytic_prob=0.5 ") != std::string::npos);
}

TEST_CASE("elite demo rejects K = 0") {
  const auto r = cli("elite-demo -K 0");
  CHECK(r.status != 0);
  CHECK(r.out.find("K") != std::string::npos);
}

TEST_CASE("fit-based demo prints both estimates") {
  const auto r = cli("fbmc-demo --n-fictitious 20000");
  CHECK(r.status == 0);
  CHECK(r.out.find("is_estimate=") != std::string::npos);
  CHECK(r.out.find("fb_estimate=") != std::string::npos);
}

TEST_CASE("bagging preset echoes its settings") {
  const auto out = scratch("bag.csv");
  const auto r = cli("run --preset rosenbrock-bagging --set iterations=2 --out " + out.string());
  REQUIRE(r.status == 0);
  const std::string cfg = slurp(out.string() + ".config");
  CHECK(cfg.find("batch_size = 20\n") != std::string::npos);
  CHECK(cfg.find("bagging_replicates = 5\n") != std::string::npos);
  CHECK(cfg.find("noise = 0.25\n") != std::string::npos);
}

TEST_CASE("woods cross-validation writes every run and iteration without KL") {
  const auto out = scratch("woods.csv");
  const auto r = cli("run --preset woods-cv --runs 3 --seed 1 --out " + out.string());
  REQUIRE(r.status == 0);
  std::ifstream in(out);
  const auto rows = pcopt::read_csv(in);
  CHECK(rows.size() == 90);
  std::set<int> ids;
  for (const auto& row : rows) {
    ids.insert(row.run_id);
    CHECK_FALSE(row.kl_pq.has_value());
  }
  CHECK(ids == std::set<int>{0, 1, 2});

  const auto best = scratch("woods_best.csv");
  const auto b = cli("run --preset woods-bestfit --runs 1 --set iterations=3 --from-csv " +
                     out.string() + " --out " + best.string());
  CHECK(b.status == 0);
  const auto nofile = cli("run --preset woods-bestfit --out " + best.string());
  CHECK(nofile.status != 0);
  CHECK(nofile.out.find("beta_rule_csv") != std::string::npos);
}
