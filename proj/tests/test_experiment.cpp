#include "eoslab/experiment.hpp"

#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace eoslab;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name)
      : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

int run_cli(std::initializer_list<std::string> args) {
  std::vector<std::string> owned{"eoslab"};
  owned.insert(owned.end(), args);
  std::vector<const char*> argv;
  for (const auto& a : owned) argv.push_back(a.c_str());
  return cli_main(static_cast<int>(argv.size()), argv.data());
}

}  // namespace

TEST_CASE("config json round-trips byte-exactly") {
  ExperimentConfig config;
  config.depth = 7;
  config.target = 0.731;
  config.regime = "supercritical";
  config.eta = 0.2871342134;
  config.alpha = 2e-3;
  config.perp0 = 0.1 / 3.0;
  config.par_offset = 0.05123;
  config.inits = 3;
  config.steps = 12345;
  config.seed = 99;
  config.out_dir = "somewhere";

  const auto j1 = config_to_json(config);
  const auto j2 = config_to_json(config_from_json(j1));
  CHECK(j1.dump() == j2.dump());

  const auto j3 = config_to_json(config_from_json(nlohmann::json::parse(j1.dump())));
  CHECK(j1.dump() == j3.dump());
}

TEST_CASE("emit_csv format contract") {
  TempDir dir("eoslab_csv_test");

  // header-only for an empty trajectory
  Trajectory empty;
  empty.depth = 2;
  empty.target = 1.0;
  emit_csv(empty, (dir.path / "empty.csv").string());
  CHECK(slurp(dir.path / "empty.csv") ==
        "t,loss,sharpness_par,dist_par,theta_perp,eta_lambda\n");

  const FactorisationProblem prob(5, 1.0);
  RunConfig rc;
  rc.eta = 0.4;
  rc.theta0 = prob.balanced_point() * 1.01;
  rc.steps = 50;
  const Trajectory traj = run(prob, rc);
  const auto path = dir.path / "traj.csv";
  emit_csv(traj, path.string());

  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  CHECK(header == "t,loss,sharpness_par,dist_par,theta_perp,eta_lambda");

  // every floating value round-trips exactly through the printed digits
  std::string line;
  size_t rows = 0;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string field;
    std::getline(ls, field, ',');
    CHECK(std::stol(field) == traj.records[rows].t);
    const double expected[] = {
        traj.records[rows].loss, traj.records[rows].sharpness_par,
        traj.records[rows].dist_par, traj.records[rows].tube.theta_perp,
        traj.records[rows].eta_lambda};
    for (double want : expected) {
      REQUIRE(std::getline(ls, field, ','));
      CHECK(std::stod(field) == want);
    }
    ++rows;
  }
  CHECK(rows == traj.records.size());

  // byte-identical on re-emit
  emit_csv(traj, (dir.path / "traj2.csv").string());
  CHECK(slurp(path) == slurp(dir.path / "traj2.csv"));
}

TEST_CASE("resolve picks regime presets") {
  ExperimentConfig config;
  config.depth = 5;
  config.target = 1.0;
  config.inits = 2;
  config.steps = 100;

  config.regime = "critical";
  const ResolvedExperiment crit = resolve(config);
  CHECK(crit.config.eta == 2.0 / 5.0);  // bitwise: computed the same way
  CHECK(crit.config.perp0 == 1e-2);

  config.regime = "supercritical";
  config.alpha = 4e-3;
  const ResolvedExperiment sup = resolve(config);
  CHECK(sup.config.eta == doctest::Approx((2.0 + 4e-3) / 5.0).epsilon(1e-15));
  CHECK(sup.config.perp0 == doctest::Approx(0.5 * std::sqrt(4e-3)));

  config.regime = "subcritical";
  const ResolvedExperiment sub = resolve(config);
  for (double lam0 : sub.lambda0) {
    CHECK(sub.config.eta > 2.0 / lam0);
    CHECK(sub.config.eta < 2.0 / 5.0);
    CHECK(lam0 >= 1.005 * 5.0);
  }

  config.regime = "stable";
  const ResolvedExperiment st = resolve(config);
  for (double lam0 : st.lambda0) CHECK(st.config.eta < 2.0 / lam0);
}

TEST_CASE("run_experiment writes deterministic outputs") {
  TempDir dir_a("eoslab_exp_a"), dir_b("eoslab_exp_b");
  ExperimentConfig config;
  config.depth = 5;
  config.target = 1.0;
  config.regime = "supercritical";
  config.alpha = 8e-3;
  config.inits = 2;
  config.steps = 4000;
  config.seed = 5;

  config.out_dir = dir_a.path.string();
  run_experiment(config);
  config.out_dir = dir_b.path.string();
  run_experiment(config);

  for (const char* name : {"traj_000.csv", "traj_001.csv"})
    CHECK(slurp(dir_a.path / name) == slurp(dir_b.path / name));

  // summaries agree except for the echoed output directory
  auto sa = nlohmann::json::parse(slurp(dir_a.path / "summary.json"));
  auto sb = nlohmann::json::parse(slurp(dir_b.path / "summary.json"));
  sa["config"].erase("out_dir");
  sb["config"].erase("out_dir");
  CHECK(sa.dump() == sb.dump());

  for (const char* key :
       {"config", "regime", "tau", "rates", "cycle_amplitude",
        "suboptimality_gap", "checks", "divergence_flag"})
    CHECK(sa.contains(key));

  for (const char* name :
       {"dist_par.svg", "theta_perp.svg", "sharpness_gap.svg"}) {
    const std::string svg = slurp(dir_a.path / name);
    CHECK(svg.find("<svg") != std::string::npos);
    CHECK(svg.find("<polyline") != std::string::npos);
  }
}

TEST_CASE("cli entry point maps errors to exit codes") {
  TempDir dir("eoslab_cli_test");
  // config error: depth below 2
  CHECK(run_cli({"--depth", "1", "--regime", "critical"}) == 2);
  // unknown flag
  CHECK(run_cli({"--frobnicate"}) == 2);
  CHECK(run_cli({"--help"}) == 0);
  // depth ranges are reserved for check mode
  CHECK(run_cli({"--depth", "2..5", "--regime", "critical"}) == 2);
  // constants check over a depth range
  CHECK(run_cli({"--check", "constants", "--depth", "2..8"}) == 0);

  // config file + flag override + tiny run
  const auto config_path = dir.path / "config.json";
  {
    ExperimentConfig config;
    config.depth = 5;
    config.regime = "stable";
    config.inits = 1;
    config.steps = 200;
    config.out_dir = (dir.path / "out").string();
    std::ofstream out(config_path);
    out << config_to_json(config).dump(2);
  }
  CHECK(run_cli({"--config", config_path.string(), "--steps", "100"}) == 0);
  const auto summary =
      nlohmann::json::parse(slurp(dir.path / "out" / "summary.json"));
  CHECK(summary["config"]["steps"].get<long>() == 100);  // flag wins
  CHECK(summary["regime"]["tag"].get<std::string>() == "stable");
}
