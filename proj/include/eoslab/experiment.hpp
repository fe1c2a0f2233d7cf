#pragma once

#include "eoslab/analysis.hpp"
#include "eoslab/dynamics.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace eoslab {

// One experiment: a problem, a step-size regime, an initialisation recipe and
// run lengths. Zeros in eta / perp0 / par_offset / steps select per-regime
// defaults, which are materialised by resolve() and echoed into the summary.
struct ExperimentConfig {
  int depth = 5;
  double target = 1.0;
  std::string regime = "critical";  // stable|subcritical|critical|supercritical
  double eta = 0.0;                 // explicit step size; wins over regime
  double alpha = 1e-3;              // supercritical offset: eta = (2+alpha)/lambda*
  double perp0 = 0.0;               // initial |theta_perp|
  double par_offset = 0.0;          // Euclidean distance of theta_par_0 from theta*
  int inits = 5;
  long steps = 0;
  long record_every = 1;
  unsigned long seed = 0;
  std::string out_dir = "out";
};

ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& config);

// Config with every default materialised, plus the sampled initial points.
struct ResolvedExperiment {
  ExperimentConfig config;  // eta, perp0, par_offset, steps filled in
  std::vector<Vector> theta0;
  std::vector<double> lambda0;
};

ResolvedExperiment resolve(const ExperimentConfig& config);

// CSV columns: t,loss,sharpness_par,dist_par,theta_perp,eta_lambda with 17
// significant digits and LF line endings.
void emit_csv(const Trajectory& traj, const std::string& path);

nlohmann::json report_to_json(const RegimeReport& report);
void emit_summary(const nlohmann::json& summary, const std::string& path);

// Three log-scale charts (dist_par, |theta_perp|, sharpness gap) with one
// polyline per trajectory.
void emit_svg(const std::vector<Trajectory>& trajectories, bool log_x,
              const std::string& out_dir);

struct ExperimentOutput {
  nlohmann::json summary;
  std::vector<Trajectory> trajectories;
};

// Run all initialisations, write one CSV per trajectory plus summary.json and
// the SVG charts under config.out_dir.
ExperimentOutput run_experiment(const ExperimentConfig& config);

// Self-check batteries exposed through --check; return process exit codes.
int run_check_constants(const std::vector<int>& depths, double target);
int run_check_derivatives(const std::vector<int>& depths, double target,
                          unsigned long seed);
int run_check_normalform(int depth, double target, unsigned long seed);

// Full command-line entry point; returns 0 on success, 2 on configuration
// errors, 3 on numerical failure.
int cli_main(int argc, const char* const* argv);

}  // namespace eoslab
