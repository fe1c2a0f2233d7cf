#pragma once

#include "eoslab/dynamics.hpp"

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace eoslab {

enum class RateModel { Linear, PowerLaw };

// Least-squares fit of ln(value) against t (Linear, parameter = exp(slope))
// or against ln(t) (PowerLaw, parameter = slope).
struct RateFit {
  RateModel model = RateModel::Linear;
  double parameter = 0.0;
  double r_squared = 0.0;
  double window_start = 0.0;
  double window_end = 0.0;
};

struct TheoremCheck {
  std::string name;
  bool holds = true;
  double worst_margin = 0.0;  // most-violated slack, positive = satisfied
  std::optional<long> first_violation_step;
  std::string details;
};

struct RegimeReport {
  RegimeSpec regime;
  std::optional<long> tau;
  std::map<std::string, RateFit> rates;
  std::optional<double> cycle_amplitude;
  std::optional<double> suboptimality_gap;
  std::vector<TheoremCheck> checks;
};

using Series = std::vector<std::pair<double, double>>;

Series abs_perp_series(const Trajectory& traj);
Series dist_series(const Trajectory& traj);
Series sharpness_gap_series(const Trajectory& traj);
// Signed rescaled perpendicular coordinate phi at every record.
std::vector<double> phi_series(const Trajectory& traj);

// First recorded step with eta * lambda(theta_par) < 2; 0 when stable from
// the start, nullopt when the trajectory never stabilises.
std::optional<long> detect_tau(const Trajectory& traj);

// Natural log of the stabilisation-time ceiling
//   ceil( 1/(6 perp0^2) * ((2/eta - lambda*) / (lambda0 - lambda*))^(-24 C / (mu eta)) )
// evaluated with C = max c(eta, theta_par_t) over the records.
double tau_bound_log(const Trajectory& traj, const GeometryConstants& constants);

RateFit fit_rate(const Series& series, RateModel model, double window_start,
                 double window_end);

// Mean tail amplitude of a period-two orbit: requires strict sign alternation
// over the tail and relative amplitude spread below 1e-3; amplitudes below
// 1e-12 count as no cycle.
std::optional<double> detect_cycle2(const std::vector<double>& series,
                                    double tail_fraction);

// Per-step sharpness descent inequality
//   lambda_{t+1} - lambda* <= (1 - mu eta perp_t^2 / (4 c(eta, theta_t))) (lambda_t - lambda*)
// over consecutive in-ball record pairs.
TheoremCheck check_descent(const Trajectory& traj,
                           const GeometryConstants& constants);

// Bounds on |theta_perp_t| over the unstable segment:
//   |perp0| / sqrt(1 + 6 perp0^2 t) <= |perp_t| <= 2 sqrt(eta lambda0 - 2).
TheoremCheck check_perp_bounds(const Trajectory& traj);

// Positive final sharpness gap obeying
//   gap_inf >= exp(-(4 eta L^2/(c mu)) perp_tau^2 / (1 - beta^2)) * gap_tau
// with beta = 1 - (2 - eta lambda_tau) and c the smallest sampled coefficient.
TheoremCheck check_suboptimality(const Trajectory& traj,
                                 const GeometryConstants& constants);

// Full per-trajectory report: regime classification, stabilisation time,
// rate fits, cycle amplitude, suboptimality gap and the checks above.
RegimeReport summarize(const Trajectory& traj,
                       const GeometryConstants& constants);

}  // namespace eoslab
