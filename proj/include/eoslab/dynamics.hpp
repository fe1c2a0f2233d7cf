#pragma once

#include "eoslab/manifold.hpp"
#include "eoslab/problem.hpp"

#include <string>
#include <utility>
#include <vector>

namespace eoslab {

struct RunConfig {
  double eta = 0.0;
  Vector theta0;
  long steps = 1;
  long record_every = 1;
  // Only consumed by callers that build theta0 from a random tube draw.
  unsigned long seed = 0;
};

struct TrajectoryRecord {
  long t = 0;
  Vector theta;
  double loss = 0.0;
  TubeCoords tube;
  double sharpness_par = 0.0;       // lambda(theta_par)
  double dist_par = 0.0;            // |theta_par - theta*|
  double eta_lambda = 0.0;          // eta * lambda(theta_par)
};

struct Trajectory {
  int depth = 0;
  double target = 0.0;
  double eta = 0.0;
  long record_every = 1;
  std::vector<TrajectoryRecord> records;
  bool diverged = false;
  long divergence_step = -1;
};

enum class Regime { Stable, Subcritical, Critical, Supercritical };

std::string regime_name(Regime regime);

struct RegimeSpec {
  Regime tag = Regime::Stable;
  double eta = 0.0;
  double margin_star = 0.0;  // eta - 2/lambda(theta*)
  double margin_zero = 0.0;  // eta - 2/lambda(theta_par_0)
};

// One plain gradient-descent step theta - eta * grad_loss(theta).
Vector gd_step(const FactorisationProblem& prob, double eta,
               const Vector& theta);

// Iterate gd_step, recording tube diagnostics every record_every steps (the
// final iterate is always recorded). Truncates with a divergence flag if a
// coordinate leaves (0, 1e6) or the loss exceeds 1e12; never throws for
// divergence.
Trajectory run(const FactorisationProblem& prob, const RunConfig& config);

// Classify eta against 2/lambda* and 2/lambda(theta_par_0):
//   Critical when |eta - 2/lambda*| <= 1e-12 * (2/lambda*), Supercritical
//   above, Subcritical inside the band, Stable below both.
RegimeSpec classify(const FactorisationProblem& prob, double eta,
                    const Vector& theta0);

// Period-doubling normal form x -> (1 - eta_lambda) x + x^3.
double flip_step(double x, double eta_lambda);

// Clean parabolic system
//   x -> (1 - a y^2) x,   y -> (1 + b x^2 - c y^2) y,  0 < a < c, b > 0.
std::pair<double, double> parabolic_step(double x, double y, double a, double b,
                                         double c);

// Cubic-order prediction of the next perpendicular coordinate:
//   (1 - eta lam) t - (eta/2) dl3 t^2 - (eta/6) dl4 t^3,  t = theta_perp.
double normal_form_perp_predict(const FactorisationProblem& prob, double eta,
                                const TubeCoords& tube);

// First-order sharpness descent along M with step eta * theta_perp^2 / 2,
// retracted by the projection.
Vector normal_form_par_predict(const FactorisationProblem& prob, double eta,
                               const TubeCoords& tube);

// Rescaled perpendicular coordinate in which the map becomes
// (1 - eta lam) phi + phi^3 + O(phi^4):
//   phi = sqrt(c) * (t + (eta/2) dl3 / ((1 - eta lam)^2 - (1 - eta lam)) t^2).
double phi_coordinate(const FactorisationProblem& prob, double eta,
                      const TubeCoords& tube);

}  // namespace eoslab
