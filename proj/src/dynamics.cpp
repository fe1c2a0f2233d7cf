#include "eoslab/dynamics.hpp"

#include "eoslab/errors.hpp"

#include <cmath>
#include <stdexcept>

namespace eoslab {

namespace {

constexpr double kCoordCeiling = 1e6;
constexpr double kLossCeiling = 1e12;

bool out_of_range(const FactorisationProblem& prob, const Vector& theta,
                  double loss_value) {
  if (loss_value > kLossCeiling || !std::isfinite(loss_value)) return true;
  for (int i = 0; i < prob.depth; ++i) {
    if (!(theta[i] > 0.0) || theta[i] >= kCoordCeiling || !std::isfinite(theta[i]))
      return true;
  }
  return false;
}

TrajectoryRecord make_record(const FactorisationProblem& prob, double eta,
                             long t, const Vector& theta) {
  TrajectoryRecord rec;
  rec.t = t;
  rec.theta = theta;
  rec.loss = loss(prob, theta);
  rec.tube = tube_coords(prob, theta);
  rec.sharpness_par = sharpness(prob, rec.tube.theta_par);
  rec.dist_par = (rec.tube.theta_par - prob.balanced_point()).norm();
  rec.eta_lambda = eta * rec.sharpness_par;
  return rec;
}

}  // namespace

std::string regime_name(Regime regime) {
  switch (regime) {
    case Regime::Stable: return "stable";
    case Regime::Subcritical: return "subcritical";
    case Regime::Critical: return "critical";
    case Regime::Supercritical: return "supercritical";
  }
  return "unknown";
}

Vector gd_step(const FactorisationProblem& prob, double eta,
               const Vector& theta) {
  return theta - eta * grad_loss(prob, theta);
}

Trajectory run(const FactorisationProblem& prob, const RunConfig& config) {
  if (config.steps < 1) throw std::invalid_argument("run: steps must be >= 1");
  if (config.record_every < 1)
    throw std::invalid_argument("run: record_every must be >= 1");
  if (!(config.eta > 0.0)) throw std::invalid_argument("run: eta must be positive");
  if ((config.theta0.array() <= 0.0).any())
    throw std::invalid_argument("run: theta0 must be in the positive orthant");

  Trajectory traj;
  traj.depth = prob.depth;
  traj.target = prob.target;
  traj.eta = config.eta;
  traj.record_every = config.record_every;
  traj.records.reserve(
      static_cast<size_t>(config.steps / config.record_every + 2));

  Vector theta = config.theta0;
  for (long t = 0; t <= config.steps; ++t) {
    const double loss_t = loss(prob, theta);
    if (out_of_range(prob, theta, loss_t)) {
      traj.diverged = true;
      traj.divergence_step = t;
      break;
    }
    if (t % config.record_every == 0 || t == config.steps) {
      try {
        traj.records.push_back(make_record(prob, config.eta, t, theta));
      } catch (const NumericalError&) {
        // iterate left the projectable tube; treat as divergence
        traj.diverged = true;
        traj.divergence_step = t;
        break;
      }
    }
    if (t < config.steps) theta = gd_step(prob, config.eta, theta);
  }
  return traj;
}

RegimeSpec classify(const FactorisationProblem& prob, double eta,
                    const Vector& theta0) {
  const Vector theta_par0 = project(prob, theta0);
  const double lambda0 = sharpness(prob, theta_par0);
  const double crit = 2.0 / prob.lambda_star();

  RegimeSpec spec;
  spec.eta = eta;
  spec.margin_star = eta - crit;
  spec.margin_zero = eta - 2.0 / lambda0;
  if (std::abs(eta - crit) <= 1e-12 * crit)
    spec.tag = Regime::Critical;
  else if (eta > crit)
    spec.tag = Regime::Supercritical;
  else if (eta > 2.0 / lambda0)
    spec.tag = Regime::Subcritical;
  else
    spec.tag = Regime::Stable;
  return spec;
}

double flip_step(double x, double eta_lambda) {
  return (1.0 - eta_lambda) * x + x * x * x;
}

std::pair<double, double> parabolic_step(double x, double y, double a, double b,
                                         double c) {
  if (!(0.0 < a && a < c) || !(b > 0.0))
    throw std::invalid_argument("parabolic_step: need 0 < a < c and b > 0");
  return {(1.0 - a * y * y) * x, (1.0 + b * x * x - c * y * y) * y};
}

double normal_form_perp_predict(const FactorisationProblem& prob, double eta,
                                const TubeCoords& tube) {
  const double lam = sharpness(prob, tube.theta_par);
  const double t = tube.theta_perp;
  return (1.0 - eta * lam) * t - 0.5 * eta * dl3_n(prob, tube.theta_par) * t * t -
         eta / 6.0 * dl4_n(prob, tube.theta_par) * t * t * t;
}

Vector normal_form_par_predict(const FactorisationProblem& prob, double eta,
                               const TubeCoords& tube) {
  const Vector step = tube.theta_par - 0.5 * eta * tube.theta_perp *
                                           tube.theta_perp *
                                           riem_grad_lambda(prob, tube.theta_par);
  return project(prob, step);
}

double phi_coordinate(const FactorisationProblem& prob, double eta,
                      const TubeCoords& tube) {
  const double lam = sharpness(prob, tube.theta_par);
  const double el = eta * lam;
  if (std::abs(el) < 1e-9 || std::abs(el - 1.0) < 1e-9)
    throw NumericalError("phi_coordinate: singular denominator at eta*lambda in {0,1}");
  const double c = c_coeff(prob, eta, tube.theta_par);
  if (!(c > 0.0))
    throw NumericalError("phi_coordinate: nonpositive genericity coefficient");
  const double mu = 1.0 - el;
  const double quad = 0.5 * eta * dl3_n(prob, tube.theta_par) / (mu * mu - mu);
  const double t = tube.theta_perp;
  return std::sqrt(c) * (t + quad * t * t);
}

}  // namespace eoslab
