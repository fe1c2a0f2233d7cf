#include "eoslab/analysis.hpp"

#include "eoslab/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace eoslab {

namespace {

constexpr double kValueFloor = 1e-300;
constexpr double kDescentTolerance = 1e-9;
constexpr double kBoundTolerance = 1e-12;
constexpr double kConvergedLoss = 1e-20;
constexpr double kCycleFloor = 1e-12;
constexpr double kCycleSpread = 1e-3;

FactorisationProblem problem_of(const Trajectory& traj) {
  return FactorisationProblem(traj.depth, traj.target);
}

// Default fit window: last 40% of records, terminated at the first exact zero.
std::pair<double, double> linear_window(const Series& series) {
  const size_t n = series.size();
  const size_t start = n - std::max<size_t>(2, (2 * n) / 5);
  double t0 = series[start].first;
  double t1 = series.back().first;
  for (size_t i = start; i < n; ++i) {
    if (series[i].second == 0.0) {
      t1 = i > start ? series[i - 1].first : t0;
      break;
    }
  }
  return {t0, t1};
}

struct LeastSquares {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 1.0;
};

LeastSquares regress(const std::vector<double>& xs,
                     const std::vector<double>& ys) {
  const size_t n = xs.size();
  double sx = 0, sy = 0;
  for (size_t i = 0; i < n; ++i) {
    sx += xs[i];
    sy += ys[i];
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0;
  for (size_t i = 0; i < n; ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  LeastSquares ls;
  ls.slope = sxx > 0 ? sxy / sxx : 0.0;
  ls.intercept = my - ls.slope * mx;
  double ssr = 0, sst = 0;
  for (size_t i = 0; i < n; ++i) {
    const double pred = ls.intercept + ls.slope * xs[i];
    ssr += (ys[i] - pred) * (ys[i] - pred);
    sst += (ys[i] - my) * (ys[i] - my);
  }
  ls.r_squared = sst > 0 ? std::clamp(1.0 - ssr / sst, 0.0, 1.0) : 1.0;
  return ls;
}

}  // namespace

Series abs_perp_series(const Trajectory& traj) {
  Series s;
  s.reserve(traj.records.size());
  for (const auto& rec : traj.records)
    s.emplace_back(static_cast<double>(rec.t), std::abs(rec.tube.theta_perp));
  return s;
}

Series dist_series(const Trajectory& traj) {
  Series s;
  s.reserve(traj.records.size());
  for (const auto& rec : traj.records)
    s.emplace_back(static_cast<double>(rec.t), rec.dist_par);
  return s;
}

Series sharpness_gap_series(const Trajectory& traj) {
  const double lambda_star = problem_of(traj).lambda_star();
  Series s;
  s.reserve(traj.records.size());
  for (const auto& rec : traj.records)
    s.emplace_back(static_cast<double>(rec.t),
                   rec.sharpness_par - lambda_star);
  return s;
}

std::vector<double> phi_series(const Trajectory& traj) {
  const FactorisationProblem prob = problem_of(traj);
  std::vector<double> s;
  s.reserve(traj.records.size());
  for (const auto& rec : traj.records)
    s.push_back(phi_coordinate(prob, traj.eta, rec.tube));
  return s;
}

std::optional<long> detect_tau(const Trajectory& traj) {
  for (const auto& rec : traj.records)
    if (rec.eta_lambda < 2.0) return rec.t;
  return std::nullopt;
}

double tau_bound_log(const Trajectory& traj,
                     const GeometryConstants& constants) {
  if (traj.records.empty()) throw std::invalid_argument("tau_bound_log: empty");
  const FactorisationProblem prob = problem_of(traj);
  const auto& first = traj.records.front();
  const double perp0 = std::abs(first.tube.theta_perp);
  if (perp0 == 0.0) return std::numeric_limits<double>::infinity();
  const double lambda0 = first.sharpness_par;
  const double lambda_star = constants.lambda_star;
  double c_max = 0.0;
  for (const auto& rec : traj.records)
    c_max = std::max(c_max, c_coeff(prob, traj.eta, rec.tube.theta_par));
  const double ratio =
      (2.0 / traj.eta - lambda_star) / (lambda0 - lambda_star);
  if (!(ratio > 0.0))
    throw NumericalError("tau_bound_log: bound requires a subcritical band");
  return -std::log(6.0 * perp0 * perp0) -
         (24.0 * c_max / (constants.mu * traj.eta)) * std::log(ratio);
}

RateFit fit_rate(const Series& series, RateModel model, double window_start,
                 double window_end) {
  std::vector<double> xs, ys;
  for (const auto& [t, v] : series) {
    if (t < window_start || t > window_end) continue;
    if (v <= 0.0)
      throw std::domain_error("fit_rate: nonpositive value inside window");
    const double fv = std::max(v, kValueFloor);
    if (model == RateModel::Linear) {
      xs.push_back(t);
    } else {
      if (t <= 0.0)
        throw std::domain_error("fit_rate: power-law window requires t > 0");
      xs.push_back(std::log(t));
    }
    ys.push_back(std::log(fv));
  }
  if (xs.size() < 2) throw std::invalid_argument("fit_rate: window too small");
  const LeastSquares ls = regress(xs, ys);
  RateFit fit;
  fit.model = model;
  fit.parameter = model == RateModel::Linear ? std::exp(ls.slope) : ls.slope;
  fit.r_squared = ls.r_squared;
  fit.window_start = window_start;
  fit.window_end = window_end;
  return fit;
}

std::optional<double> detect_cycle2(const std::vector<double>& series,
                                    double tail_fraction) {
  if (!(tail_fraction > 0.0 && tail_fraction <= 1.0))
    throw std::invalid_argument("detect_cycle2: tail_fraction outside (0,1]");
  const size_t n = series.size();
  if (n < 4) return std::nullopt;
  size_t start = n - std::max<size_t>(4, static_cast<size_t>(tail_fraction * n));
  if (start >= n - 3) start = n - 4;

  double lo = std::numeric_limits<double>::infinity(), hi = 0.0, sum = 0.0;
  size_t count = 0;
  for (size_t i = start; i < n; ++i) {
    const double v = series[i];
    if (i + 1 < n && !(v * series[i + 1] < 0.0)) return std::nullopt;
    const double a = std::abs(v);
    lo = std::min(lo, a);
    hi = std::max(hi, a);
    sum += a;
    ++count;
  }
  const double mean = sum / count;
  if (mean < kCycleFloor) return std::nullopt;
  if ((hi - lo) / mean >= kCycleSpread) return std::nullopt;
  return mean;
}

TheoremCheck check_descent(const Trajectory& traj,
                           const GeometryConstants& constants) {
  TheoremCheck check;
  check.name = "descent_lemma";
  if (traj.record_every != 1) {
    check.details = "not-applicable: per-step records required";
    return check;
  }
  const FactorisationProblem prob = problem_of(traj);
  const double lambda_star = constants.lambda_star;
  double worst = std::numeric_limits<double>::infinity();
  long checked = 0, skipped = 0;
  for (size_t i = 0; i + 1 < traj.records.size(); ++i) {
    const auto& cur = traj.records[i];
    const auto& nxt = traj.records[i + 1];
    if (cur.dist_par > constants.ball_radius ||
        nxt.dist_par > constants.ball_radius) {
      ++skipped;
      continue;
    }
    const double c = c_coeff(prob, traj.eta, cur.tube.theta_par);
    const double perp2 = cur.tube.theta_perp * cur.tube.theta_perp;
    const double factor = 1.0 - constants.mu * traj.eta * perp2 / (4.0 * c);
    const double margin = factor * (cur.sharpness_par - lambda_star) -
                          (nxt.sharpness_par - lambda_star);
    ++checked;
    if (margin < worst) worst = margin;
    if (margin < -kDescentTolerance && !check.first_violation_step)
      check.first_violation_step = cur.t;
  }
  std::ostringstream os;
  os << "pairs checked=" << checked << " skipped (outside ball)=" << skipped
     << " tolerance=" << kDescentTolerance;
  check.details = os.str();
  if (checked == 0) {
    check.details += "; not-applicable: no in-ball pairs";
    return check;
  }
  check.worst_margin = worst;
  check.holds = worst >= -kDescentTolerance;
  return check;
}

TheoremCheck check_perp_bounds(const Trajectory& traj) {
  TheoremCheck check;
  check.name = "perp_bounds";
  if (traj.records.empty()) {
    check.details = "not-applicable: empty trajectory";
    return check;
  }
  const auto& first = traj.records.front();
  if (first.eta_lambda < 2.0) {
    check.details = "not-applicable: stable from the start (eta*lambda0 < 2)";
    return check;
  }
  // The bounded iteration is the normal form with unit cubic coefficient, so
  // the bounds apply to the rescaled coordinate phi, not the raw tube offset.
  const std::vector<double> phis = phi_series(traj);
  const double phi0 = std::abs(phis.front());
  const double upper = 2.0 * std::sqrt(first.eta_lambda - 2.0);
  // Lower-bound constant 6: the telescoping estimate behind the bound gives
  // 1/phi^2 increments of at most 6 per unstable step.
  double worst = std::numeric_limits<double>::infinity();
  long checked = 0;
  for (size_t i = 0; i < traj.records.size(); ++i) {
    const auto& rec = traj.records[i];
    if (rec.eta_lambda < 2.0) break;
    const double t = static_cast<double>(rec.t);
    const double lower = phi0 / std::sqrt(1.0 + 6.0 * phi0 * phi0 * t);
    const double a = std::abs(phis[i]);
    const double margin = std::min(a - lower, upper - a);
    ++checked;
    if (margin < worst) worst = margin;
    if (margin < -kBoundTolerance && !check.first_violation_step)
      check.first_violation_step = rec.t;
  }
  std::ostringstream os;
  os << "unstable records checked=" << checked << " phi0=" << phi0
     << " upper=" << upper
     << " lower constant=6 (telescoping-backed; the tighter 3 is not)";
  check.details = os.str();
  if (checked == 0) {
    check.details += "; not-applicable: no unstable records";
    return check;
  }
  check.worst_margin = worst;
  check.holds = worst >= -kBoundTolerance;
  return check;
}

TheoremCheck check_suboptimality(const Trajectory& traj,
                                 const GeometryConstants& constants) {
  TheoremCheck check;
  check.name = "suboptimality_gap";
  if (traj.records.empty() || traj.records.back().loss >= kConvergedLoss) {
    check.details = "not-applicable: trajectory has not converged";
    return check;
  }
  const auto tau = detect_tau(traj);
  if (!tau || *tau == 0) {
    check.details = "not-applicable: no unstable phase";
    return check;
  }
  const FactorisationProblem prob = problem_of(traj);
  const auto tau_rec =
      std::find_if(traj.records.begin(), traj.records.end(),
                   [&](const TrajectoryRecord& r) { return r.t == *tau; });
  if (tau_rec == traj.records.end()) {
    check.details = "not-applicable: stabilisation step not recorded";
    return check;
  }
  const double gap_final =
      traj.records.back().sharpness_par - constants.lambda_star;
  const double gap_tau = tau_rec->sharpness_par - constants.lambda_star;
  const double beta = 1.0 - (2.0 - tau_rec->eta_lambda);
  const double perp_tau = std::abs(tau_rec->tube.theta_perp);
  double c_min = std::numeric_limits<double>::infinity();
  for (const auto& rec : traj.records)
    c_min = std::min(c_min, c_coeff(prob, traj.eta, rec.tube.theta_par));
  const double exponent = 4.0 * traj.eta * constants.lipschitz *
                          constants.lipschitz / (c_min * constants.mu) *
                          perp_tau * perp_tau / (1.0 - beta * beta);
  // Bound compared in logs; exponent can exceed the double range otherwise.
  const double log_margin =
      std::log(std::max(gap_final, kValueFloor)) -
      (std::log(std::max(gap_tau, kValueFloor)) - exponent);
  check.worst_margin = std::min(gap_final, log_margin);
  check.holds = gap_final > 0.0 && log_margin >= -kBoundTolerance;
  if (!check.holds) check.first_violation_step = traj.records.back().t;
  std::ostringstream os;
  os << "gap_final=" << gap_final << " gap_tau=" << gap_tau << " beta=" << beta
     << " perp_tau=" << perp_tau << " c_min=" << c_min
     << " L=" << constants.lipschitz << " exponent=" << exponent
     << " log_margin=" << log_margin;
  check.details = os.str();
  return check;
}

RegimeReport summarize(const Trajectory& traj,
                       const GeometryConstants& constants) {
  if (traj.records.empty())
    throw std::invalid_argument("summarize: empty trajectory");
  const FactorisationProblem prob = problem_of(traj);
  RegimeReport report;
  report.regime = classify(prob, traj.eta, traj.records.front().theta);

  const Series perp = abs_perp_series(traj);
  const Series dist = dist_series(traj);
  const Series gap = sharpness_gap_series(traj);
  const double t_end = perp.back().first;

  auto try_fit = [&](const char* key, const Series& series, RateModel model,
                     double w0, double w1) {
    try {
      report.rates.emplace(key, fit_rate(series, model, w0, w1));
    } catch (const std::exception&) {
      // series unusable in the window (zeros or too short); leave the key out
    }
  };

  switch (report.regime.tag) {
    case Regime::Stable:
    case Regime::Subcritical: {
      report.tau = detect_tau(traj);
      const auto [w0p, w1p] = linear_window(perp);
      try_fit("theta_perp_abs", perp, RateModel::Linear, w0p, w1p);
      const auto [w0g, w1g] = linear_window(gap);
      try_fit("sharpness_gap", gap, RateModel::Linear, w0g, w1g);
      const auto [w0d, w1d] = linear_window(dist);
      try_fit("dist_par", dist, RateModel::Linear, w0d, w1d);
      if (report.regime.tag == Regime::Subcritical) {
        if (traj.records.back().loss < kConvergedLoss)
          report.suboptimality_gap =
              traj.records.back().sharpness_par - constants.lambda_star;
        report.checks.push_back(check_descent(traj, constants));
        report.checks.push_back(check_perp_bounds(traj));
        report.checks.push_back(check_suboptimality(traj, constants));
        if (report.tau) {
          TheoremCheck tb;
          tb.name = "tau_ceiling";
          const double bound_log = tau_bound_log(traj, constants);
          const double tau_log = std::log(std::max<double>(*report.tau, 1.0));
          tb.worst_margin = bound_log - tau_log;
          tb.holds = tb.worst_margin >= 0.0;
          std::ostringstream os;
          os << "ln(tau)=" << tau_log << " ln(bound)=" << bound_log;
          tb.details = os.str();
          report.checks.push_back(std::move(tb));
        }
      }
      break;
    }
    case Regime::Critical: {
      const double w0 = 1e3;
      try_fit("theta_perp_abs", perp, RateModel::PowerLaw, w0, t_end);
      try_fit("dist_par", dist, RateModel::PowerLaw, w0, t_end);
      try_fit("sharpness_gap", gap, RateModel::PowerLaw, w0, t_end);
      report.checks.push_back(check_descent(traj, constants));
      // Reported diagnostic only: tail ratio |phi| / dist against the slow
      // manifold slope kappa = sqrt(b / (c - a)) with a = nu/(c* lambda*),
      // b = nu/lambda*, c = 1.
      try {
        const std::vector<double> phis = phi_series(traj);
        const size_t n = phis.size();
        const size_t start = n - std::max<size_t>(1, n / 10);
        double ratio = 0.0;
        size_t cnt = 0;
        for (size_t i = start; i < n; ++i) {
          if (dist[i].second > 0.0) {
            ratio += std::abs(phis[i]) / dist[i].second;
            ++cnt;
          }
        }
        const double a = constants.nu / (constants.c_star * constants.lambda_star);
        const double kappa =
            std::sqrt((constants.nu / constants.lambda_star) / (1.0 - a));
        TheoremCheck kc;
        kc.name = "critical_kappa_ratio";
        kc.holds = true;
        kc.worst_margin = 0.0;
        std::ostringstream os;
        os << "diagnostic only: tail |phi|/dist="
           << (cnt ? ratio / cnt : std::numeric_limits<double>::quiet_NaN())
           << " kappa=" << kappa;
        kc.details = os.str();
        report.checks.push_back(std::move(kc));
      } catch (const std::exception&) {
      }
      break;
    }
    case Regime::Supercritical: {
      const auto [w0d, w1d] = linear_window(dist);
      try_fit("dist_par", dist, RateModel::Linear, w0d, w1d);
      const auto [w0g, w1g] = linear_window(gap);
      try_fit("sharpness_gap", gap, RateModel::Linear, w0g, w1g);
      try {
        report.cycle_amplitude = detect_cycle2(phi_series(traj), 0.25);
      } catch (const std::exception&) {
      }
      report.checks.push_back(check_perp_bounds(traj));
      break;
    }
  }
  return report;
}

}  // namespace eoslab
