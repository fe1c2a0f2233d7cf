#include "eoslab/analysis.hpp"

#include <doctest.h>

#include <cmath>

using namespace eoslab;

namespace {

// Convenience runner with per-step records.
Trajectory run_regime(int depth, double target, double eta, const Vector& theta0,
                      long steps) {
  const FactorisationProblem prob(depth, target);
  RunConfig rc;
  rc.eta = eta;
  rc.theta0 = theta0;
  rc.steps = steps;
  return run(prob, rc);
}

Trajectory synthetic_rising_sharpness() {
  const FactorisationProblem prob(5, 1.0);
  Trajectory traj;
  traj.depth = 5;
  traj.target = 1.0;
  traj.eta = 0.39;
  for (long t = 0; t < 50; ++t) {
    TrajectoryRecord rec;
    rec.t = t;
    rec.theta = prob.balanced_point();
    rec.tube = {prob.balanced_point(), 0.01};
    rec.sharpness_par = 5.05 + 0.01 * static_cast<double>(t);  // rising
    rec.dist_par = 0.0;
    rec.eta_lambda = traj.eta * rec.sharpness_par;
    rec.loss = 1e-6;
    traj.records.push_back(rec);
  }
  return traj;
}

}  // namespace

TEST_CASE("fit_rate recovers exact synthetic laws") {
  Series geometric, power;
  for (long t = 0; t <= 2000; ++t) {
    geometric.emplace_back(t, 3.0 * std::pow(0.9, t));
    if (t >= 1) power.emplace_back(t, 5.0 / std::sqrt(static_cast<double>(t)));
  }
  const RateFit lin = fit_rate(geometric, RateModel::Linear, 0, 2000);
  CHECK(lin.parameter == doctest::Approx(0.9).epsilon(1e-10));
  CHECK(lin.r_squared == doctest::Approx(1.0).epsilon(1e-12));

  const RateFit pow_fit = fit_rate(power, RateModel::PowerLaw, 1, 2000);
  CHECK(pow_fit.parameter == doctest::Approx(-0.5).epsilon(1e-10));
  CHECK(pow_fit.r_squared == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("fit_rate rejects nonpositive values and empty windows") {
  Series bad{{0.0, 1.0}, {1.0, 0.0}, {2.0, 1.0}};
  CHECK_THROWS_AS(fit_rate(bad, RateModel::Linear, 0, 2), std::domain_error);
  Series tiny{{0.0, 1.0}, {1.0, 2.0}};
  CHECK_THROWS_AS(fit_rate(tiny, RateModel::Linear, 5, 6),
                  std::invalid_argument);
}

TEST_CASE("detect_tau on the three qualitative shapes") {
  const FactorisationProblem prob(5, 1.0);

  // stable from the start
  const Trajectory stable = run_regime(
      5, 1.0, 0.25, prob.balanced_point() + 0.01 * prob.balanced_point(), 50);
  CHECK(detect_tau(stable) == 0);

  // supercritical: eta*lambda stays above 2 forever
  Vector par = sample_near(prob, 0.05, 1, 2)[0];
  const Vector theta_sc = par + 0.015 * normal(prob, par);
  const Trajectory sc = run_regime(5, 1.0, (2.0 + 4e-3) / 5.0, theta_sc, 20000);
  CHECK_FALSE(detect_tau(sc).has_value());

  // subcritical: finite stabilisation time
  Vector par_sub;
  double lam0 = 0.0;
  for (unsigned long seed = 0;; ++seed) {
    par_sub = sample_near(prob, 0.135, 1, seed)[0];
    lam0 = sharpness(prob, par_sub);
    if (lam0 >= 1.005 * 5.0) break;
    REQUIRE(seed < 64);
  }
  const double eta = 1.0 / lam0 + 1.0 / 5.0;
  const Trajectory sub = run_regime(
      5, 1.0, eta, par_sub + 0.01 * normal(prob, par_sub), 20000);
  const auto tau = detect_tau(sub);
  REQUIRE(tau.has_value());
  CHECK(*tau > 0);
  CHECK(*tau < 20000);
  const GeometryConstants constants = geometry_constants(prob, 50);
  CHECK(std::log(static_cast<double>(*tau)) <= tau_bound_log(sub, constants));

  // monotone in eta across a ladder toward the critical value
  long prev_tau = 0;
  for (int k = 1; k <= 5; ++k) {
    const double frac = static_cast<double>(k) / 6.0;
    const double eta_k = 2.0 / lam0 + frac * (0.4 - 2.0 / lam0);
    const Trajectory t_k = run_regime(
        5, 1.0, eta_k, par_sub + 0.01 * normal(prob, par_sub), 60000);
    const auto tau_k = detect_tau(t_k);
    REQUIRE(tau_k.has_value());
    CHECK(*tau_k >= prev_tau);
    prev_tau = *tau_k;
  }
}

TEST_CASE("detect_cycle2 on clean series") {
  // pure flip tail at alpha = 0.01: exact cycle +-0.1
  std::vector<double> flip;
  double x = 0.05;
  for (int t = 0; t < 4000; ++t) {
    x = flip_step(x, 2.01);
    flip.push_back(x);
  }
  const auto amp = detect_cycle2(flip, 0.25);
  REQUIRE(amp.has_value());
  CHECK(*amp == doctest::Approx(0.1).epsilon(1e-6));

  // the clean-map invariant band: alpha in [1e-4, 1e-2]
  for (double alpha : {1e-4, 1e-2}) {
    std::vector<double> series;
    double z = 0.5 * std::sqrt(alpha);
    const long warmup = static_cast<long>(400.0 / alpha);
    for (long t = 0; t < warmup; ++t) z = flip_step(z, 2.0 + alpha);
    for (long t = 0; t < 2000; ++t) {
      z = flip_step(z, 2.0 + alpha);
      series.push_back(z);
    }
    const auto a = detect_cycle2(series, 0.5);
    REQUIRE(a.has_value());
    CHECK(*a == doctest::Approx(std::sqrt(alpha)).epsilon(1e-4));
  }

  // decaying oscillation yields no cycle
  std::vector<double> decay;
  double v = 0.1;
  for (int t = 0; t < 4000; ++t) {
    v = -0.999 * v;
    decay.push_back(v);
  }
  CHECK_FALSE(detect_cycle2(decay, 0.25).has_value());

  // below the amplitude floor counts as no cycle
  std::vector<double> tiny;
  double s = 1e-13;
  for (int t = 0; t < 100; ++t) {
    s = -s;
    tiny.push_back(s);
  }
  CHECK_FALSE(detect_cycle2(tiny, 0.5).has_value());

  // a zero breaks strict alternation
  std::vector<double> ties(100, 0.0);
  CHECK_FALSE(detect_cycle2(ties, 0.5).has_value());
}

TEST_CASE("check_descent holds trivially at the balanced point") {
  const FactorisationProblem prob(5, 1.0);
  const Trajectory still = run_regime(5, 1.0, 0.3, prob.balanced_point(), 10);
  const GeometryConstants constants = geometry_constants(prob, 0);
  const TheoremCheck check = check_descent(still, constants);
  CHECK(check.holds);
  CHECK(std::abs(check.worst_margin) <= 1e-12);
}

TEST_CASE("check_descent flags an adversarial rising-sharpness trajectory") {
  const Trajectory bad = synthetic_rising_sharpness();
  const GeometryConstants constants =
      geometry_constants(FactorisationProblem(5, 1.0), 0);
  const TheoremCheck check = check_descent(bad, constants);
  CHECK_FALSE(check.holds);
  REQUIRE(check.first_violation_step.has_value());
  CHECK(*check.first_violation_step == 0);
}

TEST_CASE("check_perp_bounds basics") {
  const FactorisationProblem prob(5, 1.0);

  // stable run: not applicable but holds
  const Trajectory stable = run_regime(
      5, 1.0, 0.25, prob.balanced_point() + 0.01 * prob.balanced_point(), 20);
  const TheoremCheck na = check_perp_bounds(stable);
  CHECK(na.holds);
  CHECK(na.details.find("not-applicable") != std::string::npos);

  // at t = 0 the lower bound equals |perp0| exactly
  Vector par = sample_near(prob, 0.135, 1, 1)[0];
  const double lam0 = sharpness(prob, par);
  const double eta = 1.0 / lam0 + 0.2;
  if (eta * lam0 > 2.0) {
    const Trajectory sub =
        run_regime(5, 1.0, eta, par + 0.01 * normal(prob, par), 5000);
    const TheoremCheck check = check_perp_bounds(sub);
    CHECK(check.holds);
  }
}

TEST_CASE("check_suboptimality is not applicable before convergence") {
  const FactorisationProblem prob(5, 1.0);
  const Trajectory early = run_regime(
      5, 1.0, 0.25, prob.balanced_point() + 0.02 * prob.balanced_point(), 50);
  const GeometryConstants constants = geometry_constants(prob, 0);
  const TheoremCheck check = check_suboptimality(early, constants);
  CHECK(check.holds);
  CHECK(check.details.find("not-applicable") != std::string::npos);
}

TEST_CASE("summarize on a short supercritical run") {
  const FactorisationProblem prob(5, 1.0);
  const GeometryConstants constants = geometry_constants(prob, 50);
  const double alpha = 8e-3;
  Vector par = sample_near(prob, 0.05, 1, 3)[0];
  const Vector theta0 = par + 0.5 * std::sqrt(alpha) * normal(prob, par);
  const Trajectory traj =
      run_regime(5, 1.0, (2.0 + alpha) / 5.0, theta0, 25000);
  const RegimeReport report = summarize(traj, constants);
  CHECK(report.regime.tag == Regime::Supercritical);
  REQUIRE(report.cycle_amplitude.has_value());
  CHECK(*report.cycle_amplitude / std::sqrt(alpha) ==
        doctest::Approx(1.0).epsilon(0.2));
  REQUIRE(report.rates.count("dist_par"));
  CHECK(report.rates.at("dist_par").parameter < 1.0);
}

TEST_CASE("summarize on critical runs, including depth two") {
  struct Case {
    int depth;
    double d0;
    long steps;
  };
  for (const Case& c : {Case{5, 0.15, 30000}, Case{2, 0.15, 30000}}) {
    const FactorisationProblem prob(c.depth, 1.0);
    const GeometryConstants constants = geometry_constants(prob, 20);
    const Vector par = sample_near(prob, c.d0, 1, 5)[0];
    const Vector theta0 = par + 1e-2 * normal(prob, par);
    const double eta = 2.0 / prob.lambda_star();
    const Trajectory traj = run_regime(c.depth, 1.0, eta, theta0, c.steps);
    const RegimeReport report = summarize(traj, constants);
    CHECK(report.regime.tag == Regime::Critical);
    REQUIRE(report.rates.count("dist_par"));
    CHECK(report.rates.at("dist_par").parameter ==
          doctest::Approx(-0.5).epsilon(0.2));
    bool saw_descent = false, saw_kappa = false;
    for (const auto& check : report.checks) {
      if (check.name == "descent_lemma") {
        saw_descent = true;
        CHECK(check.holds);
      }
      if (check.name == "critical_kappa_ratio") saw_kappa = true;
    }
    CHECK(saw_descent);
    CHECK(saw_kappa);
  }
}

TEST_CASE("summarize on a short subcritical run") {
  const FactorisationProblem prob(5, 1.0);
  const GeometryConstants constants = geometry_constants(prob, 50);
  Vector par;
  double lam0 = 0.0;
  for (unsigned long seed = 0;; ++seed) {
    par = sample_near(prob, 0.135, 1, seed)[0];
    lam0 = sharpness(prob, par);
    if (lam0 >= 1.005 * 5.0) break;
    REQUIRE(seed < 64);
  }
  const double eta = 1.0 / lam0 + 0.2;
  const Trajectory traj =
      run_regime(5, 1.0, eta, par + 0.01 * normal(prob, par), 80000);
  const RegimeReport report = summarize(traj, constants);
  CHECK(report.regime.tag == Regime::Subcritical);
  REQUIRE(report.tau.has_value());
  CHECK(*report.tau > 0);
  REQUIRE(report.rates.count("theta_perp_abs"));
  CHECK(report.rates.at("theta_perp_abs").parameter < 1.0);
  REQUIRE(report.suboptimality_gap.has_value());
  CHECK(*report.suboptimality_gap > 0.0);
  for (const auto& check : report.checks) CHECK(check.holds);
}
