#include "eoslab/experiment.hpp"

#include "eoslab/errors.hpp"
#include "eoslab/fd.hpp"
#include "eoslab/svg.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

namespace eoslab {

namespace {

using nlohmann::json;

std::string format_value(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

Regime regime_from_string(const std::string& name) {
  if (name == "stable") return Regime::Stable;
  if (name == "subcritical") return Regime::Subcritical;
  if (name == "critical") return Regime::Critical;
  if (name == "supercritical") return Regime::Supercritical;
  throw std::invalid_argument("unknown regime: " + name);
}

json rate_to_json(const RateFit& fit) {
  return json{{"model", fit.model == RateModel::Linear ? "Linear" : "PowerLaw"},
              {"parameter", fit.parameter},
              {"r_squared", fit.r_squared},
              {"window", {fit.window_start, fit.window_end}}};
}

json check_to_json(const TheoremCheck& check) {
  json j{{"name", check.name},
         {"holds", check.holds},
         {"worst_margin", check.worst_margin},
         {"details", check.details}};
  if (check.first_violation_step)
    j["first_violation_step"] = *check.first_violation_step;
  else
    j["first_violation_step"] = nullptr;
  return j;
}

std::vector<int> parse_depth_spec(const std::string& spec) {
  const auto dots = spec.find("..");
  std::vector<int> depths;
  if (dots == std::string::npos) {
    depths.push_back(std::stoi(spec));
  } else {
    const int lo = std::stoi(spec.substr(0, dots));
    const int hi = std::stoi(spec.substr(dots + 2));
    if (lo > hi) throw std::invalid_argument("empty depth range: " + spec);
    for (int p = lo; p <= hi; ++p) depths.push_back(p);
  }
  for (int p : depths)
    if (p < 2) throw std::invalid_argument("depth must be at least 2");
  return depths;
}

double loglog_slope(const std::vector<double>& xs,
                    const std::vector<double>& ys) {
  Series series;
  for (size_t i = 0; i < xs.size(); ++i) series.emplace_back(xs[i], ys[i]);
  // reuse fit_rate with a power-law model over the full window
  const double lo = *std::min_element(xs.begin(), xs.end());
  const double hi = *std::max_element(xs.begin(), xs.end());
  return fit_rate(series, RateModel::PowerLaw, lo, hi).parameter;
}

}  // namespace

ExperimentConfig config_from_json(const json& j) {
  ExperimentConfig config;
  config.depth = j.value("depth", config.depth);
  config.target = j.value("target", config.target);
  config.regime = j.value("regime", config.regime);
  config.eta = j.value("eta", config.eta);
  config.alpha = j.value("alpha", config.alpha);
  config.perp0 = j.value("perp0", config.perp0);
  config.par_offset = j.value("par_offset", config.par_offset);
  config.inits = j.value("inits", config.inits);
  config.steps = j.value("steps", config.steps);
  config.record_every = j.value("record_every", config.record_every);
  config.seed = j.value("seed", config.seed);
  config.out_dir = j.value("out_dir", config.out_dir);
  return config;
}

json config_to_json(const ExperimentConfig& config) {
  return json{{"depth", config.depth},
              {"target", config.target},
              {"regime", config.regime},
              {"eta", config.eta},
              {"alpha", config.alpha},
              {"perp0", config.perp0},
              {"par_offset", config.par_offset},
              {"inits", config.inits},
              {"steps", config.steps},
              {"record_every", config.record_every},
              {"seed", config.seed},
              {"out_dir", config.out_dir}};
}

ResolvedExperiment resolve(const ExperimentConfig& raw) {
  ResolvedExperiment resolved;
  resolved.config = raw;
  ExperimentConfig& config = resolved.config;

  const FactorisationProblem prob(config.depth, config.target);
  const double lambda_star = prob.lambda_star();
  const double y_scale = std::pow(config.target, 1.0 / config.depth);
  const Regime regime = regime_from_string(config.regime);

  if (config.inits < 1) throw std::invalid_argument("inits must be >= 1");
  if (config.record_every < 1)
    throw std::invalid_argument("record_every must be >= 1");
  if (!(config.alpha > 0.0)) throw std::invalid_argument("alpha must be > 0");

  if (config.par_offset == 0.0) {
    switch (regime) {
      case Regime::Subcritical: config.par_offset = 0.135 * y_scale; break;
      case Regime::Critical: config.par_offset = 0.15 * y_scale; break;
      default: config.par_offset = 0.05 * y_scale; break;
    }
  }
  if (config.perp0 == 0.0)
    config.perp0 = regime == Regime::Supercritical
                       ? 0.5 * std::sqrt(config.alpha)
                       : 1e-2;
  if (config.steps == 0) {
    switch (regime) {
      case Regime::Stable: config.steps = 5000; break;
      case Regime::Subcritical: config.steps = 90000; break;
      case Regime::Critical: config.steps = 100000; break;
      case Regime::Supercritical:
        config.steps =
            std::min<long>(400000, static_cast<long>(std::ceil(200.0 / config.alpha)));
        break;
    }
  }

  // Initial on-manifold points. The subcritical preset needs a sharpness
  // surplus so the band (2/lambda0, 2/lambda*) is usable; resample until
  // lambda0 >= 1.005 * lambda*.
  for (int k = 0; k < config.inits; ++k) {
    Vector par;
    double lam = 0.0;
    unsigned long draw_seed = config.seed + static_cast<unsigned long>(k);
    for (int attempt = 0;; ++attempt) {
      par = sample_near(prob, config.par_offset, 1, draw_seed)[0];
      lam = sharpness(prob, par);
      if (regime != Regime::Subcritical || lam >= 1.005 * lambda_star) break;
      if (attempt > 256)
        throw NumericalError(
            "resolve: could not sample a subcritical start; raise par_offset");
      draw_seed += 7919;
    }
    resolved.theta0.push_back(par + config.perp0 * normal(prob, par));
    resolved.lambda0.push_back(lam);
  }

  if (config.eta == 0.0) {
    switch (regime) {
      case Regime::Stable: {
        const double lam_max = *std::max_element(resolved.lambda0.begin(),
                                                 resolved.lambda0.end());
        config.eta = 1.6 / std::max(lam_max, lambda_star);
        break;
      }
      case Regime::Subcritical: {
        const double lam_min = *std::min_element(resolved.lambda0.begin(),
                                                 resolved.lambda0.end());
        if (lam_min <= lambda_star)
          throw NumericalError("resolve: subcritical band is empty");
        config.eta = 1.0 / lam_min + 1.0 / lambda_star;
        break;
      }
      case Regime::Critical:
        config.eta = 2.0 / lambda_star;
        break;
      case Regime::Supercritical:
        config.eta = (2.0 + config.alpha) / lambda_star;
        break;
    }
  }
  return resolved;
}

void emit_csv(const Trajectory& traj, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw NumericalError("emit_csv: cannot open " + path);
  out << "t,loss,sharpness_par,dist_par,theta_perp,eta_lambda\n";
  for (const auto& rec : traj.records) {
    out << rec.t << ',' << format_value(rec.loss) << ','
        << format_value(rec.sharpness_par) << ',' << format_value(rec.dist_par)
        << ',' << format_value(rec.tube.theta_perp) << ','
        << format_value(rec.eta_lambda) << '\n';
  }
  if (!out) throw NumericalError("emit_csv: write failed for " + path);
}

json report_to_json(const RegimeReport& report) {
  json rates = json::object();
  for (const auto& [key, fit] : report.rates) rates[key] = rate_to_json(fit);
  json checks = json::array();
  for (const auto& check : report.checks) checks.push_back(check_to_json(check));
  json j{{"regime",
          {{"tag", regime_name(report.regime.tag)},
           {"eta", report.regime.eta},
           {"margin_star", report.regime.margin_star},
           {"margin_zero", report.regime.margin_zero}}},
         {"rates", rates},
         {"checks", checks}};
  j["tau"] = report.tau ? json(*report.tau) : json(nullptr);
  j["cycle_amplitude"] =
      report.cycle_amplitude ? json(*report.cycle_amplitude) : json(nullptr);
  j["suboptimality_gap"] =
      report.suboptimality_gap ? json(*report.suboptimality_gap) : json(nullptr);
  return j;
}

void emit_summary(const json& summary, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw NumericalError("emit_summary: cannot open " + path);
  out << summary.dump(2) << '\n';
  if (!out) throw NumericalError("emit_summary: write failed for " + path);
}

void emit_svg(const std::vector<Trajectory>& trajectories, bool log_x,
              const std::string& out_dir) {
  struct Panel {
    const char* file;
    const char* title;
    const char* y_label;
  };
  const Panel panels[] = {
      {"dist_par.svg", "distance to the balanced point", "|theta_par - theta*|"},
      {"theta_perp.svg", "orthogonal coordinate", "|theta_perp|"},
      {"sharpness_gap.svg", "sharpness suboptimality", "lambda - lambda*"},
  };
  for (int panel = 0; panel < 3; ++panel) {
    LineChart chart(panels[panel].title, "t", panels[panel].y_label, log_x,
                    true);
    int idx = 0;
    for (const auto& traj : trajectories) {
      const double lambda_star =
          FactorisationProblem(traj.depth, traj.target).lambda_star();
      // cap the polyline density; the charts are diagnostics, not data
      const size_t stride = std::max<size_t>(1, traj.records.size() / 2000);
      std::vector<double> xs, ys;
      for (size_t i = 0; i < traj.records.size(); i += stride) {
        const auto& rec = traj.records[i];
        xs.push_back(static_cast<double>(rec.t));
        switch (panel) {
          case 0: ys.push_back(rec.dist_par); break;
          case 1: ys.push_back(std::abs(rec.tube.theta_perp)); break;
          default: ys.push_back(rec.sharpness_par - lambda_star); break;
        }
      }
      chart.add_series("init " + std::to_string(idx++), xs, ys);
    }
    chart.write(out_dir + "/" + panels[panel].file);
  }
}

ExperimentOutput run_experiment(const ExperimentConfig& raw) {
  const ResolvedExperiment resolved = resolve(raw);
  const ExperimentConfig& config = resolved.config;
  const FactorisationProblem prob(config.depth, config.target);
  const GeometryConstants constants = geometry_constants(prob);

  std::filesystem::create_directories(config.out_dir);

  ExperimentOutput output;
  json taus = json::array(), rates = json::array(), cycles = json::array(),
       gaps = json::array(), checks = json::array(),
       margins_zero = json::array();
  bool diverged = false;
  std::string tag;

  for (int k = 0; k < config.inits; ++k) {
    RunConfig rc;
    rc.eta = config.eta;
    rc.theta0 = resolved.theta0[static_cast<size_t>(k)];
    rc.steps = config.steps;
    rc.record_every = config.record_every;
    rc.seed = config.seed + static_cast<unsigned long>(k);
    Trajectory traj = run(prob, rc);
    diverged = diverged || traj.diverged;

    char name[32];
    std::snprintf(name, sizeof(name), "traj_%03d.csv", k);
    emit_csv(traj, config.out_dir + "/" + name);

    const RegimeReport report = summarize(traj, constants);
    const json rj = report_to_json(report);
    if (k == 0) tag = rj["regime"]["tag"];
    margins_zero.push_back(rj["regime"]["margin_zero"]);
    taus.push_back(rj["tau"]);
    rates.push_back(rj["rates"]);
    cycles.push_back(rj["cycle_amplitude"]);
    gaps.push_back(rj["suboptimality_gap"]);
    checks.push_back(rj["checks"]);
    output.trajectories.push_back(std::move(traj));
  }

  output.summary = json{
      {"config", config_to_json(config)},
      {"regime",
       {{"tag", tag},
        {"eta", config.eta},
        {"margin_star", config.eta - 2.0 / prob.lambda_star()},
        {"margin_zero_per_init", margins_zero}}},
      {"tau", taus},
      {"rates", rates},
      {"cycle_amplitude", cycles},
      {"suboptimality_gap", gaps},
      {"checks", checks},
      {"divergence_flag", diverged}};
  emit_summary(output.summary, config.out_dir + "/summary.json");
  emit_svg(output.trajectories, regime_from_string(config.regime) == Regime::Critical,
           config.out_dir);
  return output;
}

int run_check_constants(const std::vector<int>& depths, double target) {
  bool ok = true;
  std::printf("%6s %12s %12s %12s %14s\n", "depth", "lambda*", "nu", "c*",
              "nu/(c* l*)");
  for (int p : depths) {
    const FactorisationProblem prob(p, target);
    const GeometryConstants gc = geometry_constants(prob, 0);
    const double closed = c_star_closed_form(prob);
    const double ratio = gc.nu / (gc.c_star * gc.lambda_star);
    const bool row_ok = ratio <= 0.5 + 1e-12 &&
                        std::abs(gc.c_star - closed) <= 1e-10 * std::abs(closed);
    ok = ok && row_ok;
    std::printf("%6d %12.6g %12.6g %12.6g %14.10f %s\n", p, gc.lambda_star,
                gc.nu, gc.c_star, ratio, row_ok ? "" : "VIOLATION");
  }
  std::printf("constants check: %s\n", ok ? "pass" : "FAIL");
  return ok ? 0 : 3;
}

int run_check_derivatives(const std::vector<int>& depths, double target,
                          unsigned long seed) {
  std::mt19937_64 engine(seed);
  std::uniform_real_distribution<double> unit(0.5, 2.0);
  bool ok = true;
  for (int p : depths) {
    const FactorisationProblem prob(p, target);
    auto field_f = [&](const Vector& th) { return f(prob, th); };
    auto field_l = [&](const Vector& th) { return loss(prob, th); };
    double worst3 = 0.0, worst4 = 0.0, worst1 = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
      Vector theta(p);
      for (int i = 0; i < p; ++i) theta[i] = unit(engine);
      const Vector g = grad_f(prob, theta);
      const Vector g_fd = fd::gradient(field_f, theta);
      worst1 = std::max(worst1, (g - g_fd).norm() / std::max(1.0, g.norm()));
      const Vector par = theta * std::pow(target / f(prob, theta), 1.0 / p);
      const Vector n = normal(prob, par);
      const double d3 = dl3_n(prob, par);
      const double d4 = dl4_n(prob, par);
      worst3 = std::max(worst3,
                        std::abs(fd::directional(field_l, par, n, 3) - d3) /
                            std::max(1.0, std::abs(d3)));
      worst4 = std::max(worst4,
                        std::abs(fd::directional(field_l, par, n, 4) - d4) /
                            std::max(1.0, std::abs(d4)));
    }
    const bool row_ok = worst1 < 1e-5 && worst3 < 1e-5 && worst4 < 1e-4;
    ok = ok && row_ok;
    std::printf("depth %d: grad %.2e, D3l[n^3] %.2e, D4l[n^4] %.2e %s\n", p,
                worst1, worst3, worst4, row_ok ? "" : "VIOLATION");
  }
  std::printf("derivatives check: %s\n", ok ? "pass" : "FAIL");
  return ok ? 0 : 3;
}

int run_check_normalform(int depth, double target, unsigned long seed) {
  const FactorisationProblem prob(depth, target);
  const double radius = 0.05 * std::pow(target, 1.0 / depth);
  const Vector par = sample_near(prob, radius, 1, seed)[0];
  const double eta = 2.0 / prob.lambda_star();
  const Vector n = normal(prob, par);

  std::vector<double> ladder{1e-2, 5e-3, 2.5e-3, 1.25e-3};
  std::vector<double> perp_res, par_res, phi_res;
  for (double t0 : ladder) {
    const Vector theta = par + t0 * n;
    const Vector theta_next = gd_step(prob, eta, theta);
    const TubeCoords tube{par, t0};
    const TubeCoords tube_next = tube_coords(prob, theta_next);
    perp_res.push_back(std::abs(tube_next.theta_perp -
                                normal_form_perp_predict(prob, eta, tube)));
    par_res.push_back(
        (tube_next.theta_par - normal_form_par_predict(prob, eta, tube)).norm());
    const double phi0 = phi_coordinate(prob, eta, tube);
    const double lam = sharpness(prob, par);
    const double predicted = (1.0 - eta * lam) * phi0 + phi0 * phi0 * phi0;
    phi_res.push_back(
        std::abs(phi_coordinate(prob, eta, tube_next) - predicted));
  }
  const double slope_perp = loglog_slope(ladder, perp_res);
  const double slope_par = loglog_slope(ladder, par_res);
  const double slope_phi = loglog_slope(ladder, phi_res);
  const bool ok = std::abs(slope_perp - 4.0) <= 0.5 &&
                  std::abs(slope_par - 3.0) <= 0.5 &&
                  std::abs(slope_phi - 4.0) <= 0.5;
  std::printf("residual slopes: perp %.3f (4 +- 0.5), par %.3f (3 +- 0.5), "
              "phi conjugation %.3f (4 +- 0.5)\n",
              slope_perp, slope_par, slope_phi);
  std::printf("normalform check: %s\n", ok ? "pass" : "FAIL");
  return ok ? 0 : 3;
}

int cli_main(int argc, const char* const* argv) {
  CLI::App app{"gradient-descent laboratory for overparametrised scalar "
               "factorisation"};
  std::string depth_spec = "5";
  std::string config_path, check_mode, regime, out_dir;
  ExperimentConfig config;
  double target = 1.0, eta = 0.0, alpha = 0.0, perp0 = 0.0, par_offset = 0.0;
  long steps = 0, record_every = 0;
  int inits = 0;
  unsigned long seed = 0;

  app.add_option("--depth", depth_spec,
                 "number of factors (a range a..b is accepted by --check)");
  app.add_option("--target", target, "target value y > 0");
  app.add_option("--regime", regime,
                 "stable|subcritical|critical|supercritical")
      ->check(CLI::IsMember(
          {"stable", "subcritical", "critical", "supercritical"}));
  app.add_option("--eta", eta, "explicit step size (overrides --regime)");
  app.add_option("--alpha", alpha,
                 "supercritical offset: eta = (2+alpha)/lambda*");
  app.add_option("--perp0", perp0, "initial |theta_perp|");
  app.add_option("--par-offset", par_offset,
                 "distance of theta_par_0 from theta*");
  app.add_option("--inits", inits, "number of initialisations");
  app.add_option("--steps", steps, "gradient-descent steps");
  app.add_option("--record-every", record_every, "record spacing");
  app.add_option("--seed", seed, "seed for the initialisation sampler");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--config", config_path, "JSON config file (flags win)");
  app.add_option("--check", check_mode,
                 "constants|derivatives|normalform|all self-check")
      ->check(CLI::IsMember({"constants", "derivatives", "normalform", "all"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) throw std::invalid_argument("cannot open config " + config_path);
      json j = json::parse(in);
      config = config_from_json(j);
    }
    if (app.count("--depth")) {
      const auto depths = parse_depth_spec(depth_spec);
      if (check_mode.empty() && depths.size() != 1)
        throw std::invalid_argument("depth ranges are only valid with --check");
      config.depth = depths.front();
    }
    if (app.count("--target")) config.target = target;
    if (app.count("--regime")) config.regime = regime;
    if (app.count("--eta")) config.eta = eta;
    if (app.count("--alpha")) config.alpha = alpha;
    if (app.count("--perp0")) config.perp0 = perp0;
    if (app.count("--par-offset")) config.par_offset = par_offset;
    if (app.count("--inits")) config.inits = inits;
    if (app.count("--steps")) config.steps = steps;
    if (app.count("--record-every")) config.record_every = record_every;
    if (app.count("--seed")) config.seed = seed;
    if (app.count("--out")) config.out_dir = out_dir;

    if (!check_mode.empty()) {
      const auto depths = parse_depth_spec(depth_spec);
      int rc = 0;
      if (check_mode == "constants" || check_mode == "all")
        rc = std::max(rc, run_check_constants(depths, config.target));
      if (check_mode == "derivatives" || check_mode == "all")
        rc = std::max(rc, run_check_derivatives(depths, config.target,
                                                config.seed));
      if (check_mode == "normalform" || check_mode == "all")
        rc = std::max(rc, run_check_normalform(depths.front(), config.target,
                                               config.seed));
      return rc;
    }

    const ExperimentOutput output = run_experiment(config);
    std::cout << "wrote " << output.trajectories.size()
              << " trajectories and summary.json under "
              << output.summary["config"]["out_dir"].get<std::string>() << "\n";
    if (output.summary["divergence_flag"].get<bool>())
      std::cout << "note: at least one trajectory hit the divergence guard\n";
    return 0;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const json::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  }
}

}  // namespace eoslab
