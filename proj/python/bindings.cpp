#include "eoslab/analysis.hpp"
#include "eoslab/dynamics.hpp"
#include "eoslab/experiment.hpp"
#include "eoslab/manifold.hpp"
#include "eoslab/problem.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace eoslab;

namespace {

py::dict rate_dict(const RateFit& fit) {
  py::dict d;
  d["model"] = fit.model == RateModel::Linear ? "Linear" : "PowerLaw";
  d["parameter"] = fit.parameter;
  d["r_squared"] = fit.r_squared;
  d["window"] = py::make_tuple(fit.window_start, fit.window_end);
  return d;
}

}  // namespace

PYBIND11_MODULE(_eoslab, m) {
  m.doc() = "gradient-descent laboratory for overparametrised scalar "
            "factorisation";

  py::class_<FactorisationProblem>(m, "FactorisationProblem")
      .def(py::init<int, double>(), py::arg("depth"), py::arg("target"))
      .def_readonly("depth", &FactorisationProblem::depth)
      .def_readonly("target", &FactorisationProblem::target)
      .def("balanced_point", &FactorisationProblem::balanced_point)
      .def("lambda_star", &FactorisationProblem::lambda_star);

  py::class_<TubeCoords>(m, "TubeCoords")
      .def(py::init([](const Vector& par, double perp) {
             return TubeCoords{par, perp};
           }),
           py::arg("theta_par"), py::arg("theta_perp"))
      .def_readonly("theta_par", &TubeCoords::theta_par)
      .def_readonly("theta_perp", &TubeCoords::theta_perp);

  py::class_<GeometryConstants>(m, "GeometryConstants")
      .def_readonly("lambda_star", &GeometryConstants::lambda_star)
      .def_readonly("nu", &GeometryConstants::nu)
      .def_readonly("mu", &GeometryConstants::mu)
      .def_readonly("ball_radius", &GeometryConstants::ball_radius)
      .def_readonly("exact_radius", &GeometryConstants::exact_radius)
      .def_readonly("c_star", &GeometryConstants::c_star)
      .def_readonly("lipschitz", &GeometryConstants::lipschitz);

  py::class_<TrajectoryRecord>(m, "TrajectoryRecord")
      .def_readonly("t", &TrajectoryRecord::t)
      .def_readonly("theta", &TrajectoryRecord::theta)
      .def_readonly("loss", &TrajectoryRecord::loss)
      .def_readonly("tube", &TrajectoryRecord::tube)
      .def_readonly("sharpness_par", &TrajectoryRecord::sharpness_par)
      .def_readonly("dist_par", &TrajectoryRecord::dist_par)
      .def_readonly("eta_lambda", &TrajectoryRecord::eta_lambda);

  py::class_<Trajectory>(m, "Trajectory")
      .def_readonly("depth", &Trajectory::depth)
      .def_readonly("target", &Trajectory::target)
      .def_readonly("eta", &Trajectory::eta)
      .def_readonly("records", &Trajectory::records)
      .def_readonly("diverged", &Trajectory::diverged)
      .def_readonly("divergence_step", &Trajectory::divergence_step);

  py::enum_<Regime>(m, "Regime")
      .value("Stable", Regime::Stable)
      .value("Subcritical", Regime::Subcritical)
      .value("Critical", Regime::Critical)
      .value("Supercritical", Regime::Supercritical);

  py::class_<RegimeSpec>(m, "RegimeSpec")
      .def_readonly("tag", &RegimeSpec::tag)
      .def_readonly("eta", &RegimeSpec::eta)
      .def_readonly("margin_star", &RegimeSpec::margin_star)
      .def_readonly("margin_zero", &RegimeSpec::margin_zero);

  // problem
  m.def("f", &f, py::arg("prob"), py::arg("theta"));
  m.def("grad_f", &grad_f, py::arg("prob"), py::arg("theta"));
  m.def("hess_f", &hess_f, py::arg("prob"), py::arg("theta"));
  m.def("deriv_tensor_contract", &deriv_tensor_contract, py::arg("prob"),
        py::arg("theta"), py::arg("order"), py::arg("dirs"));
  m.def("loss", &loss, py::arg("prob"), py::arg("theta"));
  m.def("grad_loss", &grad_loss, py::arg("prob"), py::arg("theta"));
  m.def("sharpness", &sharpness, py::arg("prob"), py::arg("theta_par"));
  m.def("normal", &normal, py::arg("prob"), py::arg("theta_par"));
  m.def("dl3_n", &dl3_n, py::arg("prob"), py::arg("theta_par"));
  m.def("dl4_n", &dl4_n, py::arg("prob"), py::arg("theta_par"));
  m.def("c_coeff", &c_coeff, py::arg("prob"), py::arg("eta"),
        py::arg("theta_par"));
  m.def("c_star_closed_form", &c_star_closed_form, py::arg("prob"));

  // manifold
  m.def("project", &project, py::arg("prob"), py::arg("theta"));
  m.def("tube_coords", &tube_coords, py::arg("prob"), py::arg("theta"));
  m.def("reconstruct", &reconstruct, py::arg("prob"), py::arg("tube"));
  m.def("riem_grad_lambda", &riem_grad_lambda, py::arg("prob"),
        py::arg("theta_par"));
  m.def("riem_hess_lambda", &riem_hess_lambda, py::arg("prob"),
        py::arg("theta_par"));
  m.def("riem_hess_lambda_closed", &riem_hess_lambda_closed, py::arg("prob"),
        py::arg("theta_par"));
  m.def("tangent_eigenvalues", &tangent_eigenvalues, py::arg("prob"),
        py::arg("theta_par"), py::arg("hessian"));
  m.def("sample_near", &sample_near, py::arg("prob"), py::arg("radius"),
        py::arg("count"), py::arg("seed"));
  m.def("geometry_constants", &geometry_constants, py::arg("prob"),
        py::arg("lipschitz_samples") = 200, py::arg("seed") = 0);

  // dynamics
  m.def("gd_step", &gd_step, py::arg("prob"), py::arg("eta"), py::arg("theta"));
  m.def(
      "run",
      [](const FactorisationProblem& prob, double eta, const Vector& theta0,
         long steps, long record_every) {
        RunConfig rc;
        rc.eta = eta;
        rc.theta0 = theta0;
        rc.steps = steps;
        rc.record_every = record_every;
        return run(prob, rc);
      },
      py::arg("prob"), py::arg("eta"), py::arg("theta0"), py::arg("steps"),
      py::arg("record_every") = 1);
  m.def("classify", &classify, py::arg("prob"), py::arg("eta"),
        py::arg("theta0"));
  m.def("flip_step", &flip_step, py::arg("x"), py::arg("eta_lambda"));
  m.def("parabolic_step", &parabolic_step, py::arg("x"), py::arg("y"),
        py::arg("a"), py::arg("b"), py::arg("c"));
  m.def("normal_form_perp_predict", &normal_form_perp_predict, py::arg("prob"),
        py::arg("eta"), py::arg("tube"));
  m.def("normal_form_par_predict", &normal_form_par_predict, py::arg("prob"),
        py::arg("eta"), py::arg("tube"));
  m.def("phi_coordinate", &phi_coordinate, py::arg("prob"), py::arg("eta"),
        py::arg("tube"));

  // analysis
  m.def("detect_tau", &detect_tau, py::arg("traj"));
  m.def(
      "fit_rate",
      [](const Series& series, const std::string& model, double w0, double w1) {
        const RateModel rm =
            model == "Linear" ? RateModel::Linear : RateModel::PowerLaw;
        return rate_dict(fit_rate(series, rm, w0, w1));
      },
      py::arg("series"), py::arg("model"), py::arg("window_start"),
      py::arg("window_end"));
  m.def("detect_cycle2", &detect_cycle2, py::arg("series"),
        py::arg("tail_fraction"));
  m.def(
      "summarize",
      [](const Trajectory& traj, const GeometryConstants& constants) {
        RegimeReport report = summarize(traj, constants);
        return py::module_::import("json").attr("loads")(
            report_to_json(report).dump());
      },
      py::arg("traj"), py::arg("constants"));

  // experiment
  m.def(
      "run_experiment",
      [](const std::string& config_json) {
        const ExperimentConfig config =
            config_from_json(nlohmann::json::parse(config_json));
        const ExperimentOutput output = run_experiment(config);
        return py::module_::import("json").attr("loads")(output.summary.dump());
      },
      py::arg("config_json"));
}
