#include <optional>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "definetti/closed_form.hpp"
#include "definetti/game.hpp"
#include "definetti/strategies.hpp"
#include "definetti/verify.hpp"

namespace py = pybind11;
using namespace definetti;

namespace {

py::dict estimate_dict(const McEstimate& e) {
  py::dict d;
  d["mean"] = e.mean;
  d["std_error"] = e.std_error;
  d["n_paths"] = e.n_paths;
  d["dt"] = e.dt;
  d["t_max"] = e.t_max;
  d["truncation_bound"] = e.truncation_bound;
  return d;
}

GameSetup make_setup(const ModelParams& params, double x0, double p0, double dt, double t_max) {
  GameSetup setup{params, x0, p0, TimeGrid::from_horizon(dt, t_max), 1.0};
  setup.validate();
  return setup;
}

GameSpec make_spec(const std::string& controller, const std::string& stopper) {
  return {ControllerStrategy::parse(controller), StopperStrategy::parse(stopper)};
}

}  // namespace

PYBIND11_MODULE(definetti, m) {
  m.doc() = "Controller-stopper dividend game: closed form, simulation and checks";

  py::class_<ModelParams>(m, "ModelParams")
      .def(py::init([](double mu, double sigma, double r) {
             ModelParams p{mu, sigma, r};
             p.validate();
             return p;
           }),
           py::arg("mu") = 0.03, py::arg("sigma") = 0.12, py::arg("r") = 0.01)
      .def_readonly("mu", &ModelParams::mu)
      .def_readonly("sigma", &ModelParams::sigma)
      .def_readonly("r", &ModelParams::r);

  py::class_<ClosedForm>(m, "ClosedForm")
      .def(py::init<ModelParams>(), py::arg("params") = ModelParams{})
      .def_property_readonly("zeta1", &ClosedForm::zeta1)
      .def_property_readonly("zeta2", &ClosedForm::zeta2)
      .def_property_readonly("barrier", &ClosedForm::barrier)
      .def_property_readonly("p_hat", &ClosedForm::p_hat)
      .def("psi", &ClosedForm::psi, py::arg("x"))
      .def("value_single", &ClosedForm::value_single, py::arg("x"))
      .def("b", &ClosedForm::boundary_b, py::arg("p"))
      .def("c", &ClosedForm::boundary_c, py::arg("x"))
      .def("lambda_", &ClosedForm::lambda, py::arg("x"))
      .def("v", &ClosedForm::eq_value_v, py::arg("x"), py::arg("p"))
      .def("u", &ClosedForm::eq_value_u, py::arg("x"), py::arg("p"));

  m.def(
      "simulate",
      [](const ModelParams& params, double x0, double p0, double dt, double t_max,
         std::uint64_t seed, std::uint64_t path_index, const std::string& controller,
         const std::string& stopper) {
        const SimPath path = simulate_game_path(make_spec(controller, stopper),
                                                make_setup(params, x0, p0, dt, t_max), seed,
                                                path_index);
        py::dict d;
        std::vector<double> t(path.grid.nodes());
        for (std::size_t k = 0; k < t.size(); ++k) {
          t[k] = path.grid.time(k);
        }
        d["t"] = t;
        d["w"] = path.w;
        d["y"] = path.y;
        d["y_bar"] = path.y_bar;
        d["x"] = path.x;
        d["d"] = path.d;
        d["pi"] = path.pi;
        d["gamma"] = path.gamma;
        d["tau0"] = path.tau0;
        d["tau_b"] = path.tau_b;
        d["gamma_index"] = path.gamma_index;
        return d;
      },
      py::arg("params"), py::arg("x0"), py::arg("p0"), py::arg("dt") = 0.01,
      py::arg("t_max") = 800.0, py::arg("seed") = 12345, py::arg("path_index") = 0,
      py::arg("controller") = "equilibrium", py::arg("stopper") = "equilibrium");

  m.def(
      "payoffs",
      [](const ModelParams& params, double x0, double p0, double dt, double t_max,
         std::size_t n_paths, std::uint64_t seed, const std::string& controller,
         const std::string& stopper, unsigned workers) {
        McConfig mc;
        mc.n_paths = n_paths;
        mc.seed = seed;
        mc.workers = workers;
        const GameSetup setup = make_setup(params, x0, p0, dt, t_max);
        const GameSpec spec = make_spec(controller, stopper);
        std::optional<McRun> run;
        {
          py::gil_scoped_release release;
          run.emplace(mc_run(setup, {spec}, mc));
        }
        py::dict d;
        for (Payoff payoff : {Payoff::j1_raw, Payoff::j1_conditioned, Payoff::j2}) {
          d[py::str(to_string(payoff))] = estimate_dict(run->estimate(0, payoff));
        }
        return d;
      },
      py::arg("params"), py::arg("x0"), py::arg("p0"), py::arg("dt") = 0.01,
      py::arg("t_max") = 800.0, py::arg("n_paths") = 20000, py::arg("seed") = 12345,
      py::arg("controller") = "equilibrium", py::arg("stopper") = "equilibrium",
      py::arg("workers") = 1);

  m.def(
      "check_closed_form",
      [](const ModelParams& params) {
        const VerificationReport report = check_closed_form(ClosedForm(params));
        py::list out;
        for (const auto& check : report.checks) {
          py::dict d;
          d["name"] = check.name;
          d["target"] = check.target;
          d["estimate"] = check.estimate;
          d["tolerance"] = check.tolerance;
          d["passed"] = check.passed;
          out.append(d);
        }
        return out;
      },
      py::arg("params") = ModelParams{});
}
