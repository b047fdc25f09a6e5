#include "definetti/report_io.hpp"

#include <cstdio>
#include <optional>

namespace definetti {

std::string format_decimal(double value) {
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%.17g", value);
  return buffer;
}

Json to_json(const ModelParams& params) {
  return Json{{"mu", params.mu}, {"sigma", params.sigma}, {"r", params.r}};
}

Json to_json(const TimeGrid& grid) {
  return Json{{"dt", grid.dt}, {"n_steps", grid.n_steps}, {"t_max", grid.t_max()}};
}

Json closed_form_summary(const ClosedForm& cf) {
  Json out;
  out["mu"] = cf.params().mu;
  out["sigma"] = cf.params().sigma;
  out["r"] = cf.params().r;
  out["zeta1"] = cf.zeta1();
  out["zeta2"] = cf.zeta2();
  out["B"] = cf.barrier();
  out["p_hat"] = cf.p_hat();
  return out;
}

Json estimate_json(const McEstimate& estimate, Payoff payoff, const GameSpec& spec,
                   const GameSetup& setup) {
  Json out;
  out["payoff"] = to_string(payoff);
  out["mean"] = estimate.mean;
  out["std_error"] = estimate.std_error;
  out["n_paths"] = estimate.n_paths;
  out["dt"] = estimate.dt;
  out["t_max"] = estimate.t_max;
  out["truncation_bound"] = estimate.truncation_bound;
  out["controller"] = spec.controller.tag();
  out["stopper"] = spec.stopper.tag();
  out["x0"] = setup.x0;
  out["p0"] = setup.p0;
  out["params"] = to_json(setup.params);
  return out;
}

namespace {

Json index_or_null(const std::optional<std::size_t>& index) {
  return index ? Json(*index) : Json(nullptr);
}

}  // namespace

Json outcomes_json(const McRun& run) {
  Json out;
  out["params"] = to_json(run.setup().params);
  out["grid"] = to_json(run.setup().grid);
  out["seed"] = run.config().seed;
  Json specs = Json::array();
  for (const auto& spec : run.specs()) {
    specs.push_back(spec.label());
  }
  out["specs"] = specs;
  out["levels"] = run.config().levels;
  Json paths = Json::array();
  for (std::size_t i = 0; i < run.n_paths(); ++i) {
    Json row = Json::array();
    for (std::size_t s = 0; s < run.specs().size(); ++s) {
      for (std::size_t l = 0; l < run.config().levels.size(); ++l) {
        const GameOutcome& o = run.outcome(i, s, l);
        row.push_back(Json::array({format_decimal(o.j1_raw), format_decimal(o.j1_conditioned),
                                   format_decimal(o.j2), index_or_null(o.tau0_index),
                                   index_or_null(o.gamma_index), index_or_null(o.tau_b_index),
                                   o.truncated, o.theta}));
      }
    }
    paths.push_back(std::move(row));
  }
  out["outcomes"] = std::move(paths);
  return out;
}

Json to_json(const Check& check) {
  Json out;
  out["name"] = check.name;
  out["provenance"] = to_string(check.provenance);
  out["target"] = check.target;
  out["estimate"] = check.estimate;
  out["tolerance"] = check.tolerance;
  out["one_sided"] = check.one_sided;
  out["passed"] = check.passed;
  out["detail"] = check.detail;
  return out;
}

Json to_json(const VerificationReport& report) {
  Json out;
  out["passed"] = report.passed();
  out["failures"] = report.failures();
  out["params"] = to_json(report.params);
  out["grid"] = to_json(report.grid);
  out["n_paths"] = report.n_paths;
  out["seed"] = report.seed;
  Json checks = Json::array();
  for (const auto& check : report.checks) {
    checks.push_back(to_json(check));
  }
  out["checks"] = std::move(checks);
  return out;
}

void write_table(const VerificationReport& report, std::ostream& out) {
  char line[512];
  std::snprintf(line, sizeof line, "%-4s  %-72s %14s %14s %12s  %s\n", "", "check", "target",
                "estimate", "tolerance", "provenance");
  out << line;
  for (const auto& check : report.checks) {
    std::snprintf(line, sizeof line, "%-4s  %-72s %14.8g %14.8g %12.4g  %s\n",
                  check.passed ? "PASS" : "FAIL", check.name.c_str(), check.target,
                  check.estimate, check.tolerance, to_string(check.provenance).c_str());
    out << line;
    if (!check.detail.empty()) {
      out << "      " << check.detail << '\n';
    }
  }
  std::snprintf(line, sizeof line, "%zu checks, %zu failed (seed %llu, dt %g, t_max %g, %zu paths)\n",
                report.checks.size(), report.failures(),
                static_cast<unsigned long long>(report.seed), report.grid.dt,
                report.grid.t_max(), report.n_paths);
  out << line;
}

}  // namespace definetti
