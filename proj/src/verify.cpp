#include "definetti/verify.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>

#include "definetti/numerics.hpp"
#include "definetti/rng.hpp"
#include "definetti/strategies.hpp"

namespace definetti {

namespace {

std::string format(const char* pattern, double a, double b = 0.0, double c = 0.0,
                   double d = 0.0) {
  char buffer[256];
  std::snprintf(buffer, sizeof buffer, pattern, a, b, c, d);
  return buffer;
}

std::string state_label(State s) { return format("(x=%.6g, p=%.6g)", s.x, s.p); }

}  // namespace

std::string to_string(Provenance provenance) {
  switch (provenance) {
    case Provenance::closed_form:
      return "closed-form";
    case Provenance::analytic_identity:
      return "analytic-identity";
    case Provenance::cross_mc:
      return "cross-MC";
  }
  return "?";
}

Check two_sided_check(std::string name, Provenance provenance, double target, double estimate,
                      double tolerance, std::string detail) {
  Check check{std::move(name), provenance, target, estimate, tolerance, false, false,
              std::move(detail)};
  check.passed = std::fabs(estimate - target) <= tolerance;
  return check;
}

Check upper_check(std::string name, Provenance provenance, double target, double estimate,
                  double tolerance, std::string detail) {
  Check check{std::move(name), provenance, target, estimate, tolerance, true, false,
              std::move(detail)};
  check.passed = estimate - target <= tolerance;
  return check;
}

bool VerificationReport::passed() const { return failures() == 0; }

std::size_t VerificationReport::failures() const {
  return static_cast<std::size_t>(
      std::count_if(checks.begin(), checks.end(), [](const Check& c) { return !c.passed; }));
}

void VerificationReport::append(const VerificationReport& other) {
  checks.insert(checks.end(), other.checks.begin(), other.checks.end());
}

VerifyConfig VerifyConfig::full() {
  VerifyConfig config;
  config.dt = 1e-4;
  config.t_max = 200.0;
  config.n_paths = 100'000;
  return config;
}

void VerifyConfig::validate() const {
  params.validate();
  const TimeGrid g = grid();
  if (n_paths < 2) {
    throw std::invalid_argument("verification needs at least 2 paths");
  }
  if (levels.empty() || levels.front() != 1) {
    throw std::invalid_argument("refinement levels must start with 1");
  }
  for (std::size_t i = 1; i < levels.size(); ++i) {
    if (levels[i] <= levels[i - 1]) {
      throw std::invalid_argument("refinement levels must increase");
    }
  }
  for (std::size_t level : levels) {
    if (g.n_steps % level != 0) {
      throw std::invalid_argument("refinement level " + std::to_string(level) +
                                  " does not divide t_max / dt");
    }
  }
  if (invariant_paths < 1 || !(invariant_t_max > 0.0)) {
    throw std::invalid_argument("invariant audit needs paths and a positive horizon");
  }
  if (!(boundary_scale > 0.0) || !std::isfinite(boundary_scale)) {
    throw std::invalid_argument("boundary scale must be finite and > 0");
  }
}

State demo_state(const ClosedForm& cf) {
  const double p0 = 0.8 * cf.p_hat();
  return {0.5 * cf.boundary_b(p0), p0};
}

std::vector<State> value_match_states(const ClosedForm& cf) {
  const double p0 = 0.8 * cf.p_hat();
  return {{0.134, 0.722}, {cf.boundary_b(p0), p0}, {0.05, 0.3},
          {0.5, 0.1},     {1.5, 0.3},              {0.5, 0.0}};
}

double bias_coefficient(const McEstimate& coarse_minus_fine, double fine_dt, std::size_t ratio) {
  if (ratio < 2 || !(fine_dt > 0.0)) {
    return 0.0;
  }
  const double spread = std::sqrt(static_cast<double>(ratio) * fine_dt) - std::sqrt(fine_dt);
  return (std::fabs(coarse_minus_fine.mean) + 3.0 * coarse_minus_fine.std_error) / spread;
}

double DiscretizationAllowance::at(double step) const { return c_level * std::sqrt(step); }

// ---------------------------------------------------------------------------

namespace {

McConfig mc_config(const VerifyConfig& config) {
  McConfig mc;
  mc.n_paths = config.n_paths;
  mc.seed = config.seed;
  mc.workers = config.workers;
  mc.levels = config.levels;
  return mc;
}

GameSpec equilibrium_pair() {
  return {ControllerStrategy::equilibrium(), StopperStrategy::equilibrium()};
}

/// Refinement bound of spec_a - spec_b (spec_b = spec_a for a plain
/// statistic) between the finest and the coarsest level.
double paired_bias_coefficient(const McRun& run, std::size_t spec_a, std::size_t spec_b,
                               Payoff payoff) {
  const auto& levels = run.config().levels;
  if (levels.size() < 2) {
    return 0.0;
  }
  const std::size_t coarse = levels.size() - 1;
  std::vector<double> diff(run.n_paths());
  for (std::size_t i = 0; i < diff.size(); ++i) {
    double at_coarse = run.outcome(i, spec_a, coarse).value(payoff);
    double at_fine = run.outcome(i, spec_a, 0).value(payoff);
    if (spec_b != spec_a) {
      at_coarse -= run.outcome(i, spec_b, coarse).value(payoff);
      at_fine -= run.outcome(i, spec_b, 0).value(payoff);
    }
    diff[i] = at_coarse - at_fine;
  }
  return bias_coefficient(summarize(diff), run.setup().grid.dt, levels.back());
}

VerificationReport empty_report(const VerifyConfig& config, const TimeGrid& grid,
                                std::size_t n_paths) {
  VerificationReport report;
  report.params = config.params;
  report.grid = grid;
  report.n_paths = n_paths;
  report.seed = config.seed;
  return report;
}

}  // namespace

DeviationStudy run_deviation_study(const VerifyConfig& config, State state,
                                   double boundary_scale) {
  config.validate();
  const ClosedForm cf(config.params);
  const Equilibrium eq(cf, state.p, boundary_scale);
  std::vector<GameSpec> specs{equilibrium_pair()};
  const auto controllers = controller_deviation_family(eq);
  const auto stoppers = stopper_deviation_family(eq);
  for (const auto& c : controllers) {
    specs.push_back({c, StopperStrategy::equilibrium()});
  }
  for (const auto& s : stoppers) {
    specs.push_back({ControllerStrategy::equilibrium(), s});
  }
  GameSetup setup{config.params, state.x, state.p, config.grid(), boundary_scale};
  return DeviationStudy{state, boundary_scale, controllers.size(), stoppers.size(),
                        mc_run(setup, specs, mc_config(config))};
}

DiscretizationAllowance calibrate(const DeviationStudy& study) {
  DiscretizationAllowance allowance;
  allowance.dt = study.run.setup().grid.dt;
  for (Payoff payoff : {Payoff::j1_raw, Payoff::j1_conditioned, Payoff::j2}) {
    allowance.c_level =
        std::max(allowance.c_level, paired_bias_coefficient(study.run, 0, 0, payoff));
  }
  return allowance;
}

// ---------------------------------------------------------------------------

VerificationReport check_value_match(const VerifyConfig& config, const std::vector<State>& states,
                                     const DiscretizationAllowance& allowance) {
  config.validate();
  const ClosedForm cf(config.params);
  VerificationReport report = empty_report(config, config.grid(), config.n_paths);
  for (const State& state : states) {
    GameSetup setup{config.params, state.x, state.p, config.grid(), 1.0};
    const McRun run = mc_run(setup, {equilibrium_pair()}, mc_config(config));
    const double v = cf.eq_value_v(state.x, state.p);
    const double u = cf.eq_value_u(state.x, state.p);
    for (Payoff payoff : {Payoff::j1_raw, Payoff::j1_conditioned, Payoff::j2}) {
      const McEstimate est = run.estimate(0, payoff);
      // The demo-state coefficient is a floor; states nearer ruin carry a
      // larger monitoring bias, which their own refinement study measures.
      const double c = std::max(allowance.c_level, paired_bias_coefficient(run, 0, 0, payoff));
      const double bias = c * std::sqrt(est.dt);
      const double tol = 3.0 * est.std_error + est.truncation_bound + bias;
      report.checks.push_back(two_sided_check(
          "value_match/" + to_string(payoff) + " " + state_label(state), Provenance::closed_form,
          payoff == Payoff::j2 ? u : v, est.mean, tol,
          format("SE %.3e, truncation %.3e, bias allowance %.3e", est.std_error,
                 est.truncation_bound, bias)));
    }
  }
  return report;
}

VerificationReport check_deviation_dominance(const DeviationStudy& study) {
  const McRun& run = study.run;
  VerificationReport report;
  report.params = run.setup().params;
  report.grid = run.setup().grid;
  report.n_paths = run.n_paths();
  report.seed = run.config().seed;
  const std::string prefix =
      study.boundary_scale == 1.0
          ? std::string("dominance/")
          : format("dominance[boundary x%.6g]/", study.boundary_scale);
  const double trunc = truncation_bound(run.setup());
  for (std::size_t spec = 1; spec < run.specs().size(); ++spec) {
    const bool controller_side = spec <= study.n_controller;
    const std::vector<Payoff> payoffs =
        controller_side ? std::vector<Payoff>{Payoff::j1_raw, Payoff::j1_conditioned}
                        : std::vector<Payoff>{Payoff::j2};
    const std::string tag = controller_side ? "controller/" + run.specs()[spec].controller.tag()
                                            : "stopper/" + run.specs()[spec].stopper.tag();
    for (Payoff payoff : payoffs) {
      const McEstimate diff = run.difference(spec, payoff, 0, payoff);
      const McEstimate eq = run.estimate(0, payoff);
      const double bias =
          paired_bias_coefficient(run, spec, 0, payoff) * std::sqrt(run.setup().grid.dt);
      const double tol = 3.0 * diff.std_error + trunc + bias;
      Check check = upper_check(prefix + tag + "/" + to_string(payoff), Provenance::cross_mc,
                                eq.mean, eq.mean + diff.mean, tol,
                                format("paired diff %+.3e, SE %.3e, truncation %.3e, bias %.3e",
                                       diff.mean, diff.std_error, trunc, bias));
      check.passed = diff.mean <= tol;
      report.checks.push_back(std::move(check));
    }
  }
  return report;
}

VerificationReport check_conditioning(const DeviationStudy& study) {
  constexpr double kRoundingFloor = 1e-12;
  const McRun& run = study.run;
  VerificationReport report;
  report.params = run.setup().params;
  report.grid = run.setup().grid;
  report.n_paths = run.n_paths();
  report.seed = run.config().seed;
  for (std::size_t spec = 0; spec < run.specs().size(); ++spec) {
    const McEstimate diff = run.difference(spec, Payoff::j1_raw, spec, Payoff::j1_conditioned);
    const McEstimate cond = run.estimate(spec, Payoff::j1_conditioned);
    // When the stopper never acts the two estimators differ by summation
    // order only, and the paired SE collapses to the rounding noise.
    const double tol = 3.0 * diff.std_error + kRoundingFloor;
    Check check = two_sided_check("conditioning/" + run.specs()[spec].label(),
                                  Provenance::analytic_identity, cond.mean,
                                  cond.mean + diff.mean, tol,
                                  format("paired diff %+.3e, SE %.3e", diff.mean, diff.std_error));
    check.passed = std::fabs(diff.mean) <= tol;
    report.checks.push_back(std::move(check));
  }
  return report;
}

// ---------------------------------------------------------------------------

VerificationReport martingale_diagnostic(const VerifyConfig& config, State state,
                                         const DiscretizationAllowance& allowance) {
  config.validate();
  const ClosedForm cf(config.params);
  if (!(state.x >= 0.0 && state.x <= cf.boundary_b(state.p)) ||
      !(state.p >= 0.0 && state.p < cf.p_hat())) {
    throw std::invalid_argument("martingale diagnostic needs x0 <= b(p0) and p0 in [0, p_hat)");
  }
  const Equilibrium eq(cf, state.p);
  const TimeGrid grid = config.grid();
  constexpr std::size_t kCheckpoints = 5;
  std::array<std::size_t, kCheckpoints> nodes{};
  for (std::size_t j = 0; j < kCheckpoints; ++j) {
    nodes[j] = (grid.n_steps * j) / (kCheckpoints - 1);
  }
  const double r = config.params.r;
  const double barrier = cf.barrier();
  const std::size_t n = config.n_paths;
  // Row i holds the checkpoints of path i for u, then for the control x.
  std::vector<double> values(n * 2 * kCheckpoints);

  parallel_for(n, config.workers, [&](std::size_t i) {
    PathStream stream(config.seed, i);
    ControllerStepper controller(ControllerStrategy::equilibrium(), eq, state.x);
    StopperStepper stopper(StopperStrategy::equilibrium(), eq);
    double* row = &values[i * 2 * kCheckpoints];
    const double sqrt_dt = std::sqrt(grid.dt);
    double w = 0.0;
    std::size_t next = 0;
    for (std::size_t k = 0; k <= grid.n_steps && next < kCheckpoints; ++k) {
      if (k > 0) {
        w += sqrt_dt * stream.normal();
      }
      controller.step(state.x + config.params.mu * grid.time(k) + config.params.sigma * w);
      const double x = controller.x();
      const double gamma = stopper.step(x);
      const bool ruined = x <= 0.0;
      const bool frozen = ruined || x >= barrier;
      if (k == nodes[next] || frozen) {
        const double discount = std::exp(-r * grid.time(k));
        const double pi = belief_from_gamma(gamma, state.p);
        const double u = ruined ? 0.0 : discount * cf.eq_value_u(std::min(x, barrier), pi);
        const double control = discount * std::max(x, 0.0);
        // A frozen path carries its stopped value to every later checkpoint.
        const std::size_t last = frozen ? kCheckpoints : next + 1;
        for (; next < last; ++next) {
          row[next] = u;
          row[kCheckpoints + next] = control;
        }
      }
    }
  });

  VerificationReport report = empty_report(config, grid, n);
  const std::string where = " " + state_label(state);
  const double u0 = cf.eq_value_u(state.x, state.p);
  const double bias = allowance.at(grid.dt);
  double worst_gap = -std::numeric_limits<double>::infinity();
  double worst_mean = state.x;
  for (std::size_t j = 0; j < kCheckpoints; ++j) {
    std::vector<double> u_samples(n);
    std::vector<double> x_samples(n);
    for (std::size_t i = 0; i < n; ++i) {
      u_samples[i] = values[i * 2 * kCheckpoints + j];
      x_samples[i] = values[i * 2 * kCheckpoints + kCheckpoints + j];
    }
    const McEstimate u_est = summarize(u_samples);
    const McEstimate x_est = summarize(x_samples);
    const double t = grid.time(nodes[j]);
    if (j == 0) {
      report.checks.push_back(two_sided_check("martingale/t=0" + where,
                                              Provenance::closed_form, u0, u_est.mean, 1e-12,
                                              "deterministic initial value"));
    } else {
      report.checks.push_back(two_sided_check(
          format("martingale/t=%g", t) + where, Provenance::closed_form, u0, u_est.mean,
          3.0 * u_est.std_error + bias,
          format("SE %.3e, bias allowance %.3e", u_est.std_error, bias)));
    }
    const double gap = std::fabs(x_est.mean - state.x) - (3.0 * x_est.std_error + bias);
    if (gap > worst_gap) {
      worst_gap = gap;
      worst_mean = x_est.mean;
    }
  }
  const bool control_drifts = worst_gap > 0.0;
  Check control{"martingale/negative_control u=x" + where,
                Provenance::cross_mc,
                state.x,
                worst_mean,
                0.0,
                false,
                control_drifts,
                control_drifts ? format("drift detected, excess %.3e over 3 SE + bias", worst_gap)
                               : std::string("no drift detected")};
  report.checks.push_back(std::move(control));
  return report;
}

// ---------------------------------------------------------------------------

bool in_region_o(const ClosedForm& cf, double x, double p, double slack) {
  if (x <= slack) {
    return true;
  }
  if (x > cf.barrier()) {
    return p == 0.0;
  }
  // x <= b(p) + slack  <=>  p <= c(x - slack), c being decreasing.
  return p <= cf.boundary_c(std::max(x - slack, 0.0));
}

VerificationReport invariant_suite(const VerifyConfig& config, State state, double slack) {
  config.validate();
  const ClosedForm cf(config.params);
  const Equilibrium eq(cf, state.p);
  const TimeGrid grid = TimeGrid::from_horizon(config.dt, config.invariant_t_max);
  const double barrier = cf.barrier();
  const double saturation = eq.perturbation().saturation_level();
  const double lump = std::max(state.x - eq.floor(), 0.0);

  enum Invariant {
    admissible,
    below_barrier,
    belief_monotone,
    belief_below_boundary,
    belief_formula,
    absorbed_after_saturation,
    flat_off_boundary,
    in_region,
    kCount
  };
  static const char* const kNames[kCount] = {
      "admissible (x = y - d, d non-decreasing)",
      "x <= B",
      "pi non-increasing",
      "pi <= c(x)",
      "pi = p ^ c(max x)",
      "pi = 0 once Y reaches Lambda(B) + B",
      "d flat while x < b(pi)",
      "(x, pi) in O"};

  const std::size_t n = config.invariant_paths;
  std::vector<std::array<std::size_t, kCount>> violations(n);
  std::vector<std::array<double, kCount>> worst(n);

  parallel_for(n, config.workers, [&](std::size_t i) {
    auto& count = violations[i];
    auto& excess = worst[i];
    count.fill(0);
    excess.fill(0.0);
    auto flag = [&](Invariant which, double amount) {
      ++count[which];
      excess[which] = std::max(excess[which], amount);
    };
    PathStream stream(config.seed, i);
    ControllerStepper controller(ControllerStrategy::equilibrium(), eq, state.x);
    StopperStepper stopper(StopperStrategy::equilibrium(), eq);
    const double sqrt_dt = std::sqrt(grid.dt);
    double w = 0.0;
    double y_max = -std::numeric_limits<double>::infinity();
    double x_max = -std::numeric_limits<double>::infinity();
    double d_prev = 0.0;
    double pi_prev = state.p;
    bool saturated = false;
    for (std::size_t k = 0; k <= grid.n_steps; ++k) {
      if (k > 0) {
        w += sqrt_dt * stream.normal();
      }
      const double y = state.x + config.params.mu * grid.time(k) + config.params.sigma * w;
      controller.step(y);
      const double x = controller.x();
      const double d = controller.d();
      const double pi = belief_from_gamma(stopper.step(x), state.p);
      y_max = std::max(y_max, y);
      x_max = std::max(x_max, x);
      saturated = saturated || std::max(eq.floor(), y_max - lump) >= saturation;

      const double gap = std::fabs(x - (y - d));
      if (gap > slack || d < d_prev) {
        flag(admissible, std::max(gap, d_prev - d));
      }
      if (x > barrier + slack) {
        flag(below_barrier, x - barrier);
      }
      if (pi > pi_prev + slack) {
        flag(belief_monotone, pi - pi_prev);
      }
      const double c_here = cf.boundary_c(std::max(x, 0.0));
      if (pi > c_here + slack) {
        flag(belief_below_boundary, pi - c_here);
      }
      const double expected = std::min(state.p, cf.boundary_c(std::max(x_max, 0.0)));
      if (std::fabs(pi - expected) > slack) {
        flag(belief_formula, std::fabs(pi - expected));
      }
      if (saturated && pi > slack) {
        flag(absorbed_after_saturation, pi);
      }
      // x >= b(pi) - slack  <=>  c(x + slack) <= pi.
      if (d > d_prev && k > 0 && cf.boundary_c(std::max(x + slack, 0.0)) > pi) {
        flag(flat_off_boundary, cf.boundary_c(std::max(x + slack, 0.0)) - pi);
      }
      if (!in_region_o(cf, x, pi, slack)) {
        flag(in_region, 1.0);
      }
      d_prev = d;
      pi_prev = pi;
      if (x <= 0.0) {
        break;
      }
    }
  });

  VerificationReport report = empty_report(config, grid, n);
  for (int which = 0; which < kCount; ++which) {
    std::size_t total = 0;
    double largest = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      total += violations[i][which];
      largest = std::max(largest, worst[i][which]);
    }
    report.checks.push_back(two_sided_check(
        std::string("invariant/") + kNames[which] + " " + state_label(state),
        Provenance::analytic_identity, 0.0, static_cast<double>(total), 0.0,
        format("%.0f paths, slack %.1e, largest violation %.3e", static_cast<double>(n), slack,
               largest)));
  }
  return report;
}

// ---------------------------------------------------------------------------

VerificationReport check_closed_form(const ClosedForm& cf) {
  VerificationReport report;
  report.params = cf.params();
  const double B = cf.barrier();
  auto& checks = report.checks;
  checks.push_back(two_sided_check("closed_form/B", Provenance::closed_form, 1.1152, B, 1e-3));
  checks.push_back(
      two_sided_check("closed_form/p_hat", Provenance::closed_form, 0.9021, cf.p_hat(), 1e-3));

  double worst = 0.0;
  for (double x : {0.0, 0.1, 0.5, 1.0, B, 2.0, 5.0}) {
    worst = std::max(worst, std::fabs(cf.generator(cf.psi_jet(x))));
  }
  checks.push_back(two_sided_check("identity/L psi = 0", Provenance::analytic_identity, 0.0,
                                   worst, 1e-9));
  checks.push_back(two_sided_check("identity/psi''(B) = 0", Provenance::analytic_identity, 0.0,
                                   cf.psi_d2(B), 1e-10));
  const double mu_over_r = cf.params().mu / cf.params().r;
  checks.push_back(two_sided_check("identity/V(B) = mu/r", Provenance::analytic_identity,
                                   mu_over_r, cf.value_single(B), 1e-8));

  worst = 0.0;
  for (int i = 1; i < 20; ++i) {
    const double x = B * i / 20.0;
    worst = std::max(worst, std::fabs((1.0 - cf.boundary_c(x)) * cf.value_single_d1(x) - 1.0));
  }
  checks.push_back(two_sided_check("identity/smooth fit (1 - c) V' = 1",
                                   Provenance::analytic_identity, 0.0, worst, 1e-9));

  worst = 0.0;
  for (int i = 1; i < 20; ++i) {
    const double p = cf.p_hat() * i / 20.0;
    worst = std::max(worst, std::fabs(cf.boundary_c(cf.boundary_b(p)) - p));
  }
  checks.push_back(
      two_sided_check("identity/c(b(p)) = p", Provenance::analytic_identity, 0.0, worst, 1e-9));

  worst = 0.0;
  const double p0 = 0.8 * cf.p_hat();
  const PerturbationMap f(cf, p0);
  for (int i = 0; i <= 20; ++i) {
    const double y = f.floor() + (f.saturation_level() - f.floor()) * i / 20.0;
    const double x = f(y);
    worst = std::max(worst, std::fabs(f.cumulative_lambda(x) + x - y));
  }
  checks.push_back(two_sided_check("identity/Lambda(f(y)) + f(y) = y",
                                   Provenance::analytic_identity, 0.0, worst, 1e-9));

  worst = 0.0;
  for (int i = 1; i < 20; ++i) {
    const double x = B * i / 20.0;
    const double ratio = cf.boundary_c_d1(x) * cf.u_p_on_boundary(x) / cf.u_x_on_boundary(x);
    worst = std::max(worst, std::fabs(ratio - cf.lambda(x)));
  }
  checks.push_back(two_sided_check("identity/lambda = c' u_p / u_x on the boundary",
                                   Provenance::analytic_identity, 0.0, worst, 1e-8));
  return report;
}

VerificationReport run_verification(const VerifyConfig& config) {
  config.validate();
  const ClosedForm cf(config.params);
  VerificationReport report = empty_report(config, config.grid(), config.n_paths);
  report.append(check_closed_form(cf));

  const State demo = demo_state(cf);
  const DeviationStudy study = run_deviation_study(config, demo, 1.0);
  const DiscretizationAllowance allowance = calibrate(study);
  report.append(check_value_match(config, value_match_states(cf), allowance));
  if (config.boundary_scale == 1.0) {
    report.append(check_deviation_dominance(study));
    report.append(check_conditioning(study));
  } else {
    const DeviationStudy perturbed = run_deviation_study(config, demo, config.boundary_scale);
    report.append(check_deviation_dominance(perturbed));
    report.append(check_conditioning(perturbed));
  }
  report.append(martingale_diagnostic(config, demo, allowance));
  report.append(martingale_diagnostic(config, {0.5, 0.0}, allowance));
  report.append(invariant_suite(config, demo));
  return report;
}

}  // namespace definetti
