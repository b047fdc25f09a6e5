#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <stdexcept>

#include <CLI11.hpp>

#include "definetti/closed_form.hpp"
#include "definetti/game.hpp"
#include "definetti/report_io.hpp"
#include "definetti/strategies.hpp"
#include "definetti/verify.hpp"

namespace definetti::cli {

namespace {

constexpr double kUnset = std::numeric_limits<double>::quiet_NaN();

struct Parsed {
  RunConfig config;
  std::string command;
  std::string profile = "ci";
  bool grid_flags_set = false;
};

/// Builds the parser around `parsed` and runs it; CLI11 exceptions escape.
void parse_into(const std::vector<std::string>& args, Parsed& parsed, CLI::App& app) {
  RunConfig& c = parsed.config;
  double x0 = kUnset;
  double p0 = kUnset;

  app.set_config("--config", "", "flat key=value file with the same keys as the flags");
  app.require_subcommand(1);
  app.add_option("--mu", c.params.mu, "drift")->capture_default_str();
  app.add_option("--sigma", c.params.sigma, "volatility")->capture_default_str();
  app.add_option("--r", c.params.r, "discount rate")->capture_default_str();
  app.add_option("--x0", x0, "initial resource (default b(p0) / 2)");
  app.add_option("--p0", p0, "prior (default 0.8 p_hat)");
  auto* dt = app.add_option("--dt", c.dt, "time step")->capture_default_str();
  auto* t_max = app.add_option("--t-max", c.t_max, "horizon")->capture_default_str();
  auto* paths = app.add_option("--paths", c.n_paths, "Monte Carlo paths")->capture_default_str();
  app.add_option("--seed", c.seed, "master seed")->capture_default_str();
  app.add_option("--controller", c.controller,
                 "equilibrium | single_player | barrier:<level> | immediate")
      ->capture_default_str();
  app.add_option("--stopper", c.stopper, "equilibrium | threshold:<level> | never | immediate")
      ->capture_default_str();
  app.add_option("--out", c.out, "output file (boundary: directory); stdout when empty");
  app.add_option("--workers", c.workers, "worker threads")->capture_default_str();
  app.add_option("--perturb-boundary", c.perturb_boundary,
                 "verify: stretch the audited boundary by this factor")
      ->capture_default_str();
  app.add_option("--points", c.points, "boundary: sample points")->capture_default_str();
  app.add_option("--path-index", c.path_index, "simulate: path index in the seed's streams")
      ->capture_default_str();
  app.add_option("--profile", parsed.profile, "verify: ci | full")
      ->check(CLI::IsMember({"ci", "full"}))
      ->capture_default_str();

  for (const char* name : {"solve", "boundary", "simulate", "payoffs", "verify"}) {
    app.add_subcommand(name)->fallthrough();
  }
  app.get_subcommand("solve")->description("closed-form constants as JSON");
  app.get_subcommand("boundary")->description("b(p), c(x) and the reflection direction as CSV");
  app.get_subcommand("simulate")->description("one simulated path as CSV");
  app.get_subcommand("payoffs")->description("Monte Carlo J1 and J2 as JSON");
  app.get_subcommand("verify")->description("equilibrium acceptance checks");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  app.parse(reversed);

  parsed.command = app.get_subcommands().front()->get_name();
  parsed.grid_flags_set = dt->count() + t_max->count() + paths->count() > 0;
  if (!std::isnan(x0)) {
    c.x0 = x0;
  }
  if (!std::isnan(p0)) {
    c.p0 = p0;
  }
  c.params.validate();
  if (c.workers < 1) {
    throw std::invalid_argument("--workers must be >= 1");
  }
}

double resolved_p0(const RunConfig& c, const ClosedForm& cf) {
  return c.p0 ? *c.p0 : 0.8 * cf.p_hat();
}

double resolved_x0(const RunConfig& c, const ClosedForm& cf) {
  return c.x0 ? *c.x0 : 0.5 * cf.boundary_b(resolved_p0(c, cf));
}

GameSetup make_setup(const RunConfig& c, const ClosedForm& cf) {
  GameSetup setup{c.params, resolved_x0(c, cf), resolved_p0(c, cf),
                  TimeGrid::from_horizon(c.dt, c.t_max), 1.0};
  setup.validate();
  return setup;
}

/// Runs `emit` against the --out file, or against `out` when none is given.
template <typename Emit>
void with_output(const std::string& path, std::ostream& out, Emit&& emit) {
  if (path.empty()) {
    emit(out);
    return;
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) {
    throw std::runtime_error("cannot open output file " + path);
  }
  emit(file);
}

void cmd_solve(const RunConfig& c, std::ostream& out) {
  const ClosedForm cf(c.params);
  Json summary = closed_form_summary(cf);
  const double p0 = resolved_p0(c, cf);
  summary["V_B"] = cf.value_single(cf.barrier());
  summary["p0"] = p0;
  summary["b_p0"] = cf.boundary_b(p0);
  with_output(c.out, out, [&](std::ostream& o) { o << summary.dump(2) << '\n'; });
}

void cmd_boundary(const RunConfig& c, std::ostream& out) {
  if (c.points < 2) {
    throw std::invalid_argument("--points must be >= 2");
  }
  const ClosedForm cf(c.params);
  const std::size_t n = c.points;
  auto b_table = [&](std::ostream& o) {
    o << "p,b_p\n";
    for (std::size_t i = 0; i < n; ++i) {
      const double p = cf.p_hat() * static_cast<double>(i) / static_cast<double>(n - 1);
      o << format_decimal(p) << ',' << format_decimal(cf.boundary_b(p)) << '\n';
    }
  };
  auto c_table = [&](std::ostream& o) {
    o << "x,c_x\n";
    for (std::size_t i = 0; i < n; ++i) {
      const double x = cf.barrier() * static_cast<double>(i) / static_cast<double>(n - 1);
      o << format_decimal(x) << ',' << format_decimal(cf.boundary_c(x)) << '\n';
    }
  };
  // Interior boundary points only: u_p is undefined at x = B.
  auto direction = [&](std::ostream& o) {
    o << "x,p,dir_x,dir_p\n";
    for (std::size_t i = 0; i < n; ++i) {
      const double x = cf.barrier() * (static_cast<double>(i) + 0.5) / static_cast<double>(n);
      const double u_x = cf.u_x_on_boundary(x);
      const double u_p = cf.u_p_on_boundary(x);
      const double norm = std::hypot(u_p, u_x);
      o << format_decimal(x) << ',' << format_decimal(cf.boundary_c(x)) << ','
        << format_decimal(u_p / norm) << ',' << format_decimal(-u_x / norm) << '\n';
    }
  };
  if (c.out.empty()) {
    b_table(out);
    out << '\n';
    c_table(out);
    out << '\n';
    direction(out);
    return;
  }
  std::filesystem::create_directories(c.out);
  const std::filesystem::path dir(c.out);
  with_output((dir / "b_p.csv").string(), out, b_table);
  with_output((dir / "c_x.csv").string(), out, c_table);
  with_output((dir / "direction.csv").string(), out, direction);
}

GameSpec make_spec(const RunConfig& c) {
  return {ControllerStrategy::parse(c.controller), StopperStrategy::parse(c.stopper)};
}

void cmd_simulate(const RunConfig& c, std::ostream& out) {
  const ClosedForm cf(c.params);
  const SimPath path = simulate_game_path(make_spec(c), make_setup(c, cf), c.seed, c.path_index);
  with_output(c.out, out, [&](std::ostream& o) { write_csv(path, o); });
}

void cmd_payoffs(const RunConfig& c, std::ostream& out) {
  const ClosedForm cf(c.params);
  const GameSetup setup = make_setup(c, cf);
  const GameSpec spec = make_spec(c);
  McConfig mc;
  mc.n_paths = c.n_paths;
  mc.seed = c.seed;
  mc.workers = c.workers;
  const McRun run = mc_run(setup, {spec}, mc);
  Json result = Json::array();
  for (Payoff payoff : {Payoff::j1_raw, Payoff::j1_conditioned, Payoff::j2}) {
    result.push_back(estimate_json(run.estimate(0, payoff), payoff, spec, setup));
  }
  with_output(c.out, out, [&](std::ostream& o) { o << result.dump(2) << '\n'; });
}

int cmd_verify(const Parsed& parsed, std::ostream& out) {
  const RunConfig& c = parsed.config;
  VerifyConfig config = parsed.profile == "full" ? VerifyConfig::full() : VerifyConfig::ci();
  config.params = c.params;
  if (parsed.grid_flags_set || parsed.profile == "ci") {
    config.dt = c.dt;
    config.t_max = c.t_max;
    config.n_paths = c.n_paths;
  }
  config.seed = c.seed;
  config.workers = c.workers;
  config.boundary_scale = c.perturb_boundary;
  const VerificationReport report = run_verification(config);
  write_table(report, out);
  if (!c.out.empty()) {
    with_output(c.out, out, [&](std::ostream& o) { o << to_json(report).dump(2) << '\n'; });
  }
  return report.passed() ? 0 : 1;
}

}  // namespace

RunConfig parse(const std::vector<std::string>& args) {
  CLI::App app{"definetti"};
  Parsed parsed;
  parse_into(args, parsed, app);
  return parsed.config;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Controller-stopper dividend game with a ghost competitor", "definetti"};
  Parsed parsed;
  try {
    parse_into(args, parsed, app);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
  try {
    const RunConfig& c = parsed.config;
    if (parsed.command == "solve") {
      cmd_solve(c, out);
    } else if (parsed.command == "boundary") {
      cmd_boundary(c, out);
    } else if (parsed.command == "simulate") {
      cmd_simulate(c, out);
    } else if (parsed.command == "payoffs") {
      cmd_payoffs(c, out);
    } else {
      return cmd_verify(parsed, out);
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}

}  // namespace definetti::cli
