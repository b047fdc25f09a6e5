#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "definetti/model_params.hpp"

namespace definetti::cli {

/// Everything a subcommand may read. Unset x0 / p0 fall back to the demo
/// state p0 = 0.8 p_hat, x0 = b(p0) / 2.
struct RunConfig {
  ModelParams params;
  std::optional<double> x0;
  std::optional<double> p0;
  double dt = 0.01;
  double t_max = 800.0;
  std::size_t n_paths = 20'000;
  std::uint64_t seed = 12345;
  std::string controller = "equilibrium";
  std::string stopper = "equilibrium";
  std::string out;
  unsigned workers = 1;
  double perturb_boundary = 1.0;
  std::size_t points = 512;
  std::uint64_t path_index = 0;
};

/// Runs the command line and returns the process exit status: 0 on
/// success, 1 when `verify` reports a failed check, 2 on bad input.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Parses flags and the optional config file without running anything.
RunConfig parse(const std::vector<std::string>& args);

}  // namespace definetti::cli
