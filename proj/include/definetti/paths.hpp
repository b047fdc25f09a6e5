#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <ostream>
#include <vector>

#include "definetti/closed_form.hpp"
#include "definetti/model_params.hpp"

namespace definetti {

/// Uniform time grid t_k = k dt, k = 0..n_steps.
struct TimeGrid {
  double dt = 1e-4;
  std::size_t n_steps = 2'000'000;

  /// Grid covering [0, t_max]; t_max / dt is rounded to the nearest integer.
  static TimeGrid from_horizon(double dt, double t_max);

  double t_max() const { return dt * static_cast<double>(n_steps); }
  double time(std::size_t k) const { return dt * static_cast<double>(k); }
  std::size_t nodes() const { return n_steps + 1; }
  void validate() const;
};

/// One simulated path. Series that were not computed are left empty; all
/// non-empty series have grid.nodes() entries.
struct SimPath {
  TimeGrid grid;
  std::vector<double> w;
  std::vector<double> y;
  std::vector<double> y_bar;
  std::vector<double> x;
  std::vector<double> d;
  std::vector<double> pi;
  std::vector<double> gamma;
  std::optional<std::size_t> tau0;
  std::optional<std::size_t> tau_b;
  std::optional<std::size_t> gamma_index;
};

/// Controlled state and cumulative extraction on the grid, x = y - d.
struct ControlledPath {
  std::vector<double> x;
  std::vector<double> d;
};

using NormalSource = std::function<double()>;

/// W_0 = 0 with independent N(0, dt) increments drawn from `normal`.
std::vector<double> sample_brownian(const TimeGrid& grid, const NormalSource& normal);

/// Halves the step of a sampled Brownian path by Brownian-bridge midpoints.
/// The returned path agrees with `w` on every other node.
std::vector<double> refine_brownian(const std::vector<double>& w, const TimeGrid& grid,
                                    const NormalSource& normal);

/// Y_t = x0 + mu t + sigma W_t node by node.
std::vector<double> drifted_path(const std::vector<double>& w, const TimeGrid& grid, double x0,
                                 const ModelParams& params);

/// floor v max_{j <= k} y_j.
std::vector<double> running_max(const std::vector<double>& y, double floor);

/// Reflection of y below `barrier`: d_k = max_{j <= k} (y_j - barrier)^+.
ControlledPath skorokhod_reflect(const std::vector<double>& y, double barrier);

/// X = Y - Ybar + f(Ybar) with Ybar the running max of y floored at
/// f.floor(). Needs y_0 <= f.floor(); an initial lump is the caller's job.
ControlledPath perturbed_x(const std::vector<double>& y, const PerturbationMap& f);

enum class Crossing { up, down };

/// First index with samples[k] >= level (up) or samples[k] <= level (down).
std::optional<std::size_t> hitting_index(const std::vector<double>& samples, double level,
                                         Crossing direction);

/// CSV with header built from `t,w,y,y_bar,x,d,pi,gamma`, skipping empty
/// series; values in %.17g.
void write_csv(const SimPath& path, std::ostream& out);

}  // namespace definetti
