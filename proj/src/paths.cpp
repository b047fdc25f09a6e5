#include "definetti/paths.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>
#include <string>

namespace definetti {

TimeGrid TimeGrid::from_horizon(double dt, double t_max) {
  if (!(dt > 0.0) || !std::isfinite(dt) || !(t_max > 0.0) || !std::isfinite(t_max)) {
    throw std::invalid_argument("time grid needs dt > 0 and t_max > 0");
  }
  const double steps = std::round(t_max / dt);
  if (steps < 1.0 || steps > 1e12) {
    throw std::invalid_argument("time grid: t_max / dt = " + std::to_string(t_max / dt) +
                                " is out of range");
  }
  TimeGrid grid{dt, static_cast<std::size_t>(steps)};
  grid.validate();
  return grid;
}

void TimeGrid::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) {
    throw std::invalid_argument("time grid: dt must be finite and > 0");
  }
  if (n_steps < 1) {
    throw std::invalid_argument("time grid: need at least one step");
  }
}

std::vector<double> sample_brownian(const TimeGrid& grid, const NormalSource& normal) {
  grid.validate();
  const double scale = std::sqrt(grid.dt);
  std::vector<double> w(grid.nodes());
  w[0] = 0.0;
  for (std::size_t k = 1; k < w.size(); ++k) {
    w[k] = w[k - 1] + scale * normal();
  }
  return w;
}

std::vector<double> refine_brownian(const std::vector<double>& w, const TimeGrid& grid,
                                    const NormalSource& normal) {
  grid.validate();
  if (w.size() != grid.nodes()) {
    throw std::invalid_argument("refine_brownian: path length does not match the grid");
  }
  const double bridge_sd = std::sqrt(grid.dt / 4.0);
  std::vector<double> fine(2 * grid.n_steps + 1);
  for (std::size_t k = 0; k < grid.n_steps; ++k) {
    fine[2 * k] = w[k];
    fine[2 * k + 1] = 0.5 * (w[k] + w[k + 1]) + bridge_sd * normal();
  }
  fine.back() = w.back();
  return fine;
}

std::vector<double> drifted_path(const std::vector<double>& w, const TimeGrid& grid, double x0,
                                 const ModelParams& params) {
  if (!(x0 >= 0.0) || !std::isfinite(x0)) {
    throw std::invalid_argument("initial resource must be finite and >= 0");
  }
  if (w.size() != grid.nodes()) {
    throw std::invalid_argument("drifted_path: path length does not match the grid");
  }
  std::vector<double> y(w.size());
  for (std::size_t k = 0; k < w.size(); ++k) {
    y[k] = x0 + params.mu * grid.time(k) + params.sigma * w[k];
  }
  return y;
}

std::vector<double> running_max(const std::vector<double>& y, double floor) {
  std::vector<double> out(y.size());
  double level = floor;
  for (std::size_t k = 0; k < y.size(); ++k) {
    level = std::max(level, y[k]);
    out[k] = level;
  }
  return out;
}

ControlledPath skorokhod_reflect(const std::vector<double>& y, double barrier) {
  if (!(barrier > 0.0)) {
    throw std::invalid_argument("reflection barrier must be > 0");
  }
  ControlledPath out{std::vector<double>(y.size()), std::vector<double>(y.size())};
  // Written as x = (y - top) + barrier at pushes so that x equals the
  // barrier exactly whenever y sets a new maximum above it.
  double top = barrier;
  double push = 0.0;
  for (std::size_t k = 0; k < y.size(); ++k) {
    top = std::max(top, y[k]);
    if (top - barrier > push) {
      push = top - barrier;
      out.x[k] = (y[k] - top) + barrier;
    } else {
      out.x[k] = y[k] - push;
    }
    out.d[k] = push;
  }
  return out;
}

ControlledPath perturbed_x(const std::vector<double>& y, const PerturbationMap& f) {
  if (y.empty()) {
    return {};
  }
  if (y.front() > f.floor()) {
    throw std::invalid_argument("perturbed_x needs y_0 <= b(p), got y_0 = " +
                                std::to_string(y.front()));
  }
  ControlledPath out{std::vector<double>(y.size()), std::vector<double>(y.size())};
  double top = f.floor();
  double f_top = f(top);
  double push = 0.0;
  for (std::size_t k = 0; k < y.size(); ++k) {
    if (y[k] > top) {
      top = y[k];
      f_top = f(top);
    }
    const double candidate = top - f_top;
    if (candidate > push) {
      push = candidate;
      out.x[k] = (y[k] - top) + f_top;
    } else {
      out.x[k] = y[k] - push;
    }
    out.d[k] = push;
  }
  return out;
}

std::optional<std::size_t> hitting_index(const std::vector<double>& samples, double level,
                                         Crossing direction) {
  for (std::size_t k = 0; k < samples.size(); ++k) {
    const bool hit = direction == Crossing::up ? samples[k] >= level : samples[k] <= level;
    if (hit) {
      return k;
    }
  }
  return std::nullopt;
}

void write_csv(const SimPath& path, std::ostream& out) {
  struct Column {
    const char* name;
    const std::vector<double>* values;
  };
  const Column candidates[] = {{"w", &path.w},   {"y", &path.y},   {"y_bar", &path.y_bar},
                               {"x", &path.x},   {"d", &path.d},   {"pi", &path.pi},
                               {"gamma", &path.gamma}};
  std::vector<Column> columns;
  for (const auto& column : candidates) {
    if (column.values->empty()) {
      continue;
    }
    if (column.values->size() != path.grid.nodes()) {
      throw std::invalid_argument(std::string("write_csv: column ") + column.name +
                                  " does not match the grid");
    }
    columns.push_back(column);
  }
  out << "t";
  for (const auto& column : columns) {
    out << ',' << column.name;
  }
  out << '\n';
  char buffer[32];
  for (std::size_t k = 0; k < path.grid.nodes(); ++k) {
    std::snprintf(buffer, sizeof buffer, "%.17g", path.grid.time(k));
    out << buffer;
    for (const auto& column : columns) {
      std::snprintf(buffer, sizeof buffer, "%.17g", (*column.values)[k]);
      out << ',' << buffer;
    }
    out << '\n';
  }
}

}  // namespace definetti
