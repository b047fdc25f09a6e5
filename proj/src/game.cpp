#include "definetti/game.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>

#include "definetti/numerics.hpp"

namespace definetti {

std::string to_string(Payoff payoff) {
  switch (payoff) {
    case Payoff::j1_raw:
      return "j1";
    case Payoff::j1_conditioned:
      return "j1_conditioned";
    case Payoff::j2:
      return "j2";
  }
  return "?";
}

void GameSetup::validate() const {
  params.validate();
  grid.validate();
  if (!(x0 >= 0.0) || !std::isfinite(x0)) {
    throw std::invalid_argument("initial resource x0 must be finite and >= 0, got " +
                                std::to_string(x0));
  }
  if (!(p0 >= 0.0 && p0 <= 1.0)) {
    throw std::invalid_argument("prior p0 must lie in [0, 1], got " + std::to_string(p0));
  }
  if (!(boundary_scale > 0.0) || !std::isfinite(boundary_scale)) {
    throw std::invalid_argument("boundary scale must be finite and > 0");
  }
}

double GameOutcome::value(Payoff payoff) const {
  switch (payoff) {
    case Payoff::j1_raw:
      return j1_raw;
    case Payoff::j1_conditioned:
      return j1_conditioned;
    case Payoff::j2:
      return j2;
  }
  return 0.0;
}

double discounted_stieltjes(const std::vector<double>& d, const TimeGrid& grid, double r,
                            std::size_t stop_index) {
  if (stop_index >= d.size()) {
    throw std::invalid_argument("discounted_stieltjes: stop index beyond the path");
  }
  numerics::CompensatedSum total;
  double previous = 0.0;
  for (std::size_t k = 0; k <= stop_index; ++k) {
    const double increment = d[k] - previous;
    if (increment < 0.0) {
      throw std::invalid_argument("discounted_stieltjes: d decreases at node " +
                                  std::to_string(k));
    }
    if (increment > 0.0) {
      total.add(std::exp(-r * grid.time(k)) * increment);
    }
    previous = d[k];
  }
  return total.value();
}

// ---------------------------------------------------------------------------

GameTracker::GameTracker(const GameSpec& spec, const Equilibrium& eq, double x0, double r,
                         double dt, bool theta, double stop_uniform)
    : controller_(spec.controller, eq, x0),
      stopper_(spec.stopper, eq),
      p0_(eq.prior()),
      barrier_(eq.barrier()),
      r_(r),
      dt_(dt),
      u_(stop_uniform) {
  outcome_.theta = theta;
}

void GameTracker::step(std::size_t k, double y) {
  controller_.step(y);
  const double d = controller_.d();
  const double x = controller_.x();
  const double increment = d - d_prev_;
  d_prev_ = d;
  const double gamma = stopper_.step(x);

  if (!outcome_.tau_b_index && x >= barrier_) {
    outcome_.tau_b_index = k;
  }
  const bool ruin = x <= 0.0;
  const bool stop_now = !outcome_.gamma_index && gamma > u_;
  if (stop_now) {
    outcome_.gamma_index = k;
  }

  double discount = -1.0;
  auto discount_at_k = [&] {
    if (discount < 0.0) {
      discount = std::exp(-r_ * dt_ * static_cast<double>(k));
    }
    return discount;
  };
  // Player 1 is paid the increment at the stopping node itself.
  if (increment > 0.0) {
    outcome_.j1_conditioned += discount_at_k() * (1.0 - p0_ * gamma_prev_) * increment;
    if (raw_open_) {
      outcome_.j1_raw += discount_at_k() * increment;
    }
  }
  if (j2_open_ && (ruin || stop_now)) {
    outcome_.j2 = discount_at_k() * std::max(x, 0.0);
    j2_open_ = false;
  }
  if (raw_open_ && (ruin || (stop_now && outcome_.theta))) {
    raw_open_ = false;
  }
  if (ruin) {
    outcome_.tau0_index = k;
  }
  gamma_prev_ = gamma;
}

GameOutcome GameTracker::outcome() const {
  GameOutcome out = outcome_;
  out.truncated = !out.tau0_index && raw_open_;
  return out;
}

// ---------------------------------------------------------------------------

namespace {

std::vector<double> brownian_from_stream(const TimeGrid& grid, PathStream& stream) {
  return sample_brownian(grid, [&stream] { return stream.normal(); });
}

}  // namespace

GameOutcome play_game_raw(const GameSpec& spec, const GameSetup& setup,
                          const std::vector<double>& y, bool theta, double stop_uniform) {
  setup.validate();
  if (y.empty()) {
    throw std::invalid_argument("play_game_raw: empty path");
  }
  const Equilibrium eq(ClosedForm(setup.params), setup.p0, setup.boundary_scale);
  GameTracker tracker(spec, eq, y.front(), setup.params.r, setup.grid.dt, theta, stop_uniform);
  for (std::size_t k = 0; k < y.size() && !tracker.finished(); ++k) {
    tracker.step(k, y[k]);
  }
  return tracker.outcome();
}

GameOutcome play_game_raw(const GameSpec& spec, const GameSetup& setup, PathStream& stream) {
  const auto w = brownian_from_stream(setup.grid, stream);
  const auto y = drifted_path(w, setup.grid, setup.x0, setup.params);
  return play_game_raw(spec, setup, y, stream.type_uniform() < setup.p0, stream.stop_uniform());
}

double play_game_conditioned(const GameSpec& spec, const GameSetup& setup,
                             const std::vector<double>& y) {
  // theta and U only affect the raw payoff; any values do.
  return play_game_raw(spec, setup, y, false, 0.5).j1_conditioned;
}

double play_game_conditioned(const GameSpec& spec, const GameSetup& setup, PathStream& stream) {
  const auto w = brownian_from_stream(setup.grid, stream);
  const auto y = drifted_path(w, setup.grid, setup.x0, setup.params);
  return play_game_conditioned(spec, setup, y);
}

SimPath simulate_game_path(const GameSpec& spec, const GameSetup& setup, std::uint64_t seed,
                           std::uint64_t path_index) {
  setup.validate();
  const Equilibrium eq(ClosedForm(setup.params), setup.p0, setup.boundary_scale);
  PathStream stream(seed, path_index);
  SimPath path;
  path.grid = setup.grid;
  path.w = brownian_from_stream(setup.grid, stream);
  path.y = drifted_path(path.w, setup.grid, setup.x0, setup.params);

  const std::size_t n = path.grid.nodes();
  path.y_bar.resize(n);
  path.x.resize(n);
  path.d.resize(n);
  path.gamma.resize(n);
  ControllerStepper controller(spec.controller, eq, setup.x0);
  StopperStepper stopper(spec.stopper, eq);
  for (std::size_t k = 0; k < n; ++k) {
    controller.step(path.y[k]);
    path.y_bar[k] = controller.y_bar();
    path.x[k] = controller.x();
    path.d[k] = controller.d();
    path.gamma[k] = stopper.step(path.x[k]);
  }
  path.pi = belief_from_gamma(path.gamma, setup.p0);
  path.tau0 = hitting_index(path.x, 0.0, Crossing::down);
  path.tau_b = hitting_index(path.x, eq.barrier(), Crossing::up);
  path.gamma_index = sample_stop_time(path.gamma, stream.stop_uniform());
  return path;
}

// ---------------------------------------------------------------------------

McEstimate summarize(const std::vector<double>& samples) {
  McEstimate out;
  out.n_paths = samples.size();
  if (samples.empty()) {
    return out;
  }
  if (std::all_of(samples.begin(), samples.end(),
                  [&](double v) { return v == samples.front(); })) {
    out.mean = samples.front();
    return out;
  }
  numerics::CompensatedSum sum;
  for (double v : samples) {
    sum.add(v);
  }
  const double n = static_cast<double>(samples.size());
  out.mean = sum.value() / n;
  if (samples.size() > 1) {
    numerics::CompensatedSum squares;
    for (double v : samples) {
      squares.add((v - out.mean) * (v - out.mean));
    }
    out.std_error = std::sqrt(squares.value() / (n - 1.0) / n);
  }
  return out;
}

double truncation_bound(const GameSetup& setup) {
  const ClosedForm cf(setup.params);
  const double worst = std::max({setup.x0, cf.barrier(), setup.params.mu / setup.params.r});
  return std::exp(-setup.params.r * setup.grid.t_max()) * worst;
}

McRun::McRun(GameSetup setup, std::vector<GameSpec> specs, McConfig config,
             std::vector<GameOutcome> outcomes)
    : setup_(std::move(setup)),
      specs_(std::move(specs)),
      config_(std::move(config)),
      outcomes_(std::move(outcomes)) {
  if (outcomes_.size() != config_.n_paths * specs_.size() * config_.levels.size()) {
    throw std::invalid_argument("McRun: outcome table has the wrong size");
  }
}

std::size_t McRun::index(std::size_t path, std::size_t spec, std::size_t level) const {
  if (path >= config_.n_paths || spec >= specs_.size() || level >= config_.levels.size()) {
    throw std::out_of_range("McRun: index out of range");
  }
  return (path * specs_.size() + spec) * config_.levels.size() + level;
}

const GameOutcome& McRun::outcome(std::size_t path, std::size_t spec, std::size_t level) const {
  return outcomes_[index(path, spec, level)];
}

std::vector<double> McRun::samples(std::size_t spec, Payoff payoff, std::size_t level) const {
  std::vector<double> out(config_.n_paths);
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = outcome(i, spec, level).value(payoff);
  }
  return out;
}

McEstimate McRun::decorate(McEstimate estimate, std::size_t level) const {
  estimate.dt = setup_.grid.dt * static_cast<double>(config_.levels.at(level));
  estimate.t_max = setup_.grid.t_max();
  estimate.truncation_bound = truncation_bound(setup_);
  return estimate;
}

McEstimate McRun::estimate(std::size_t spec, Payoff payoff, std::size_t level) const {
  return decorate(summarize(samples(spec, payoff, level)), level);
}

McEstimate McRun::difference(std::size_t spec_a, Payoff payoff_a, std::size_t spec_b,
                             Payoff payoff_b, std::size_t level) const {
  std::vector<double> diff(config_.n_paths);
  for (std::size_t i = 0; i < diff.size(); ++i) {
    diff[i] = outcome(i, spec_a, level).value(payoff_a) - outcome(i, spec_b, level).value(payoff_b);
  }
  return decorate(summarize(diff), level);
}

McEstimate McRun::level_difference(std::size_t spec, Payoff payoff, std::size_t coarse_level,
                                   std::size_t fine_level) const {
  std::vector<double> diff(config_.n_paths);
  for (std::size_t i = 0; i < diff.size(); ++i) {
    diff[i] = outcome(i, spec, coarse_level).value(payoff) - outcome(i, spec, fine_level).value(payoff);
  }
  return decorate(summarize(diff), fine_level);
}

// ---------------------------------------------------------------------------

void parallel_for(std::size_t n, unsigned workers, const std::function<void(std::size_t)>& body) {
  if (workers <= 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) {
      body(i);
    }
    return;
  }
  constexpr std::size_t kChunk = 16;
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    try {
      for (;;) {
        const std::size_t begin = next.fetch_add(kChunk);
        if (begin >= n) {
          return;
        }
        const std::size_t end = std::min(n, begin + kChunk);
        for (std::size_t i = begin; i < end; ++i) {
          body(i);
        }
      }
    } catch (...) {
      std::lock_guard<std::mutex> lock(failure_mutex);
      if (!failure) {
        failure = std::current_exception();
      }
      next.store(n);
    }
  };
  std::vector<std::jthread> threads;
  const unsigned count = static_cast<unsigned>(std::min<std::size_t>(workers, n));
  threads.reserve(count);
  for (unsigned t = 0; t < count; ++t) {
    threads.emplace_back(worker);
  }
  threads.clear();
  if (failure) {
    std::rethrow_exception(failure);
  }
}

namespace {

void simulate_path(const GameSetup& setup, const Equilibrium& eq,
                   const std::vector<GameSpec>& specs, const std::vector<std::size_t>& levels,
                   std::uint64_t seed, std::uint64_t path_index, GameOutcome* out) {
  PathStream stream(seed, path_index);
  const bool theta = stream.type_uniform() < setup.p0;
  const double u = stream.stop_uniform();
  const double dt = setup.grid.dt;

  std::vector<GameTracker> trackers;
  trackers.reserve(levels.size() * specs.size());
  for (std::size_t level : levels) {
    for (const auto& spec : specs) {
      trackers.emplace_back(spec, eq, setup.x0, setup.params.r, dt * static_cast<double>(level),
                            theta, u);
    }
  }

  const double sqrt_dt = std::sqrt(dt);
  const double mu = setup.params.mu;
  const double sigma = setup.params.sigma;
  double w = 0.0;
  std::size_t open = trackers.size();
  for (std::size_t k = 0; k <= setup.grid.n_steps && open > 0; ++k) {
    if (k > 0) {
      w += sqrt_dt * stream.normal();
    }
    const double y = setup.x0 + mu * setup.grid.time(k) + sigma * w;
    for (std::size_t l = 0; l < levels.size(); ++l) {
      if (k % levels[l] != 0) {
        continue;
      }
      const std::size_t node = k / levels[l];
      for (std::size_t s = 0; s < specs.size(); ++s) {
        auto& tracker = trackers[l * specs.size() + s];
        if (tracker.finished()) {
          continue;
        }
        tracker.step(node, y);
        if (tracker.finished()) {
          --open;
        }
      }
    }
  }
  for (std::size_t s = 0; s < specs.size(); ++s) {
    for (std::size_t l = 0; l < levels.size(); ++l) {
      out[s * levels.size() + l] = trackers[l * specs.size() + s].outcome();
    }
  }
}

}  // namespace

McRun mc_run(const GameSetup& setup, const std::vector<GameSpec>& specs, const McConfig& config) {
  setup.validate();
  if (config.n_paths < 2) {
    throw std::invalid_argument("mc_run needs at least 2 paths");
  }
  if (specs.empty()) {
    throw std::invalid_argument("mc_run needs at least one game");
  }
  if (config.levels.empty()) {
    throw std::invalid_argument("mc_run needs at least one grid level");
  }
  for (std::size_t level : config.levels) {
    if (level == 0 || setup.grid.n_steps % level != 0) {
      throw std::invalid_argument("grid level " + std::to_string(level) +
                                  " does not divide the number of steps");
    }
  }
  const Equilibrium eq(ClosedForm(setup.params), setup.p0, setup.boundary_scale);
  const std::size_t block = specs.size() * config.levels.size();
  std::vector<GameOutcome> outcomes(config.n_paths * block);
  parallel_for(config.n_paths, config.workers, [&](std::size_t i) {
    simulate_path(setup, eq, specs, config.levels, config.seed, i, &outcomes[i * block]);
  });
  return McRun(setup, specs, config, std::move(outcomes));
}

}  // namespace definetti
