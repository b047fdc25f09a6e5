#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "definetti/closed_form.hpp"
#include "definetti/paths.hpp"
#include "definetti/rng.hpp"
#include "definetti/strategies.hpp"

namespace definetti {

enum class Payoff { j1_raw, j1_conditioned, j2 };

std::string to_string(Payoff payoff);

struct GameSpec {
  ControllerStrategy controller;
  StopperStrategy stopper;

  std::string label() const { return controller.tag() + " vs " + stopper.tag(); }
};

/// Model, initial state and grid of one game.
struct GameSetup {
  ModelParams params;
  double x0 = 0.0;
  double p0 = 0.0;
  TimeGrid grid;
  /// 1 for the true equilibrium; other values stretch the boundary.
  double boundary_scale = 1.0;

  void validate() const;
};

struct GameOutcome {
  double j1_raw = 0.0;
  double j1_conditioned = 0.0;
  double j2 = 0.0;
  std::optional<std::size_t> tau0_index;
  std::optional<std::size_t> gamma_index;
  std::optional<std::size_t> tau_b_index;
  bool truncated = false;
  bool theta = false;

  double value(Payoff payoff) const;
};

/// Sum over k <= stop_index of e^{-r t_k} (d_k - d_{k-1}) with d_{-1} = 0.
double discounted_stieltjes(const std::vector<double>& d, const TimeGrid& grid, double r,
                            std::size_t stop_index);

/// Streaming evaluation of one game along one path. Node k is fed Y_k; the
/// controller acts first, then Gamma_k is read off the post-extraction state.
class GameTracker {
 public:
  GameTracker(const GameSpec& spec, const Equilibrium& eq, double x0, double r, double dt,
              bool theta, double stop_uniform);

  void step(std::size_t k, double y);
  /// Ruin has occurred, so every payoff is settled.
  bool finished() const { return outcome_.tau0_index.has_value(); }
  /// Outcome so far; `truncated` is set when neither ruin nor an active stop
  /// has happened.
  GameOutcome outcome() const;

  const ControllerStepper& controller() const { return controller_; }
  const StopperStepper& stopper() const { return stopper_; }

 private:
  ControllerStepper controller_;
  StopperStepper stopper_;
  double p0_;
  double barrier_;
  double r_;
  double dt_;
  double u_;
  double d_prev_ = 0.0;
  double gamma_prev_ = 0.0;
  bool raw_open_ = true;
  bool j2_open_ = true;
  GameOutcome outcome_;
};

/// Raw-payoff game on a given Y path, with theta and U supplied.
GameOutcome play_game_raw(const GameSpec& spec, const GameSetup& setup,
                          const std::vector<double>& y, bool theta, double stop_uniform);
/// Same game, drawing W, theta and U from the stream of one path.
GameOutcome play_game_raw(const GameSpec& spec, const GameSetup& setup, PathStream& stream);

/// J1 in the conditioned form: increments weighted by 1 - p Gamma_{k-1}
/// and integrated up to ruin. No theta or U is needed.
double play_game_conditioned(const GameSpec& spec, const GameSetup& setup,
                             const std::vector<double>& y);
double play_game_conditioned(const GameSpec& spec, const GameSetup& setup, PathStream& stream);

/// The path of `spec` with every column filled and events flagged. The
/// y_bar column is the running maximum that drives the controller.
SimPath simulate_game_path(const GameSpec& spec, const GameSetup& setup, std::uint64_t seed,
                           std::uint64_t path_index);

struct McEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t n_paths = 0;
  double dt = 0.0;
  double t_max = 0.0;
  double truncation_bound = 0.0;
};

/// Mean and standard error of `samples` summed in index order.
McEstimate summarize(const std::vector<double>& samples);

/// e^{-r t_max} max(x0, B, mu / r).
double truncation_bound(const GameSetup& setup);

struct McConfig {
  std::size_t n_paths = 100'000;
  std::uint64_t seed = 1;
  unsigned workers = 1;
  /// Grid coarsening factors evaluated on the same Brownian paths; 1 is the
  /// setup's own grid. n_steps must be divisible by each factor.
  std::vector<std::size_t> levels{1};
};

/// Outcomes of several games evaluated on common Brownian paths.
class McRun {
 public:
  McRun(GameSetup setup, std::vector<GameSpec> specs, McConfig config,
        std::vector<GameOutcome> outcomes);

  const GameSetup& setup() const { return setup_; }
  const std::vector<GameSpec>& specs() const { return specs_; }
  const McConfig& config() const { return config_; }
  std::size_t n_paths() const { return config_.n_paths; }

  const GameOutcome& outcome(std::size_t path, std::size_t spec, std::size_t level = 0) const;
  std::vector<double> samples(std::size_t spec, Payoff payoff, std::size_t level = 0) const;

  McEstimate estimate(std::size_t spec, Payoff payoff, std::size_t level = 0) const;
  /// Paired difference spec_a - spec_b on the same paths.
  McEstimate difference(std::size_t spec_a, Payoff payoff_a, std::size_t spec_b, Payoff payoff_b,
                        std::size_t level = 0) const;
  /// Paired difference of one statistic between two grid levels.
  McEstimate level_difference(std::size_t spec, Payoff payoff, std::size_t coarse_level,
                              std::size_t fine_level) const;

 private:
  McEstimate decorate(McEstimate estimate, std::size_t level) const;
  std::size_t index(std::size_t path, std::size_t spec, std::size_t level) const;

  GameSetup setup_;
  std::vector<GameSpec> specs_;
  McConfig config_;
  std::vector<GameOutcome> outcomes_;
};

/// Calls body(i) for i in [0, n) on `workers` threads. Work is handed out in
/// contiguous chunks; callers write results by index, so output does not
/// depend on the schedule.
void parallel_for(std::size_t n, unsigned workers, const std::function<void(std::size_t)>& body);

/// All specs at all levels on n_paths Brownian paths; path i uses the
/// stream (config.seed, i).
McRun mc_run(const GameSetup& setup, const std::vector<GameSpec>& specs, const McConfig& config);

}  // namespace definetti
