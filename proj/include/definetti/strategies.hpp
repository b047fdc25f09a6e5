#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "definetti/closed_form.hpp"
#include "definetti/paths.hpp"

namespace definetti {

/// Controller tags: `equilibrium`, `single_player`, `barrier:<level>`,
/// `immediate`.
struct ControllerStrategy {
  enum class Kind { equilibrium, single_player, barrier, immediate };

  Kind kind = Kind::equilibrium;
  double level = 0.0;  ///< reflection level for `barrier`

  static ControllerStrategy equilibrium() { return {Kind::equilibrium, 0.0}; }
  static ControllerStrategy single_player() { return {Kind::single_player, 0.0}; }
  static ControllerStrategy barrier(double level);
  static ControllerStrategy immediate() { return {Kind::immediate, 0.0}; }

  static ControllerStrategy parse(std::string_view tag);
  std::string tag() const;
};

/// Stopper tags: `equilibrium`, `threshold:<level>`, `never`, `immediate`.
struct StopperStrategy {
  enum class Kind { equilibrium, threshold, never, immediate };

  Kind kind = Kind::equilibrium;
  double level = 0.0;  ///< stopping level for `threshold`

  static StopperStrategy equilibrium() { return {Kind::equilibrium, 0.0}; }
  static StopperStrategy threshold(double level);
  static StopperStrategy never() { return {Kind::never, 0.0}; }
  static StopperStrategy immediate() { return {Kind::immediate, 0.0}; }

  static StopperStrategy parse(std::string_view tag);
  std::string tag() const;
};

/// Boundary data shared by both equilibrium strategies at prior p.
///
/// `boundary_scale` != 1 builds a deliberately wrong pair from the stretched
/// boundary min(k b(p), B) and c(x / k); it exists for negative controls.
class Equilibrium {
 public:
  Equilibrium(const ClosedForm& cf, double p, double boundary_scale = 1.0);

  const ClosedForm& closed_form() const { return cf_; }
  double prior() const { return p_; }
  double boundary_scale() const { return scale_; }
  /// b(p), or its stretched version.
  double floor() const { return floor_; }
  double barrier() const { return cf_.barrier(); }
  /// c(x), or c(x / k) for a stretched boundary.
  double belief_boundary(double x) const;
  const PerturbationMap& perturbation() const { return map_; }

 private:
  ClosedForm cf_;
  double p_;
  double scale_;
  double floor_;
  PerturbationMap map_;
};

/// Feeds Y one node at a time and tracks the controlled state and the
/// cumulative extraction of one controller strategy.
class ControllerStepper {
 public:
  ControllerStepper(const ControllerStrategy& strategy, const Equilibrium& eq, double x0);

  void step(double y);

  double x() const { return x_; }
  double d() const { return d_; }
  /// Running maximum driving the strategy: Ybar^ (floored at b(p)) for the
  /// equilibrium, the reflection level v max y otherwise.
  double y_bar() const { return y_bar_; }
  /// Equilibrium only: Ybar^ has reached Lambda(B) + B, so f is pinned at B.
  bool saturated() const { return saturated_; }

 private:
  void refresh_top(double y);

  ControllerStrategy::Kind kind_;
  const PerturbationMap* map_ = nullptr;
  double x0_;
  double level_;
  double lump_ = 0.0;
  double top_ = -std::numeric_limits<double>::infinity();
  double y_bar_ = 0.0;
  double f_value_ = 0.0;
  double x_ = 0.0;
  double d_ = 0.0;
  bool saturated_ = false;
};

/// Feeds the observed X one node at a time and returns Gamma at that node.
/// Gamma depends on the X prefix only.
class StopperStepper {
 public:
  StopperStepper(const StopperStrategy& strategy, const Equilibrium& eq);

  double step(double x);
  double gamma() const { return gamma_; }

 private:
  StopperStrategy::Kind kind_;
  const Equilibrium* eq_;
  double level_;
  double x_bar_ = -std::numeric_limits<double>::infinity();
  double gamma_ = 0.0;
};

/// The controller applied to a Y path; x0 is y.front().
ControlledPath apply_controller(const ControllerStrategy& strategy, const std::vector<double>& y,
                                const Equilibrium& eq);

/// Gamma of any stopper strategy along an X path.
std::vector<double> apply_stopper(const StopperStrategy& strategy, const std::vector<double>& x,
                                  const Equilibrium& eq);

/// Gamma* along an X path: 1{max x >= B} for p = 0, otherwise
/// (p - Z) / (p (1 - Z)) with Z = p ^ c(max x).
std::vector<double> gamma_star(const std::vector<double>& x, const Equilibrium& eq);

/// Pi = p (1 - Gamma) / (1 - p Gamma), with Pi = 0 once Gamma = 1.
double belief_from_gamma(double gamma, double p0);
std::vector<double> belief_from_gamma(const std::vector<double>& gamma, double p0);
/// Gamma = (p - Pi) / (p (1 - Pi)); needs p0 > 0.
double gamma_from_belief(double pi, double p0);
std::vector<double> gamma_from_belief(const std::vector<double>& pi, double p0);

/// First index with Gamma > u.
std::optional<std::size_t> sample_stop_time(const std::vector<double>& gamma, double u);

/// Pure stopping at the first node with x >= a, written as a Gamma path.
std::vector<double> deviation_stopper_threshold(const std::vector<double>& x, double a);

/// Barrier reflection at 0.5 b, b, (b + B) / 2, B and 1.2 B, then immediate
/// extraction; b is eq.floor(). Non-positive levels are skipped.
std::vector<ControllerStrategy> controller_deviation_family(const Equilibrium& eq);
/// Thresholds at 0.5 b, b, (b + B) / 2 and B, then never and immediate.
std::vector<StopperStrategy> stopper_deviation_family(const Equilibrium& eq);

}  // namespace definetti
