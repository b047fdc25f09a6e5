#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "definetti/closed_form.hpp"
#include "definetti/game.hpp"

namespace definetti {

/// Where the target of a check comes from.
enum class Provenance { closed_form, analytic_identity, cross_mc };

std::string to_string(Provenance provenance);

struct Check {
  std::string name;
  Provenance provenance = Provenance::closed_form;
  double target = 0.0;
  double estimate = 0.0;
  double tolerance = 0.0;
  /// One-sided checks pass when estimate <= target + tolerance.
  bool one_sided = false;
  bool passed = false;
  std::string detail;
};

Check two_sided_check(std::string name, Provenance provenance, double target, double estimate,
                      double tolerance, std::string detail = {});
Check upper_check(std::string name, Provenance provenance, double target, double estimate,
                  double tolerance, std::string detail = {});

struct VerificationReport {
  std::vector<Check> checks;
  ModelParams params;
  TimeGrid grid;
  std::size_t n_paths = 0;
  std::uint64_t seed = 0;

  bool passed() const;
  std::size_t failures() const;
  void append(const VerificationReport& other);
};

/// Settings of a verification run. The defaults are the CI profile.
struct VerifyConfig {
  ModelParams params;
  double dt = 0.01;
  double t_max = 800.0;
  std::size_t n_paths = 20'000;
  std::uint64_t seed = 12345;
  unsigned workers = 1;
  /// Grid coarsening factors of the refinement study; the first must be 1.
  std::vector<std::size_t> levels{1, 2, 4};
  std::size_t invariant_paths = 10'000;
  double invariant_t_max = 200.0;
  /// Stretch applied to the boundary of the audited equilibrium in the
  /// dominance check; 1 audits the true pair.
  double boundary_scale = 1.0;

  static VerifyConfig ci() { return {}; }
  /// dt = 1e-4, 1e5 paths. Takes hours on one core.
  static VerifyConfig full();

  TimeGrid grid() const { return TimeGrid::from_horizon(dt, t_max); }
  void validate() const;
};

struct State {
  double x = 0.0;
  double p = 0.0;
};

/// x0 = b(p0) / 2 with p0 = 0.8 p_hat.
State demo_state(const ClosedForm& cf);
/// The six value-match states: the demo state rounded, (b(p0), p0),
/// (0.05, 0.3), (0.5, 0.1), (1.5, 0.3) and (0.5, 0).
std::vector<State> value_match_states(const ClosedForm& cf);

/// C with |J(h) - J(0)| <= C sqrt(h), bounded from the paired difference
/// J(k h) - J(h) of a refinement study: (|mean| + 3 SE) / (sqrt(k h) - sqrt(h)).
double bias_coefficient(const McEstimate& coarse_minus_fine, double fine_dt, std::size_t ratio);

/// The equilibrium pair and both deviation families on common paths and on
/// every grid level of the config.
struct DeviationStudy {
  State state;
  double boundary_scale = 1.0;
  std::size_t n_controller = 0;  ///< specs 1..n_controller: controller deviations vs the stopper
  std::size_t n_stopper = 0;     ///< the rest: stopper deviations vs the controller
  McRun run;
};

DeviationStudy run_deviation_study(const VerifyConfig& config, State state, double boundary_scale);

/// Bias allowance of the equilibrium payoffs at the demo state.
struct DiscretizationAllowance {
  double dt = 0.0;
  double c_level = 0.0;

  double at(double step) const;
};

DiscretizationAllowance calibrate(const DeviationStudy& study);

/// J1 (both estimators) against v and J2 against u at each state.
VerificationReport check_value_match(const VerifyConfig& config, const std::vector<State>& states,
                                     const DiscretizationAllowance& allowance);

/// No deviation beats the audited pair by more than 3 paired SE, the
/// truncation bound and the bias allowance of that paired difference.
VerificationReport check_deviation_dominance(const DeviationStudy& study);

/// Raw and conditioned J1 of every game in the study agree within 3 paired SE.
VerificationReport check_conditioning(const DeviationStudy& study);

/// Checkpoint means of e^{-rt} u(X, Pi) frozen at ruin or at B, plus the
/// same diagnostic for u(x, p) = x, which must drift.
VerificationReport martingale_diagnostic(const VerifyConfig& config, State state,
                                         const DiscretizationAllowance& allowance);

/// Node-wise audit of the equilibrium pair on config.invariant_paths paths.
VerificationReport invariant_suite(const VerifyConfig& config, State state, double slack = 1e-9);

/// Membership of (x, p) in {x <= b(p)} u ((B, inf) x {0}); `slack` is in
/// units of x.
bool in_region_o(const ClosedForm& cf, double x, double p, double slack = 0.0);

/// Constants at the model parameters and the analytic identities of the
/// closed-form solution.
VerificationReport check_closed_form(const ClosedForm& cf);

/// Every check above at the config's parameters.
VerificationReport run_verification(const VerifyConfig& config);

}  // namespace definetti
