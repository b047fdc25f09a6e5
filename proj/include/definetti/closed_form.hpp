#pragma once

#include <array>
#include <cstddef>
#include <optional>

#include "definetti/model_params.hpp"
#include "definetti/monotone_map.hpp"

namespace definetti {

struct CharacteristicRoots {
  double zeta1;  ///< negative root
  double zeta2;  ///< positive root
};

/// Roots of z^2 + (2 mu / sigma^2) z - 2 r / sigma^2 = 0, computed in long
/// double with the cancellation-free pairing zeta2 = -c / zeta1.
CharacteristicRoots solve_roots(const ModelParams& params);

/// Value and first two derivatives of a scalar function at a point.
struct Jet {
  double value;
  double d1;
  double d2;
};

/// Closed-form solution of the single-player dividend problem and every
/// equilibrium quantity derived from it. Immutable after construction.
///
/// Naming: `psi` is the increasing solution of L psi = 0 with psi(0) = 0 and
/// psi'(0) = 1; `barrier()` is its inflection point, which is also the
/// single-player reflection level; `c` is the belief boundary over [0, B] and
/// `b` its inverse, extended by b = 0 above `p_hat()`.
class ClosedForm {
 public:
  explicit ClosedForm(const ModelParams& params);

  const ModelParams& params() const { return params_; }
  double zeta1() const { return zeta1_; }
  double zeta2() const { return zeta2_; }
  double barrier() const { return barrier_; }
  double p_hat() const { return p_hat_; }

  double psi(double x) const;
  double psi_d1(double x) const;
  double psi_d2(double x) const;
  double psi_d3(double x) const;
  Jet psi_jet(double x) const { return {psi(x), psi_d1(x), psi_d2(x)}; }

  /// (sigma^2/2) g'' + mu g' - r g.
  double generator(const Jet& g) const;

  double value_single(double x) const;
  double value_single_d1(double x) const;

  /// c(x) = 1 - psi'(B)/psi'(x) on [0, B], 0 beyond.
  double boundary_c(double x) const;
  double boundary_c_d1(double x) const;
  /// Inverse of c on [0, p_hat]; B at p = 0 and 0 for p >= p_hat.
  double boundary_b(double p) const;

  /// lambda(x) = psi(x) / (x psi'(x)) - 1, continuously extended by 0 at 0.
  double lambda(double x) const;

  /// Partial derivatives of u at the boundary point (x, c(x)), x in (0, B).
  /// `u_p` divides by c'(x) and is not defined at x = B.
  double u_x_on_boundary(double x) const;
  double u_p_on_boundary(double x) const;

  double eq_value_v(double x, double p) const;
  double eq_value_u(double x, double p) const;

 private:
  /// psi'(x) - psi'(B), accurate near B where both terms nearly cancel.
  double psi_d1_minus_barrier(double x) const;

  ModelParams params_;
  double zeta1_;
  double zeta2_;
  double barrier_;
  double psi_d1_barrier_;
  double p_hat_;
  std::array<double, 32> barrier_derivatives_{};  // psi^(n)(B)
};

/// Generator applied to an arbitrary smooth function given as a jet at x.
template <typename F>
double generator_apply(const ClosedForm& cf, F&& g, double x) {
  return cf.generator(g(x));
}

/// The one-sided perturbation for a fixed prior p: the cumulative density
/// Lambda(x) = int_{b(p)}^x lambda over [b(p), B] and the map f, inverse of
/// x -> Lambda(x) + x on [b(p), Lambda(B) + B] and constant B above.
///
/// x -> Lambda(x) + x is tabulated on `nodes` uniform abscissae with exact
/// slope 1 + lambda and stored as a MonotoneMap; f evaluates its inverse.
class PerturbationMap {
 public:
  static constexpr std::size_t kDefaultNodes = 2048;

  PerturbationMap(const ClosedForm& cf, double p, std::size_t nodes = kDefaultNodes);

  /// Same construction with an explicit floor in place of b(p).
  static PerturbationMap with_floor(const ClosedForm& cf, double floor,
                                    std::size_t nodes = kDefaultNodes);

  double floor() const { return floor_; }
  double barrier() const { return barrier_; }
  /// Lambda(B) + B: above this level f is pinned at B.
  double saturation_level() const { return saturation_; }

  /// Lambda(x) by adaptive quadrature (absolute tolerance 1e-10).
  double cumulative_lambda(double x) const;
  /// Lambda(x) read from the table (fast, used on hot paths).
  double cumulative_lambda_tabulated(double x) const;

  /// f(y) for y >= floor().
  double operator()(double y) const;

  const std::optional<MonotoneMap>& table() const { return table_; }

 private:
  PerturbationMap(const ClosedForm& cf, double floor, std::size_t nodes, int);

  ClosedForm cf_;
  double floor_;
  double barrier_;
  double saturation_;
  std::optional<MonotoneMap> table_;  // empty when floor == B
};

/// b tabulated at p_i uniform in [0, p_hat] for hot loops. The table is
/// indexed by s = sqrt(p): near p = 0 the boundary behaves like
/// B - const * sqrt(p), smooth in s but with unbounded slope in p.
class BoundaryTable {
 public:
  static constexpr std::size_t kDefaultNodes = 2048;

  explicit BoundaryTable(const ClosedForm& cf, std::size_t nodes = kDefaultNodes);

  double b(double p) const;
  double c(double x) const;

 private:
  double barrier_;
  double p_hat_;
  MonotoneMap b_table_;  // s = sqrt(p) -> b
};

}  // namespace definetti
