#include "definetti/numerics.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>
#include <boost/math/tools/toms748_solve.hpp>

#include <cmath>
#include <stdexcept>
#include <string>

namespace definetti::numerics {

namespace {

constexpr int kMaxBisections = 30;

// Bisection over single G7-K15 panels. Boost's own recursion reports the
// panel error on the reference interval [-1, 1], so it is rescaled here.
double integrate_panel(const std::function<double(double)>& f, double a, double b, double tol,
                       int depth, double& error) {
  double reference_error = 0.0;
  const double value =
      boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, a, b, 0, 0.0, &reference_error);
  const double panel_error = reference_error * 0.5 * std::fabs(b - a);
  if (panel_error <= tol || depth >= kMaxBisections) {
    error += panel_error;
    return value;
  }
  const double mid = 0.5 * (a + b);
  return integrate_panel(f, a, mid, 0.5 * tol, depth + 1, error) +
         integrate_panel(f, mid, b, 0.5 * tol, depth + 1, error);
}

}  // namespace

double integrate(const std::function<double(double)>& f, double a, double b,
                 double abs_tol) {
  if (a == b) {
    return 0.0;
  }
  double error = 0.0;
  const double value = integrate_panel(f, a, b, abs_tol, 0, error);
  if (!std::isfinite(value) || error > abs_tol) {
    throw std::runtime_error("quadrature did not reach tolerance: error estimate " +
                             std::to_string(error));
  }
  return value;
}

double find_root(const std::function<double(double)>& f, double lo, double hi,
                 double x_tol, std::size_t max_iter) {
  const double f_lo = f(lo);
  const double f_hi = f(hi);
  if (f_lo == 0.0) {
    return lo;
  }
  if (f_hi == 0.0) {
    return hi;
  }
  if ((f_lo > 0.0) == (f_hi > 0.0)) {
    throw std::invalid_argument("find_root: bracket does not straddle a sign change");
  }
  boost::uintmax_t iterations = max_iter;
  auto tol = [x_tol](double a, double b) { return std::fabs(b - a) <= x_tol; };
  const auto bracket =
      boost::math::tools::toms748_solve(f, lo, hi, f_lo, f_hi, tol, iterations);
  return 0.5 * (bracket.first + bracket.second);
}

}  // namespace definetti::numerics
