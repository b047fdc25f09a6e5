#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace definetti {

enum class Direction { increasing, decreasing };

/// A strictly monotone scalar function on a closed interval, tabulated at
/// ordered nodes together with its exact derivative and interpolated by
/// piecewise cubic Hermite polynomials.
///
/// Construction rejects tables that are not strictly monotone or whose
/// derivatives violate the Fritsch-Carlson condition, so the interpolant is
/// monotone on every segment and `inverse` is well defined on the whole range.
class MonotoneMap {
 public:
  MonotoneMap(std::vector<double> x, std::vector<double> y, std::vector<double> dydx);

  double operator()(double x) const;
  double derivative(double x) const;

  /// Solves `(*this)(x) == y` for x. `y` must lie in the range.
  double inverse(double y) const;

  Direction direction() const { return direction_; }
  double domain_lower() const { return x_.front(); }
  double domain_upper() const { return x_.back(); }
  double range_lower() const { return direction_ == Direction::increasing ? y_.front() : y_.back(); }
  double range_upper() const { return direction_ == Direction::increasing ? y_.back() : y_.front(); }
  std::size_t size() const { return x_.size(); }
  std::span<const double> abscissae() const { return x_; }
  std::span<const double> ordinates() const { return y_; }

 private:
  std::size_t segment_for_x(double x) const;
  std::size_t segment_for_y(double y) const;
  double eval_segment(std::size_t i, double t) const;
  double slope_segment(std::size_t i, double t) const;

  std::vector<double> x_;
  std::vector<double> y_;
  std::vector<double> d_;
  Direction direction_ = Direction::increasing;
};

}  // namespace definetti
