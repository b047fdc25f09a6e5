#include "definetti/monotone_map.hpp"

#include <algorithm>
#include <functional>
#include <cmath>
#include <stdexcept>
#include <string>

namespace definetti {

MonotoneMap::MonotoneMap(std::vector<double> x, std::vector<double> y,
                         std::vector<double> dydx)
    : x_(std::move(x)), y_(std::move(y)), d_(std::move(dydx)) {
  if (x_.size() < 2 || y_.size() != x_.size() || d_.size() != x_.size()) {
    throw std::invalid_argument("MonotoneMap: need >= 2 nodes with matching y and dy/dx");
  }
  direction_ = y_.back() > y_.front() ? Direction::increasing : Direction::decreasing;
  const double sign = direction_ == Direction::increasing ? 1.0 : -1.0;
  for (std::size_t i = 0; i + 1 < x_.size(); ++i) {
    const double dx = x_[i + 1] - x_[i];
    const double dy = sign * (y_[i + 1] - y_[i]);
    if (!(dx > 0.0) || !(dy > 0.0)) {
      throw std::invalid_argument("MonotoneMap: table not strictly monotone at node " +
                                  std::to_string(i));
    }
    const double secant = dy / dx;
    const double alpha = sign * d_[i] / secant;
    const double beta = sign * d_[i + 1] / secant;
    if (alpha < 0.0 || beta < 0.0 || alpha * alpha + beta * beta > 9.0) {
      throw std::invalid_argument("MonotoneMap: derivative data breaks monotonicity at node " +
                                  std::to_string(i));
    }
  }
}

std::size_t MonotoneMap::segment_for_x(double x) const {
  if (!(x >= x_.front() && x <= x_.back())) {
    throw std::out_of_range("MonotoneMap: abscissa " + std::to_string(x) + " outside domain");
  }
  const auto it = std::upper_bound(x_.begin(), x_.end(), x);
  const auto idx = static_cast<std::size_t>(it - x_.begin());
  return std::min(idx == 0 ? 0 : idx - 1, x_.size() - 2);
}

std::size_t MonotoneMap::segment_for_y(double y) const {
  if (!(y >= range_lower() && y <= range_upper())) {
    throw std::out_of_range("MonotoneMap: ordinate " + std::to_string(y) + " outside range");
  }
  std::size_t idx = 0;
  if (direction_ == Direction::increasing) {
    idx = static_cast<std::size_t>(std::upper_bound(y_.begin(), y_.end(), y) - y_.begin());
  } else {
    idx = static_cast<std::size_t>(
        std::upper_bound(y_.begin(), y_.end(), y, std::greater<>()) - y_.begin());
  }
  return std::min(idx == 0 ? 0 : idx - 1, x_.size() - 2);
}

double MonotoneMap::eval_segment(std::size_t i, double t) const {
  const double h = x_[i + 1] - x_[i];
  const double t2 = t * t;
  const double t3 = t2 * t;
  const double h00 = 2 * t3 - 3 * t2 + 1;
  const double h10 = t3 - 2 * t2 + t;
  const double h01 = -2 * t3 + 3 * t2;
  const double h11 = t3 - t2;
  return h00 * y_[i] + h10 * h * d_[i] + h01 * y_[i + 1] + h11 * h * d_[i + 1];
}

double MonotoneMap::slope_segment(std::size_t i, double t) const {
  const double h = x_[i + 1] - x_[i];
  const double t2 = t * t;
  const double dh00 = 6 * t2 - 6 * t;
  const double dh10 = 3 * t2 - 4 * t + 1;
  const double dh01 = -6 * t2 + 6 * t;
  const double dh11 = 3 * t2 - 2 * t;
  return (dh00 * y_[i] + dh01 * y_[i + 1]) / h + dh10 * d_[i] + dh11 * d_[i + 1];
}

double MonotoneMap::operator()(double x) const {
  const std::size_t i = segment_for_x(x);
  if (x == x_[i]) {
    return y_[i];
  }
  if (x == x_[i + 1]) {
    return y_[i + 1];
  }
  return eval_segment(i, (x - x_[i]) / (x_[i + 1] - x_[i]));
}

double MonotoneMap::derivative(double x) const {
  const std::size_t i = segment_for_x(x);
  return slope_segment(i, (x - x_[i]) / (x_[i + 1] - x_[i]));
}

double MonotoneMap::inverse(double y) const {
  const std::size_t i = segment_for_y(y);
  if (y == y_[i]) {
    return x_[i];
  }
  if (y == y_[i + 1]) {
    return x_[i + 1];
  }
  // Safeguarded Newton on the segment's local coordinate t in [0, 1].
  const double h = x_[i + 1] - x_[i];
  const double sign = direction_ == Direction::increasing ? 1.0 : -1.0;
  double lo = 0.0;
  double hi = 1.0;
  double t = (y - y_[i]) / (y_[i + 1] - y_[i]);
  for (int iter = 0; iter < 100; ++iter) {
    const double residual = sign * (eval_segment(i, t) - y);
    if (residual == 0.0) {
      break;
    }
    if (residual > 0.0) {
      hi = t;
    } else {
      lo = t;
    }
    const double slope = sign * slope_segment(i, t) * h;
    double next = slope > 0.0 ? t - residual / slope : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) {
      next = 0.5 * (lo + hi);
    }
    if (std::fabs(next - t) <= 1e-16 || hi - lo <= 1e-16) {
      t = next;
      break;
    }
    t = next;
  }
  return x_[i] + t * h;
}

}  // namespace definetti
