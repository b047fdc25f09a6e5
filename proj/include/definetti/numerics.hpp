#pragma once

#include <cstddef>
#include <functional>

namespace definetti::numerics {

/// Adaptive Gauss-Kronrod (15-point) quadrature of `f` over [a, b] to the
/// given absolute error estimate. Returns 0 for an empty interval.
double integrate(const std::function<double(double)>& f, double a, double b,
                 double abs_tol = 1e-10);

/// Root of `f` in [lo, hi] by a bracketing solver. `f(lo)` and `f(hi)` must
/// have opposite signs (or one of them vanish). The bracket is shrunk until
/// its width is below `x_tol`; the midpoint is returned.
double find_root(const std::function<double(double)>& f, double lo, double hi,
                 double x_tol = 1e-13, std::size_t max_iter = 200);

/// Compensated (Neumaier) running sum.
class CompensatedSum {
 public:
  void add(double value) {
    const double t = sum_ + value;
    if ((sum_ >= 0 ? sum_ : -sum_) >= (value >= 0 ? value : -value)) {
      carry_ += (sum_ - t) + value;
    } else {
      carry_ += (value - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + carry_; }

 private:
  double sum_ = 0.0;
  double carry_ = 0.0;
};

}  // namespace definetti::numerics
