#include "definetti/closed_form.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "definetti/numerics.hpp"

namespace definetti {

namespace {

void require_resource(double x) {
  if (!(x >= 0.0) || !std::isfinite(x)) {
    throw std::invalid_argument("resource level must be finite and >= 0, got " +
                                std::to_string(x));
  }
}

void require_probability(double p) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw std::invalid_argument("probability must lie in [0, 1], got " + std::to_string(p));
  }
}

// Below this |zeta| x the numerator psi - x psi' of lambda is summed as a
// power series; the closed form loses all digits to cancellation near 0.
constexpr double kSeriesRadius = 1.0;
constexpr int kSeriesTerms = 40;

}  // namespace

CharacteristicRoots solve_roots(const ModelParams& params) {
  params.validate();
  using real = long double;
  const real mu = params.mu;
  const real sigma = params.sigma;
  const real r = params.r;
  const real a = 2 * mu / (sigma * sigma);
  const real c = 2 * r / (sigma * sigma);
  const real zeta1 = (-a - std::sqrt(a * a + 4 * c)) / 2;
  const real zeta2 = -c / zeta1;
  return {static_cast<double>(zeta1), static_cast<double>(zeta2)};
}

ClosedForm::ClosedForm(const ModelParams& params) : params_(params) {
  const auto roots = solve_roots(params_);
  zeta1_ = roots.zeta1;
  zeta2_ = roots.zeta2;
  {
    using real = long double;
    const real z1 = zeta1_;
    const real z2 = zeta2_;
    barrier_ = static_cast<double>((std::log(z1 * z1) - std::log(z2 * z2)) / (z2 - z1));
  }
  psi_d1_barrier_ = psi_d1(barrier_);
  p_hat_ = 1.0 - psi_d1_barrier_;
  for (std::size_t n = 0; n < barrier_derivatives_.size(); ++n) {
    const double order = static_cast<double>(n);
    barrier_derivatives_[n] = (std::pow(zeta2_, order) * std::exp(zeta2_ * barrier_) -
                               std::pow(zeta1_, order) * std::exp(zeta1_ * barrier_)) /
                              (zeta2_ - zeta1_);
  }
}

double ClosedForm::psi(double x) const {
  require_resource(x);
  return (std::expm1(zeta2_ * x) - std::expm1(zeta1_ * x)) / (zeta2_ - zeta1_);
}

double ClosedForm::psi_d1(double x) const {
  require_resource(x);
  return (zeta2_ * std::exp(zeta2_ * x) - zeta1_ * std::exp(zeta1_ * x)) / (zeta2_ - zeta1_);
}

double ClosedForm::psi_d2(double x) const {
  require_resource(x);
  return (zeta2_ * zeta2_ * std::exp(zeta2_ * x) - zeta1_ * zeta1_ * std::exp(zeta1_ * x)) /
         (zeta2_ - zeta1_);
}

double ClosedForm::psi_d3(double x) const {
  require_resource(x);
  return (zeta2_ * zeta2_ * zeta2_ * std::exp(zeta2_ * x) -
          zeta1_ * zeta1_ * zeta1_ * std::exp(zeta1_ * x)) /
         (zeta2_ - zeta1_);
}

double ClosedForm::psi_d1_minus_barrier(double x) const {
  const double h = x - barrier_;
  if (std::fabs(h) * std::max(-zeta1_, zeta2_) >= 0.5) {
    return psi_d1(x) - psi_d1_barrier_;
  }
  // Taylor expansion of psi' about B.
  double sum = 0.0;
  double power = 1.0;
  for (int n = 1; n <= 30; ++n) {
    power *= h / n;
    sum += barrier_derivatives_[n + 1] * power;
  }
  return sum;
}

double ClosedForm::generator(const Jet& g) const {
  const double s2 = params_.sigma * params_.sigma;
  return 0.5 * s2 * g.d2 + params_.mu * g.d1 - params_.r * g.value;
}

double ClosedForm::value_single(double x) const {
  require_resource(x);
  if (x <= barrier_) {
    return psi(x) / psi_d1_barrier_;
  }
  return x - barrier_ + psi(barrier_) / psi_d1_barrier_;
}

double ClosedForm::value_single_d1(double x) const {
  require_resource(x);
  return x <= barrier_ ? psi_d1(x) / psi_d1_barrier_ : 1.0;
}

double ClosedForm::boundary_c(double x) const {
  require_resource(x);
  if (x >= barrier_) {
    return 0.0;
  }
  return psi_d1_minus_barrier(x) / psi_d1(x);
}

double ClosedForm::boundary_c_d1(double x) const {
  require_resource(x);
  if (x >= barrier_) {
    return 0.0;
  }
  const double d1 = psi_d1(x);
  return psi_d1_barrier_ * psi_d2(x) / (d1 * d1);
}

double ClosedForm::boundary_b(double p) const {
  require_probability(p);
  if (p == 0.0) {
    return barrier_;
  }
  if (p >= p_hat_) {
    return 0.0;
  }
  return numerics::find_root([&](double x) { return boundary_c(x) - p; }, 0.0, barrier_,
                             1e-14);
}

double ClosedForm::lambda(double x) const {
  require_resource(x);
  if (x == 0.0) {
    return 0.0;
  }
  const double d1 = psi_d1(x);
  if (x * std::max(-zeta1_, zeta2_) < kSeriesRadius) {
    // psi(x) - x psi'(x) = sum_{n>=2} (1 - n) a_n x^n / n!, where
    // a_n = (zeta2^n - zeta1^n) / (zeta2 - zeta1).
    const double s = zeta1_ + zeta2_;
    const double q = zeta1_ * zeta2_;
    double a_prev = 1.0;  // a_1
    double a_curr = s;    // a_2
    double term = x;      // x^n / n! at n = 1
    double numerator = 0.0;
    for (int n = 2; n <= kSeriesTerms; ++n) {
      term *= x / n;
      numerator += (1.0 - n) * a_curr * term;
      const double a_next = s * a_curr - q * a_prev;
      a_prev = a_curr;
      a_curr = a_next;
    }
    return numerator / (x * d1);
  }
  return psi(x) / (x * d1) - 1.0;
}

double ClosedForm::u_x_on_boundary(double x) const {
  if (!(x > 0.0 && x <= barrier_)) {
    throw std::domain_error("u_x on the boundary needs x in (0, B]");
  }
  return psi_d1(x) * x / psi(x);
}

double ClosedForm::u_p_on_boundary(double x) const {
  if (!(x > 0.0 && x < barrier_)) {
    throw std::domain_error("u_p on the boundary needs x in (0, B)");
  }
  const double ps = psi(x);
  return (ps - x * psi_d1(x)) / (ps * boundary_c_d1(x));
}

double ClosedForm::eq_value_v(double x, double p) const {
  require_resource(x);
  require_probability(p);
  const double b = boundary_b(p);
  if (x <= b) {
    return (1.0 - p) * value_single(x);
  }
  return (1.0 - p) * value_single(b) + x - b;
}

double ClosedForm::eq_value_u(double x, double p) const {
  require_resource(x);
  require_probability(p);
  const double b = boundary_b(p);
  if (x > b) {
    return b;
  }
  if (x == 0.0) {
    return 0.0;
  }
  return b * psi(x) / psi(b);
}

// ---------------------------------------------------------------------------

PerturbationMap::PerturbationMap(const ClosedForm& cf, double p, std::size_t nodes)
    : PerturbationMap(cf, cf.boundary_b(p), nodes, 0) {}

PerturbationMap PerturbationMap::with_floor(const ClosedForm& cf, double floor,
                                            std::size_t nodes) {
  if (!(floor >= 0.0 && floor <= cf.barrier())) {
    throw std::invalid_argument("perturbation floor must lie in [0, B], got " +
                                std::to_string(floor));
  }
  return PerturbationMap(cf, floor, nodes, 0);
}

PerturbationMap::PerturbationMap(const ClosedForm& cf, double floor, std::size_t nodes, int)
    : cf_(cf), floor_(floor), barrier_(cf.barrier()), saturation_(cf.barrier()) {
  if (nodes < 2) {
    throw std::invalid_argument("PerturbationMap needs at least 2 nodes");
  }
  const double width = barrier_ - floor_;
  if (width <= 1e-12) {
    return;
  }
  // Keep node spacing well above rounding level on very short intervals.
  const auto by_spacing = static_cast<std::size_t>(width / 1e-9) + 1;
  const std::size_t n = std::clamp<std::size_t>(by_spacing, 2, nodes);

  std::vector<double> x(n);
  std::vector<double> g(n);
  std::vector<double> slope(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = i + 1 == n ? barrier_ : floor_ + width * static_cast<double>(i) / (n - 1);
    // Each node integrates from the floor; GK error estimates on very short
    // panels sit at a rounding floor well above the true error.
    const double cumulative =
        i == 0 ? 0.0
               : numerics::integrate([&](double s) { return cf_.lambda(s); }, floor_, x[i], 1e-12);
    g[i] = cumulative + x[i];
    slope[i] = 1.0 + cf_.lambda(x[i]);
  }
  saturation_ = g.back();
  table_.emplace(std::move(x), std::move(g), std::move(slope));
}

double PerturbationMap::cumulative_lambda(double x) const {
  if (!(x >= floor_ && x <= barrier_)) {
    throw std::invalid_argument("cumulative Lambda needs x in [b(p), B], got " +
                                std::to_string(x));
  }
  return numerics::integrate([&](double s) { return cf_.lambda(s); }, floor_, x, 1e-10);
}

double PerturbationMap::cumulative_lambda_tabulated(double x) const {
  if (!table_) {
    return 0.0;
  }
  return (*table_)(x) - x;
}

double PerturbationMap::operator()(double y) const {
  if (!(y >= floor_)) {
    throw std::invalid_argument("f is defined on [b(p), inf), got " + std::to_string(y));
  }
  if (y >= saturation_) {
    return barrier_;
  }
  if (!table_) {
    return std::min(y, barrier_);
  }
  return std::clamp(table_->inverse(y), floor_, barrier_);
}

// ---------------------------------------------------------------------------

namespace {

MonotoneMap build_b_table(const ClosedForm& cf, std::size_t nodes) {
  if (nodes < 2) {
    throw std::invalid_argument("BoundaryTable needs at least 2 nodes");
  }
  const double p_hat = cf.p_hat();
  std::vector<double> s(nodes);
  std::vector<double> b(nodes);
  std::vector<double> slope(nodes);
  for (std::size_t i = 0; i < nodes; ++i) {
    const double p = i + 1 == nodes ? p_hat : p_hat * static_cast<double>(i) / (nodes - 1);
    s[i] = std::sqrt(p);
    if (i == 0) {
      // c(x) ~ k (B - x)^2 near B, with 2k = psi'''(B) / psi'(B).
      const double k = 0.5 * cf.psi_d3(cf.barrier()) / cf.psi_d1(cf.barrier());
      b[i] = cf.barrier();
      slope[i] = -1.0 / std::sqrt(k);
    } else {
      b[i] = i + 1 == nodes ? 0.0 : cf.boundary_b(p);
      slope[i] = 2.0 * s[i] / cf.boundary_c_d1(b[i]);
    }
  }
  return MonotoneMap(std::move(s), std::move(b), std::move(slope));
}

}  // namespace

BoundaryTable::BoundaryTable(const ClosedForm& cf, std::size_t nodes)
    : barrier_(cf.barrier()), p_hat_(cf.p_hat()), b_table_(build_b_table(cf, nodes)) {}

double BoundaryTable::b(double p) const {
  require_probability(p);
  if (p == 0.0) {
    return barrier_;
  }
  if (p >= p_hat_) {
    return 0.0;
  }
  return b_table_(std::sqrt(p));
}

double BoundaryTable::c(double x) const {
  require_resource(x);
  if (x >= barrier_) {
    return 0.0;
  }
  const double s = b_table_.inverse(x);
  return s * s;
}

}  // namespace definetti
