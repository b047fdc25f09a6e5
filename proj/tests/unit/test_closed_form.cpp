#include <doctest.h>

#include <boost/math/quadrature/gauss.hpp>

#include <cmath>
#include <random>

#include "definetti/closed_form.hpp"
#include "definetti/monotone_map.hpp"

using namespace definetti;

namespace {

// Reference values from tests/oracle/closed_form_oracle.py (mpmath, 50 digits)
// at mu = 0.03, sigma = 0.12, r = 0.01.
constexpr double kZeta1 = -4.4769011027241786083;
constexpr double kZeta2 = 0.3102344360575119416;
constexpr double kBarrier = 1.1152214468456419001;
constexpr double kPsiAtB = 0.29382652829638997715;
constexpr double kPsiD1AtB = 0.09794217609879665905;
constexpr double kPHat = 0.90205782390120334095;
constexpr double kLambdaAtB = 1.6900486970416296213;
constexpr double kLambdaIntegralFromZero = 1.5024803202869353139;
constexpr double kBAt072165 = 0.26823093356759620472;

ClosedForm reference() { return ClosedForm(ModelParams{0.03, 0.12, 0.01}); }

// Composite fixed-node Gauss-Legendre, independent of the adaptive rule.
double gauss_legendre(const ClosedForm& cf, double a, double b, int panels) {
  double total = 0.0;
  const double h = (b - a) / panels;
  for (int i = 0; i < panels; ++i) {
    total += boost::math::quadrature::gauss<double, 20>::integrate(
        [&](double s) { return cf.lambda(s); }, a + i * h, a + (i + 1) * h);
  }
  return total;
}

}  // namespace

TEST_CASE("roots of the characteristic quadratic") {
  const auto roots = solve_roots(ModelParams{0.03, 0.12, 0.01});
  CHECK(roots.zeta1 == doctest::Approx(kZeta1).epsilon(1e-14));
  CHECK(roots.zeta2 == doctest::Approx(kZeta2).epsilon(1e-14));

  SUBCASE("golden ratio when mu = r = sigma^2 / 2") {
    const double sigma = 0.3;
    const auto golden = solve_roots(ModelParams{sigma * sigma / 2, sigma, sigma * sigma / 2});
    CHECK(golden.zeta2 == doctest::Approx((std::sqrt(5.0) - 1) / 2).epsilon(1e-15));
    CHECK(golden.zeta1 == doctest::Approx(-(std::sqrt(5.0) + 1) / 2).epsilon(1e-15));
  }

  SUBCASE("Vieta relations and residuals over random parameters") {
    std::mt19937_64 gen(7);
    std::uniform_real_distribution<double> unit(0.01, 2.0);
    for (int i = 0; i < 200; ++i) {
      const ModelParams params{unit(gen), unit(gen), unit(gen)};
      const auto z = solve_roots(params);
      const double s2 = params.sigma * params.sigma;
      CHECK(z.zeta1 < 0.0);
      CHECK(z.zeta2 > 0.0);
      CHECK(z.zeta1 + z.zeta2 == doctest::Approx(-2 * params.mu / s2).epsilon(1e-13));
      CHECK(z.zeta1 * z.zeta2 == doctest::Approx(-2 * params.r / s2).epsilon(1e-13));
      for (double zeta : {z.zeta1, z.zeta2}) {
        const double residual = zeta * zeta + 2 * params.mu / s2 * zeta - 2 * params.r / s2;
        const double scale = zeta * zeta + std::fabs(2 * params.mu / s2 * zeta) + 2 * params.r / s2;
        CHECK(std::fabs(residual) / scale < 1e-12);
      }
    }
  }

  SUBCASE("invalid parameters") {
    CHECK_THROWS_AS(solve_roots(ModelParams{0.03, 0.0, 0.01}), std::invalid_argument);
    CHECK_THROWS_AS(solve_roots(ModelParams{-0.03, 0.12, 0.01}), std::invalid_argument);
    CHECK_THROWS_AS(solve_roots(ModelParams{0.03, 0.12, 0.0}), std::invalid_argument);
  }
}

TEST_CASE("scale function psi") {
  const auto cf = reference();
  CHECK(cf.psi(0.0) == 0.0);
  CHECK(cf.psi_d1(0.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(cf.psi(cf.barrier()) == doctest::Approx(kPsiAtB).epsilon(1e-13));
  CHECK(cf.psi_d1(cf.barrier()) == doctest::Approx(kPsiD1AtB).epsilon(1e-13));
  CHECK_THROWS_AS(cf.psi(-1e-3), std::invalid_argument);

  SUBCASE("L psi = 0 at random points in [0, 3B]") {
    std::mt19937_64 gen(11);
    std::uniform_real_distribution<double> where(0.0, 3 * cf.barrier());
    for (int i = 0; i < 1000; ++i) {
      const double x = where(gen);
      CHECK(std::fabs(generator_apply(cf, [&](double s) { return cf.psi_jet(s); }, x)) < 1e-9);
    }
  }

  SUBCASE("generator on elementary functions") {
    const double x = 0.7;
    CHECK(generator_apply(cf, [](double) { return Jet{1.0, 0.0, 0.0}; }, x) ==
          doctest::Approx(-0.01));
    CHECK(generator_apply(cf, [](double s) { return Jet{s, 1.0, 0.0}; }, x) ==
          doctest::Approx(0.03 - 0.01 * x));
  }

  SUBCASE("concave below B, convex above") {
    const double b = cf.barrier();
    for (int i = 1; i < 200; ++i) {
      CHECK(cf.psi_d2(b * i / 200.0) < 0.0);
      CHECK(cf.psi_d2(b + 2 * b * i / 200.0) > 0.0);
    }
    CHECK(std::fabs(cf.psi_d2(b)) < 1e-10);
  }
}

TEST_CASE("barrier and single-player value") {
  const auto cf = reference();
  CHECK(cf.barrier() == doctest::Approx(kBarrier).epsilon(1e-14));
  CHECK(std::fabs(cf.barrier() - 1.1152) < 1e-3);
  CHECK(cf.psi(cf.barrier()) / cf.psi_d1(cf.barrier()) == doctest::Approx(3.0).epsilon(1e-13));
  CHECK(std::fabs(cf.value_single(cf.barrier()) - 3.0) < 1e-8);
  CHECK(cf.value_single(0.0) == 0.0);
  CHECK(cf.value_single_d1(0.0) == doctest::Approx(10.210106001639943537).epsilon(1e-12));
  CHECK(cf.value_single_d1(cf.barrier()) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(cf.value_single_d1(2.0) == 1.0);
  CHECK(cf.value_single(2.0) == doctest::Approx(2.0 - kBarrier + 3.0).epsilon(1e-12));

  SUBCASE("time rescaling leaves roots and barrier unchanged") {
    const double a = 3.7;
    const ClosedForm scaled(ModelParams{0.03 * a, 0.12 * std::sqrt(a), 0.01 * a});
    CHECK(scaled.zeta1() == doctest::Approx(cf.zeta1()).epsilon(1e-13));
    CHECK(scaled.barrier() == doctest::Approx(cf.barrier()).epsilon(1e-13));
  }

  SUBCASE("V is concave and continuous") {
    double prev_slope = cf.value_single_d1(0.0);
    for (int i = 1; i <= 400; ++i) {
      const double x = 2.5 * cf.barrier() * i / 400.0;
      const double slope = cf.value_single_d1(x);
      CHECK(slope <= prev_slope + 1e-15);
      prev_slope = slope;
    }
    const double b = cf.barrier();
    CHECK(cf.value_single(std::nextafter(b, 10.0)) == doctest::Approx(cf.value_single(b)));
  }
}

TEST_CASE("belief boundary c and its inverse b") {
  const auto cf = reference();
  CHECK(cf.p_hat() == doctest::Approx(kPHat).epsilon(1e-13));
  CHECK(cf.boundary_c(0.0) == doctest::Approx(kPHat).epsilon(1e-13));
  CHECK(cf.boundary_c(cf.barrier()) == 0.0);
  CHECK(cf.boundary_c(2 * cf.barrier()) == 0.0);
  CHECK(cf.boundary_b(0.0) == cf.barrier());
  CHECK(cf.boundary_b(cf.p_hat()) == 0.0);
  CHECK(cf.boundary_b(0.95) == 0.0);
  CHECK(cf.boundary_b(0.72165) == doctest::Approx(kBAt072165).epsilon(1e-11));
  CHECK(std::fabs(0.8 * cf.p_hat() - 0.72) < 5e-3);
  CHECK_THROWS_AS(cf.boundary_b(1.5), std::invalid_argument);

  SUBCASE("smooth fit (1 - c) V' = 1 on [0, B]") {
    for (int i = 0; i <= 1000; ++i) {
      const double x = cf.barrier() * i / 1000.0;
      CHECK(std::fabs((1.0 - cf.boundary_c(x)) * cf.value_single_d1(x) - 1.0) < 1e-9);
    }
  }

  SUBCASE("c strictly decreasing") {
    double prev = cf.boundary_c(0.0);
    for (int i = 1; i <= 1000; ++i) {
      const double next = cf.boundary_c(cf.barrier() * i / 1000.0);
      CHECK(next < prev);
      prev = next;
    }
  }

  SUBCASE("c(b(p)) = p on [0, p_hat] and b(c(x)) = x on [0, B]") {
    for (int i = 0; i <= 1000; ++i) {
      const double p = cf.p_hat() * i / 1000.0;
      CHECK(std::fabs(cf.boundary_c(cf.boundary_b(p)) - p) < 1e-9);
      const double x = cf.barrier() * i / 1000.0;
      CHECK(std::fabs(cf.boundary_b(cf.boundary_c(x)) - x) < 1e-9);
    }
    // Close to B the boundary is flat to second order.
    for (double gap : {1e-4, 1e-6, 1e-7, 1e-8}) {
      const double x = cf.barrier() - gap;
      CHECK(std::fabs(cf.boundary_b(cf.boundary_c(x)) - x) < 1e-9);
    }
  }

  SUBCASE("c' against central differences") {
    for (double x : {0.05, 0.3, 0.7, 1.0}) {
      const double h = 1e-6;
      const double fd = (cf.boundary_c(x + h) - cf.boundary_c(x - h)) / (2 * h);
      CHECK(cf.boundary_c_d1(x) == doctest::Approx(fd).epsilon(1e-7));
    }
  }

  SUBCASE("tabulated boundary agrees with root finding") {
    const BoundaryTable table(cf);
    for (int i = 0; i <= 5000; ++i) {
      const double p = cf.p_hat() * i / 5000.0;
      CHECK(std::fabs(table.b(p) - cf.boundary_b(p)) < 1e-7);
      const double x = cf.barrier() * i / 5000.0;
      CHECK(std::fabs(table.c(x) - cf.boundary_c(x)) < 1e-7);
    }
  }
}

TEST_CASE("perturbation density lambda") {
  const auto cf = reference();
  CHECK(cf.lambda(0.0) == 0.0);
  CHECK(cf.lambda(1e-12) == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(cf.lambda(cf.barrier()) == doctest::Approx(kLambdaAtB).epsilon(1e-12));
  CHECK(cf.lambda(cf.barrier()) == doctest::Approx(3.0 / cf.barrier() - 1.0).epsilon(1e-12));
  for (int i = 1; i < 1000; ++i) {
    CHECK(cf.lambda(cf.barrier() * i / 1000.0) > 0.0);
  }

  SUBCASE("series and closed form agree where they meet") {
    const double edge = 1.0 / -cf.zeta1();
    const double below = cf.lambda(std::nextafter(edge, 0.0));
    const double above = cf.lambda(edge);
    CHECK(below == doctest::Approx(above).epsilon(1e-12));
  }

  SUBCASE("reflection direction reproduces lambda on the boundary") {
    for (int i = 1; i < 1000; ++i) {
      const double x = cf.barrier() * i / 1000.0;
      const double ratio = cf.boundary_c_d1(x) * cf.u_p_on_boundary(x) / cf.u_x_on_boundary(x);
      CHECK(std::fabs(ratio - cf.lambda(x)) < 1e-8);
    }
    CHECK_THROWS_AS(cf.u_p_on_boundary(cf.barrier()), std::domain_error);
  }

  SUBCASE("boundary partials match one-sided differences of u") {
    for (double x : {0.1, 0.3, 0.6, 0.9}) {
      const double p = cf.boundary_c(x);
      const double h = 1e-6;
      const double ux = (cf.eq_value_u(x, p) - cf.eq_value_u(x - h, p)) / h;
      // p < c(x) keeps x inside the continuation branch x <= b(p).
      const double up = (cf.eq_value_u(x, p) - cf.eq_value_u(x, p - h)) / h;
      CHECK(cf.u_x_on_boundary(x) == doctest::Approx(ux).epsilon(1e-5));
      CHECK(cf.u_p_on_boundary(x) == doctest::Approx(up).epsilon(1e-4));
    }
  }
}

TEST_CASE("cumulative perturbation and the map f") {
  const auto cf = reference();

  SUBCASE("two independent quadrature rules agree for p = 0 floor") {
    const auto from_zero = PerturbationMap::with_floor(cf, 0.0);
    const double adaptive = from_zero.cumulative_lambda(cf.barrier());
    const double fixed = gauss_legendre(cf, 0.0, cf.barrier(), 16);
    CHECK(std::fabs(adaptive - fixed) < 1e-8);
    CHECK(adaptive == doctest::Approx(kLambdaIntegralFromZero).epsilon(1e-12));
    CHECK(from_zero.saturation_level() ==
          doctest::Approx(kLambdaIntegralFromZero + kBarrier).epsilon(1e-12));
  }

  SUBCASE("prior p0 = 0.8 p_hat") {
    const double p = 0.8 * cf.p_hat();
    const PerturbationMap f(cf, p);
    const double b = f.floor();
    CHECK(b == doctest::Approx(0.26823475298057911199).epsilon(1e-11));
    CHECK(f.cumulative_lambda(b) == 0.0);
    CHECK(f.cumulative_lambda(cf.barrier()) ==
          doctest::Approx(1.4112485654321854527).epsilon(1e-11));
    CHECK_THROWS_AS(f.cumulative_lambda(b / 2), std::invalid_argument);
    CHECK_THROWS_AS(f.cumulative_lambda(2 * cf.barrier()), std::invalid_argument);
    CHECK_THROWS_AS(f(0.5 * b), std::invalid_argument);

    // Additivity of the integral.
    const double x1 = 0.5;
    const double x2 = 0.9;
    const auto tail = gauss_legendre(cf, x1, x2, 4);
    CHECK(std::fabs(f.cumulative_lambda(x1) + tail - f.cumulative_lambda(x2)) < 1e-9);

    CHECK(f(b) == b);
    CHECK(f(f.saturation_level()) == cf.barrier());
    CHECK(f(f.saturation_level() + 3.0) == cf.barrier());

    // Round trip over the increasing branch against direct quadrature.
    double prev = b;
    for (int i = 0; i <= 1000; ++i) {
      const double y = b + (f.saturation_level() - b) * i / 1000.0;
      const double x = f(y);
      CHECK(x >= prev);
      prev = x;
      CHECK(std::fabs(f.cumulative_lambda(x) + x - y) < 1e-9);
    }
  }

  SUBCASE("degenerate floor at B") {
    const PerturbationMap f(cf, 0.0);
    CHECK(f.floor() == cf.barrier());
    CHECK(f.saturation_level() == cf.barrier());
    CHECK(f(cf.barrier()) == cf.barrier());
    CHECK(f(5.0) == cf.barrier());
    CHECK(f.cumulative_lambda(cf.barrier()) == 0.0);
  }

  SUBCASE("floor 0 when p >= p_hat") {
    const PerturbationMap f(cf, 0.95);
    CHECK(f.floor() == 0.0);
    CHECK(f(0.0) == 0.0);
    CHECK(f(0.1) > 0.0);
  }
}

TEST_CASE("equilibrium values v and u") {
  const auto cf = reference();
  // Oracle values from the mpmath script.
  CHECK(cf.eq_value_v(0.134, 0.72165) == doctest::Approx(0.2930262679906869).epsilon(1e-10));
  CHECK(cf.eq_value_u(0.134, 0.72165) == doctest::Approx(0.1684761912079813).epsilon(1e-10));
  CHECK(cf.eq_value_v(0.05, 0.3) == doctest::Approx(0.3227717519757828).epsilon(1e-10));
  CHECK(cf.eq_value_u(0.05, 0.3) == doctest::Approx(0.115033458467602).epsilon(1e-10));
  CHECK(cf.eq_value_v(1.5, 0.3) == doctest::Approx(2.596737648206276).epsilon(1e-10));
  CHECK(cf.eq_value_u(1.5, 0.3) == doctest::Approx(0.6073099117848673).epsilon(1e-10));
  CHECK(cf.eq_value_v(0.5, 0.0) == doctest::Approx(2.263288957762586).epsilon(1e-10));
  CHECK(cf.eq_value_u(0.5, 0.0) == doctest::Approx(0.8413561287019186).epsilon(1e-10));

  CHECK(cf.eq_value_u(0.0, 0.95) == 0.0);
  CHECK(cf.eq_value_u(0.0, 0.3) == 0.0);
  CHECK(cf.eq_value_v(0.4, 0.95) == doctest::Approx(0.4));
  CHECK(cf.eq_value_u(0.4, 0.95) == 0.0);

  SUBCASE("boundary conditions and bounds on a grid") {
    for (int i = 0; i <= 40; ++i) {
      const double p = i / 40.0;
      const double b = cf.boundary_b(p);
      if (b > 0.0) {
        CHECK(cf.eq_value_u(b, p) == doctest::Approx(b).epsilon(1e-14));
      }
      for (int j = 0; j <= 40; ++j) {
        const double x = 2.0 * cf.barrier() * j / 40.0;
        const double v = cf.eq_value_v(x, p);
        CHECK(v >= (1 - p) * cf.value_single(x) - 1e-12);
        CHECK(v <= cf.value_single(x) + 1e-12);
        CHECK(cf.eq_value_u(x, p) >= 0.0);
      }
    }
    for (int j = 0; j <= 40; ++j) {
      const double x = 2.0 * j / 40.0;
      CHECK(cf.eq_value_v(x, 0.0) == doctest::Approx(cf.value_single(x)).epsilon(1e-14));
    }
  }

  SUBCASE("v continuous across the boundary") {
    const double p = 0.4;
    const double b = cf.boundary_b(p);
    CHECK(cf.eq_value_v(b + 1e-12, p) == doctest::Approx(cf.eq_value_v(b, p)).epsilon(1e-10));
  }
}

TEST_CASE("MonotoneMap") {
  SUBCASE("inverse of an increasing exponential table") {
    std::vector<double> x, y, d;
    for (int i = 0; i <= 64; ++i) {
      const double s = i / 32.0;
      x.push_back(s);
      y.push_back(std::exp(s));
      d.push_back(std::exp(s));
    }
    const MonotoneMap map(x, y, d);
    CHECK(map.direction() == Direction::increasing);
    for (int i = 0; i <= 1000; ++i) {
      const double target = map.range_lower() + (map.range_upper() - map.range_lower()) * i / 1000.0;
      CHECK(std::fabs(map(map.inverse(target)) - target) < 1e-9);
    }
    CHECK(map(1.3) == doctest::Approx(std::exp(1.3)).epsilon(1e-8));
    CHECK_THROWS_AS(map(-0.1), std::out_of_range);
    CHECK_THROWS_AS(map.inverse(0.5), std::out_of_range);
  }

  SUBCASE("decreasing table") {
    const MonotoneMap map({0.0, 1.0, 2.0}, {4.0, 1.0, 0.0}, {-4.0, -2.0, 0.0});
    CHECK(map.direction() == Direction::decreasing);
    CHECK(map.inverse(1.0) == 1.0);
    CHECK(map(map.inverse(2.5)) == doctest::Approx(2.5).epsilon(1e-12));
  }

  SUBCASE("rejects non-monotone data") {
    CHECK_THROWS_AS(MonotoneMap({0.0, 1.0, 2.0}, {0.0, 1.0, 0.5}, {1.0, 1.0, 1.0}),
                    std::invalid_argument);
    CHECK_THROWS_AS(MonotoneMap({0.0, 1.0}, {0.0, 1.0}, {10.0, 1.0}), std::invalid_argument);
    CHECK_THROWS_AS(MonotoneMap({0.0}, {0.0}, {1.0}), std::invalid_argument);
  }
}
