#include <doctest.h>

#include <cmath>

#include "definetti/rng.hpp"
#include "definetti/strategies.hpp"

using namespace definetti;

namespace {

const ClosedForm& model() {
  static const ClosedForm cf(ModelParams{0.03, 0.12, 0.01});
  return cf;
}

std::vector<double> random_y(std::uint64_t seed, double x0, double dt = 0.01,
                             std::size_t steps = 20000) {
  PathStream stream(seed, 0);
  const TimeGrid g{dt, steps};
  const auto w = sample_brownian(g, [&] { return stream.normal(); });
  return drifted_path(w, g, x0, model().params());
}

}  // namespace

TEST_CASE("strategy tags") {
  for (const char* tag : {"equilibrium", "single_player", "immediate", "barrier:0.5"}) {
    CHECK(ControllerStrategy::parse(tag).tag() == tag);
  }
  for (const char* tag : {"equilibrium", "never", "immediate", "threshold:0.25"}) {
    CHECK(StopperStrategy::parse(tag).tag() == tag);
  }
  CHECK(ControllerStrategy::parse("barrier:1.1152214468456418").level == 1.1152214468456418);
  CHECK_THROWS_AS(ControllerStrategy::parse("barrier:"), std::invalid_argument);
  CHECK_THROWS_AS(ControllerStrategy::parse("barrier:-1"), std::invalid_argument);
  CHECK_THROWS_AS(ControllerStrategy::parse("barrier:1x"), std::invalid_argument);
  CHECK_THROWS_AS(ControllerStrategy::parse("reflect"), std::invalid_argument);
  CHECK_THROWS_AS(StopperStrategy::parse("threshold:0"), std::invalid_argument);
  CHECK_THROWS_AS(StopperStrategy::parse("sometimes"), std::invalid_argument);
}

TEST_CASE("Equilibrium data") {
  const double p = 0.5;
  const Equilibrium eq(model(), p);
  CHECK(eq.floor() == model().boundary_b(p));
  CHECK(eq.belief_boundary(0.3) == model().boundary_c(0.3));
  CHECK(eq.belief_boundary(-1.0) == model().p_hat());

  const Equilibrium stretched(model(), p, 1.1);
  CHECK(stretched.floor() == doctest::Approx(1.1 * model().boundary_b(p)));
  CHECK(stretched.belief_boundary(0.33) == doctest::Approx(model().boundary_c(0.3)));
  CHECK(Equilibrium(model(), 0.0, 1.1).floor() == model().barrier());
  CHECK_THROWS_AS(Equilibrium(model(), p, 0.0), std::invalid_argument);
}

TEST_CASE("controller admissibility on random paths") {
  const double p = 0.72;
  const Equilibrium eq(model(), p);
  const std::vector<ControllerStrategy> strategies{
      ControllerStrategy::equilibrium(), ControllerStrategy::single_player(),
      ControllerStrategy::barrier(0.4), ControllerStrategy::barrier(0.0),
      ControllerStrategy::immediate()};
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto y = random_y(seed, 0.1 + 0.05 * seed);
    for (const auto& s : strategies) {
      const auto out = apply_controller(s, y, eq);
      for (std::size_t k = 0; k < y.size(); ++k) {
        CHECK(std::fabs(out.x[k] - (y[k] - out.d[k])) < 1e-12);
        CHECK(out.d[k] >= (k == 0 ? 0.0 : out.d[k - 1]));
      }
    }
  }
}

TEST_CASE("controller edge cases") {
  const double p = 0.72;
  const Equilibrium eq(model(), p);
  const double b = eq.floor();

  SUBCASE("immediate extraction takes everything at node 0") {
    const auto out = apply_controller(ControllerStrategy::immediate(), {0.3, 0.5, 0.2}, eq);
    CHECK(out.d[0] == 0.3);
    CHECK(out.x[0] == 0.0);
  }
  SUBCASE("single player is reflection at B") {
    const auto y = random_y(1, 0.5);
    const auto out = apply_controller(ControllerStrategy::single_player(), y, eq);
    const auto ref = skorokhod_reflect(y, model().barrier());
    CHECK(out.x == ref.x);
    CHECK(out.d == ref.d);
  }
  SUBCASE("equilibrium at p = 0 is bit-identical to the single player") {
    const Equilibrium eq0(model(), 0.0);
    const auto y = random_y(2, 0.5);
    const auto a = apply_controller(ControllerStrategy::equilibrium(), y, eq0);
    const auto s = apply_controller(ControllerStrategy::single_player(), y, eq0);
    CHECK(a.x == s.x);
    CHECK(a.d == s.d);
  }
  SUBCASE("a start above b(p) pays the lump and then follows Y down") {
    const std::vector<double> y{0.6, 0.55, 0.5, 0.4, 0.3};
    const auto out = apply_controller(ControllerStrategy::equilibrium(), y, eq);
    CHECK(out.d[0] == doctest::Approx(0.6 - b).epsilon(1e-14));
    CHECK(out.x[0] == doctest::Approx(b).epsilon(1e-14));
    for (std::size_t k = 1; k < y.size(); ++k) {
      CHECK(out.d[k] == out.d[0]);
    }
    const auto gamma = gamma_star(out.x, eq);
    for (double g : gamma) {
      CHECK(belief_from_gamma(g, p) == doctest::Approx(p).epsilon(1e-12));
    }
  }
  SUBCASE("below the boundary nothing is paid until Y passes b(p)") {
    const auto out = apply_controller(ControllerStrategy::equilibrium(), {0.1, 0.2, b, 0.05}, eq);
    CHECK(out.d == std::vector<double>{0.0, 0.0, 0.0, 0.0});
  }
  SUBCASE("saturation pins X at B and absorbs the belief") {
    const double level = eq.perturbation().saturation_level();
    const std::vector<double> y{0.1, 0.5, level - 0.01, level + 0.2, level + 0.1, level + 0.3};
    ControllerStepper stepper(ControllerStrategy::equilibrium(), eq, y[0]);
    StopperStepper stopper(StopperStrategy::equilibrium(), eq);
    for (std::size_t k = 0; k < y.size(); ++k) {
      stepper.step(y[k]);
      const double pi = belief_from_gamma(stopper.step(stepper.x()), p);
      if (k < 3) {
        CHECK_FALSE(stepper.saturated());
        CHECK(pi > 0.0);
      } else {
        CHECK(stepper.saturated());
        CHECK(pi == 0.0);
      }
      if (k == 3 || k == 5) {
        CHECK(stepper.x() == model().barrier());
      }
    }
  }
  CHECK_THROWS_AS(ControllerStepper(ControllerStrategy::equilibrium(), eq, -0.1),
                  std::invalid_argument);
}

TEST_CASE("stoppers") {
  const double p = 0.6;
  const Equilibrium eq(model(), p);
  const std::vector<double> x{0.1, 0.4, 0.3, 0.7, 0.2};

  const auto gamma = gamma_star(x, eq);
  for (std::size_t k = 0; k < x.size(); ++k) {
    CHECK(gamma[k] >= (k == 0 ? 0.0 : gamma[k - 1]));
    CHECK(gamma[k] >= 0.0);
    CHECK(gamma[k] <= 1.0);
  }
  CHECK(gamma[0] == 0.0);
  CHECK(gamma[2] == gamma[1]);

  const Equilibrium eq0(model(), 0.0);
  CHECK(gamma_star({0.5, model().barrier(), 0.5}, eq0) == std::vector<double>{0.0, 1.0, 1.0});

  const std::vector<double> hit{0, 1, 1, 1, 1};
  CHECK(apply_stopper(StopperStrategy::threshold(0.35), x, eq) == hit);
  CHECK(deviation_stopper_threshold(x, 0.35) == hit);
  CHECK(apply_stopper(StopperStrategy::never(), x, eq) == std::vector<double>(5, 0.0));
  CHECK(apply_stopper(StopperStrategy::immediate(), x, eq) == std::vector<double>(5, 1.0));
  CHECK_THROWS_AS(deviation_stopper_threshold(x, 0.0), std::invalid_argument);
}

TEST_CASE("belief and Gamma are inverse maps") {
  for (double p : {0.1, 0.5, 0.9}) {
    for (double g : {0.0, 0.2, 0.5, 0.99}) {
      const double pi = belief_from_gamma(g, p);
      CHECK(pi <= p);
      CHECK(gamma_from_belief(pi, p) == doctest::Approx(g).epsilon(1e-12));
    }
    CHECK(belief_from_gamma(1.0, p) == 0.0);
    CHECK(gamma_from_belief(p, p) == 0.0);
  }
  CHECK(belief_from_gamma(0.3, 0.0) == 0.0);
  CHECK_THROWS_AS(gamma_from_belief(0.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(gamma_from_belief(0.6, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(belief_from_gamma(1.5, 0.5), std::invalid_argument);

  SUBCASE("equilibrium belief is p ^ c(max x)") {
    const double p = 0.7;
    const Equilibrium eq(model(), p);
    const std::vector<double> x{0.1, 0.3, 0.5, 0.45, 0.9, 0.2};
    const auto pi = belief_from_gamma(gamma_star(x, eq), p);
    double x_max = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
      x_max = std::max(x_max, x[k]);
      CHECK(pi[k] == doctest::Approx(std::min(p, model().boundary_c(x_max))).epsilon(1e-13));
    }
  }
}

TEST_CASE("randomised stopping time") {
  const std::vector<double> gamma{0.0, 0.1, 0.4, 0.4, 1.0};
  CHECK(sample_stop_time(gamma, 0.05) == 1u);
  CHECK(sample_stop_time(gamma, 0.4) == 4u);
  CHECK(sample_stop_time({0.0, 0.3}, 0.5) == std::nullopt);
  CHECK_THROWS_AS(sample_stop_time(gamma, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(sample_stop_time(gamma, 1.0), std::invalid_argument);
}

TEST_CASE("deviation families") {
  const double p = 0.8 * model().p_hat();
  const Equilibrium eq(model(), p);
  const double b = eq.floor();
  const double B = model().barrier();
  const auto controllers = controller_deviation_family(eq);
  REQUIRE(controllers.size() == 6);
  CHECK(controllers[0].level == doctest::Approx(0.5 * b));
  CHECK(controllers[1].level == b);
  CHECK(controllers[2].level == doctest::Approx(0.5 * (b + B)));
  CHECK(controllers[3].level == B);
  CHECK(controllers[4].level == doctest::Approx(1.2 * B));
  CHECK(controllers[5].kind == ControllerStrategy::Kind::immediate);

  const auto stoppers = stopper_deviation_family(eq);
  REQUIRE(stoppers.size() == 6);
  CHECK(stoppers[1].level == b);
  CHECK(stoppers[3].level == B);
  CHECK(stoppers[4].kind == StopperStrategy::Kind::never);
  CHECK(stoppers[5].kind == StopperStrategy::Kind::immediate);

  // Above p_hat the boundary is 0 and the degenerate levels are dropped.
  const Equilibrium high(model(), 0.95);
  CHECK(controller_deviation_family(high).size() == 4);
  CHECK(stopper_deviation_family(high).size() == 4);
}
