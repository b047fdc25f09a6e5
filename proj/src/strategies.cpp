#include "definetti/strategies.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <stdexcept>
#include <string>

namespace definetti {

namespace {

std::string format_level(double level) {
  char buffer[32];
  const auto result = std::to_chars(buffer, buffer + sizeof buffer, level);
  return std::string(buffer, result.ptr);
}

double parse_level(std::string_view tag, std::string_view prefix) {
  const std::string_view text = tag.substr(prefix.size());
  double level = 0.0;
  const auto result = std::from_chars(text.data(), text.data() + text.size(), level);
  if (text.empty() || result.ec != std::errc() || result.ptr != text.data() + text.size()) {
    throw std::invalid_argument("cannot parse level in strategy tag '" + std::string(tag) + "'");
  }
  return level;
}

void require_level(double level, bool allow_zero, const char* what) {
  const bool ok = std::isfinite(level) && (allow_zero ? level >= 0.0 : level > 0.0);
  if (!ok) {
    throw std::invalid_argument(std::string(what) + " level must be finite and " +
                                (allow_zero ? ">= 0" : "> 0") + ", got " + format_level(level));
  }
}

}  // namespace

ControllerStrategy ControllerStrategy::barrier(double level) {
  require_level(level, true, "barrier");
  return {Kind::barrier, level};
}

ControllerStrategy ControllerStrategy::parse(std::string_view tag) {
  if (tag == "equilibrium") {
    return equilibrium();
  }
  if (tag == "single_player") {
    return single_player();
  }
  if (tag == "immediate") {
    return immediate();
  }
  if (tag.starts_with("barrier:")) {
    return barrier(parse_level(tag, "barrier:"));
  }
  throw std::invalid_argument("unknown controller strategy '" + std::string(tag) + "'");
}

std::string ControllerStrategy::tag() const {
  switch (kind) {
    case Kind::equilibrium:
      return "equilibrium";
    case Kind::single_player:
      return "single_player";
    case Kind::barrier:
      return "barrier:" + format_level(level);
    case Kind::immediate:
      return "immediate";
  }
  return "?";
}

StopperStrategy StopperStrategy::threshold(double level) {
  require_level(level, false, "threshold");
  return {Kind::threshold, level};
}

StopperStrategy StopperStrategy::parse(std::string_view tag) {
  if (tag == "equilibrium") {
    return equilibrium();
  }
  if (tag == "never") {
    return never();
  }
  if (tag == "immediate") {
    return immediate();
  }
  if (tag.starts_with("threshold:")) {
    return threshold(parse_level(tag, "threshold:"));
  }
  throw std::invalid_argument("unknown stopper strategy '" + std::string(tag) + "'");
}

std::string StopperStrategy::tag() const {
  switch (kind) {
    case Kind::equilibrium:
      return "equilibrium";
    case Kind::threshold:
      return "threshold:" + format_level(level);
    case Kind::never:
      return "never";
    case Kind::immediate:
      return "immediate";
  }
  return "?";
}

// ---------------------------------------------------------------------------

namespace {

double stretched_floor(const ClosedForm& cf, double p, double scale) {
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw std::invalid_argument("boundary scale must be finite and > 0");
  }
  return std::min(scale * cf.boundary_b(p), cf.barrier());
}

}  // namespace

Equilibrium::Equilibrium(const ClosedForm& cf, double p, double boundary_scale)
    : cf_(cf),
      p_(p),
      scale_(boundary_scale),
      floor_(stretched_floor(cf, p, boundary_scale)),
      map_(PerturbationMap::with_floor(cf, floor_)) {}

double Equilibrium::belief_boundary(double x) const {
  const double at = std::max(x, 0.0);
  return cf_.boundary_c(scale_ == 1.0 ? at : at / scale_);
}

// ---------------------------------------------------------------------------

ControllerStepper::ControllerStepper(const ControllerStrategy& strategy, const Equilibrium& eq,
                                     double x0)
    : kind_(strategy.kind), x0_(x0) {
  if (!(x0 >= 0.0) || !std::isfinite(x0)) {
    throw std::invalid_argument("initial resource must be finite and >= 0");
  }
  switch (kind_) {
    case ControllerStrategy::Kind::equilibrium:
      map_ = &eq.perturbation();
      level_ = eq.floor();
      lump_ = std::max(x0 - level_, 0.0);
      break;
    case ControllerStrategy::Kind::single_player:
      level_ = eq.barrier();
      break;
    case ControllerStrategy::Kind::barrier:
      require_level(strategy.level, true, "barrier");
      level_ = strategy.level;
      break;
    case ControllerStrategy::Kind::immediate:
      level_ = 0.0;
      break;
  }
  top_ = level_;
  y_bar_ = level_;
  if (map_ != nullptr) {
    f_value_ = (*map_)(level_);
    saturated_ = level_ >= map_->saturation_level();
  }
}

void ControllerStepper::refresh_top(double y) {
  top_ = y;
  if (kind_ != ControllerStrategy::Kind::equilibrium) {
    y_bar_ = top_;
    return;
  }
  // Ybar^ = b v max(Y - lump). With a lump, x0 - lump = b, so the shifted
  // maximum is b + (max Y - x0); this keeps Ybar^ = b exactly at node 0.
  y_bar_ = lump_ > 0.0 ? level_ + (top_ - x0_) : top_;
  if (!saturated_) {
    f_value_ = (*map_)(y_bar_);
    saturated_ = y_bar_ >= map_->saturation_level();
  }
}

void ControllerStepper::step(double y) {
  if (y > top_) {
    refresh_top(y);
  }
  const double anchor = kind_ == ControllerStrategy::Kind::equilibrium ? f_value_ : level_;
  // x = (y - top) + anchor keeps x on the boundary exactly at new maxima.
  const double candidate = top_ - anchor;
  if (candidate > d_) {
    d_ = candidate;
    x_ = (y - top_) + anchor;
  } else {
    x_ = y - d_;
  }
}

// ---------------------------------------------------------------------------

StopperStepper::StopperStepper(const StopperStrategy& strategy, const Equilibrium& eq)
    : kind_(strategy.kind), eq_(&eq), level_(strategy.level) {
  if (kind_ == StopperStrategy::Kind::threshold) {
    require_level(level_, false, "threshold");
  }
  if (kind_ == StopperStrategy::Kind::immediate) {
    gamma_ = 1.0;
  }
}

double StopperStepper::step(double x) {
  if (!(x > x_bar_)) {
    return gamma_;
  }
  x_bar_ = x;
  switch (kind_) {
    case StopperStrategy::Kind::equilibrium: {
      const double p = eq_->prior();
      if (p == 0.0) {
        gamma_ = x_bar_ >= eq_->barrier() ? 1.0 : 0.0;
      } else {
        const double z = std::min(p, eq_->belief_boundary(x_bar_));
        gamma_ = (p - z) / (p * (1.0 - z));
      }
      break;
    }
    case StopperStrategy::Kind::threshold:
      gamma_ = x_bar_ >= level_ ? 1.0 : 0.0;
      break;
    case StopperStrategy::Kind::never:
      gamma_ = 0.0;
      break;
    case StopperStrategy::Kind::immediate:
      gamma_ = 1.0;
      break;
  }
  return gamma_;
}

// ---------------------------------------------------------------------------

ControlledPath apply_controller(const ControllerStrategy& strategy, const std::vector<double>& y,
                                const Equilibrium& eq) {
  if (y.empty()) {
    return {};
  }
  ControllerStepper stepper(strategy, eq, y.front());
  ControlledPath out{std::vector<double>(y.size()), std::vector<double>(y.size())};
  for (std::size_t k = 0; k < y.size(); ++k) {
    stepper.step(y[k]);
    out.x[k] = stepper.x();
    out.d[k] = stepper.d();
  }
  return out;
}

std::vector<double> apply_stopper(const StopperStrategy& strategy, const std::vector<double>& x,
                                  const Equilibrium& eq) {
  StopperStepper stepper(strategy, eq);
  std::vector<double> gamma(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) {
    gamma[k] = stepper.step(x[k]);
  }
  return gamma;
}

std::vector<double> gamma_star(const std::vector<double>& x, const Equilibrium& eq) {
  return apply_stopper(StopperStrategy::equilibrium(), x, eq);
}

double belief_from_gamma(double gamma, double p0) {
  if (!(gamma >= 0.0 && gamma <= 1.0)) {
    throw std::invalid_argument("Gamma must lie in [0, 1], got " + std::to_string(gamma));
  }
  if (!(p0 >= 0.0 && p0 <= 1.0)) {
    throw std::invalid_argument("prior must lie in [0, 1], got " + std::to_string(p0));
  }
  if (gamma == 1.0 || p0 == 0.0) {
    return 0.0;
  }
  return p0 * (1.0 - gamma) / (1.0 - p0 * gamma);
}

std::vector<double> belief_from_gamma(const std::vector<double>& gamma, double p0) {
  std::vector<double> pi(gamma.size());
  std::transform(gamma.begin(), gamma.end(), pi.begin(),
                 [p0](double g) { return belief_from_gamma(g, p0); });
  return pi;
}

double gamma_from_belief(double pi, double p0) {
  if (!(p0 > 0.0 && p0 <= 1.0)) {
    throw std::invalid_argument("inverse belief map needs a prior in (0, 1], got " +
                                std::to_string(p0));
  }
  if (!(pi >= 0.0 && pi <= p0)) {
    throw std::invalid_argument("belief must lie in [0, p0], got " + std::to_string(pi));
  }
  if (pi == p0) {
    return 0.0;
  }
  return (p0 - pi) / (p0 * (1.0 - pi));
}

std::vector<double> gamma_from_belief(const std::vector<double>& pi, double p0) {
  std::vector<double> gamma(pi.size());
  std::transform(pi.begin(), pi.end(), gamma.begin(),
                 [p0](double v) { return gamma_from_belief(v, p0); });
  return gamma;
}

std::optional<std::size_t> sample_stop_time(const std::vector<double>& gamma, double u) {
  if (!(u > 0.0 && u < 1.0)) {
    throw std::invalid_argument("stop uniform must lie in (0, 1)");
  }
  for (std::size_t k = 0; k < gamma.size(); ++k) {
    if (gamma[k] > u) {
      return k;
    }
  }
  return std::nullopt;
}

std::vector<double> deviation_stopper_threshold(const std::vector<double>& x, double a) {
  require_level(a, false, "threshold");
  std::vector<double> gamma(x.size());
  bool hit = false;
  for (std::size_t k = 0; k < x.size(); ++k) {
    hit = hit || x[k] >= a;
    gamma[k] = hit ? 1.0 : 0.0;
  }
  return gamma;
}

std::vector<ControllerStrategy> controller_deviation_family(const Equilibrium& eq) {
  const double b = eq.floor();
  const double barrier = eq.barrier();
  std::vector<ControllerStrategy> family;
  for (double level : {0.5 * b, b, 0.5 * (b + barrier), barrier, 1.2 * barrier}) {
    if (level > 0.0) {
      family.push_back(ControllerStrategy::barrier(level));
    }
  }
  family.push_back(ControllerStrategy::immediate());
  return family;
}

std::vector<StopperStrategy> stopper_deviation_family(const Equilibrium& eq) {
  const double b = eq.floor();
  const double barrier = eq.barrier();
  std::vector<StopperStrategy> family;
  for (double level : {0.5 * b, b, 0.5 * (b + barrier), barrier}) {
    if (level > 0.0) {
      family.push_back(StopperStrategy::threshold(level));
    }
  }
  family.push_back(StopperStrategy::never());
  family.push_back(StopperStrategy::immediate());
  return family;
}

}  // namespace definetti
