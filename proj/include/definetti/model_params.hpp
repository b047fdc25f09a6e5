#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace definetti {

/// Drift, volatility and discount rate of the resource process
/// Y_t = x + mu t + sigma W_t. All three must be strictly positive.
struct ModelParams {
  double mu = 0.03;
  double sigma = 0.12;
  double r = 0.01;

  void validate() const {
    auto check = [](double value, const char* name) {
      if (!std::isfinite(value) || value <= 0.0) {
        throw std::invalid_argument(std::string("model parameter ") + name +
                                    " must be finite and > 0, got " +
                                    std::to_string(value));
      }
    };
    check(mu, "mu");
    check(sigma, "sigma");
    check(r, "r");
  }
};

}  // namespace definetti
