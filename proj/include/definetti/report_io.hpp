#pragma once

#include <ostream>
#include <string>

#include <json.hpp>

#include "definetti/closed_form.hpp"
#include "definetti/game.hpp"
#include "definetti/verify.hpp"

namespace definetti {

using Json = nlohmann::ordered_json;

/// %.17g, the CSV convention.
std::string format_decimal(double value);

Json to_json(const ModelParams& params);
Json to_json(const TimeGrid& grid);

/// mu, sigma, r, zeta1, zeta2, B, p_hat.
Json closed_form_summary(const ClosedForm& cf);

/// One Monte Carlo estimate with the game and the model that produced it.
Json estimate_json(const McEstimate& estimate, Payoff payoff, const GameSpec& spec,
                   const GameSetup& setup);

/// Every outcome of a run in path order. Two runs serialize to the same
/// bytes exactly when all their outcomes agree bit for bit.
Json outcomes_json(const McRun& run);

Json to_json(const Check& check);
Json to_json(const VerificationReport& report);

/// Fixed-width table with one line per check and a PASS/FAIL summary.
void write_table(const VerificationReport& report, std::ostream& out);

}  // namespace definetti
