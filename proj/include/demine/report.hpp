#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <json.hpp>

#include "demine/bounds.hpp"
#include "demine/confidence.hpp"
#include "demine/critic.hpp"

namespace demine {

// Result of one estimator run. Estimators without a valid confidence
// interval (KSG, MINE-f-ES) leave epsilon and significance empty.
struct EstimateReport {
    std::string method;
    std::optional<BoundKind> bound_kind;
    double point_estimate = 0.0;
    std::optional<double> epsilon;
    double delta = 0.05;
    std::size_t n_val = 0;
    std::size_t n_train = 0;
    std::optional<ScoreRange> range;
    std::optional<Significance> significance;
    std::uint64_t seed = 0;
    double wall_time = 0.0; // seconds; only serialized on request

    // Looser/tighter bounds on the same validation scores, for comparison.
    std::optional<double> mine_bound;
    std::optional<double> eb1_bound;

    nlohmann::json settings = nlohmann::json::object();
};

// MINE-f estimates from scores in [L, U] lie in [L - e^U + 1, U - e^L + 1].
ScoreRange mine_f_estimate_range(ScoreRange scores);

// Checks the type invariants; throws InputError describing the first violation.
void validate(const EstimateReport& r);

nlohmann::json to_json(const EstimateReport& r, bool include_timing = false);
EstimateReport report_from_json(const nlohmann::json& j);

// Flat checkpoint record: encoder dims, M, t and the parameter vector.
nlohmann::json to_json(const Critic& c);
Critic critic_from_json(const nlohmann::json& j);

} // namespace demine
