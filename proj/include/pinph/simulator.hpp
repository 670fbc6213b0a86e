#pragma once

// Data-generating process of the mixture model and a brute-force likelihood
// used to check the log-space implementation.

#include <cstdint>
#include <vector>

#include "pinph/model.hpp"
#include "pinph/rng.hpp"

namespace pinph {

struct SimulationSpec {
    ParameterSet params;
    std::vector<Indicator> indicators;  ///< empty: i.i.d. +/-1 with P(+1) = 0.5
    int n_days{0};
    uint64_t seed{0};
    std::string asset_id{"SIM"};
    std::string period_label{"sim"};

    void validate() const;
};

/// One day: information event with probability alpha, bad news with
/// probability delta, then independent Poisson buy and sell counts.
DailyCounts simulate_day(const ParameterSet& params, Indicator indicator, Engine& rng);

/// Draws i.i.d. indicators with P(Up) = 0.5.
std::vector<Indicator> random_indicators(int n, uint64_t seed);

/// Days use per-day substreams derived from spec.seed, so the output does not
/// depend on how days are scheduled.
EstimationWindow simulate_window(const SimulationSpec& spec);

/// Oracle scale limit for brute_force_day_probability.
inline constexpr int64_t kOracleMaxCount = 200;

/// Weighted sum of the three branch products of Poisson pmfs, each pmf from
/// the closed form lambda^k e^-lambda / k! in long double. Falls back to
/// per-branch log-space evaluation when the closed form leaves the range of
/// long double. Rejects counts above kOracleMaxCount.
long double brute_force_day_probability(const ParameterSet& params, const DailyCounts& day);

}  // namespace pinph
