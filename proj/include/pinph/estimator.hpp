#pragma once

// Monte-Carlo multistart maximum likelihood for one estimation window.

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "pinph/model.hpp"

namespace pinph {

class EstimationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Box for candidate draws and local search: eps_b, eps_bh in [0, b_bar];
/// eps_s, eps_sh in [0, s_bar]; mu in [0, mu_cap]; alpha, delta in [0, 1].
struct ParameterBounds {
    double b_bar{1.0};
    double s_bar{1.0};
    double mu_cap{10.0};

    std::array<double, ParameterSet::size> upper() const noexcept {
        return {1.0, 1.0, mu_cap, b_bar, s_bar, b_bar, s_bar};
    }
    bool contains(const ParameterSet& p) const noexcept;
};

enum class HeuristicMode {
    Free,       ///< all seven parameters estimated
    FixedZero,  ///< eps_bh = eps_sh = 0, the classical five-parameter model
};

struct EstimatorConfig {
    int n_draws{10000};
    int n_refine{50};  ///< 0 keeps the best raw draw
    int max_iterations{1000};
    double rel_tol{1e-8};
    uint64_t master_seed{0};
    int threads{0};  ///< 0 = OpenMP default; never changes results
    HeuristicMode heuristics{HeuristicMode::Free};

    void validate() const;
};

ParameterBounds compute_bounds(const EstimationWindow& window);

/// Independent uniform draws over the box, deterministic in `seed`. A longer
/// draw shares its prefix with a shorter one under the same seed.
std::vector<ParameterSet> draw_candidates(const ParameterBounds& bounds, int n, uint64_t seed);

/// Seed for one window: master seed mixed with a stable hash of the window's
/// asset and period, so panel composition never changes a result.
uint64_t window_seed(uint64_t master_seed, std::string_view asset_id,
                     std::string_view period_label) noexcept;

struct LocalResult {
    ParameterSet params;
    double log_likelihood{0.0};
    bool converged{false};
    bool degenerate{false};
    int iterations{0};
    std::vector<std::string> boundary_flags;
};

/// Parameters within 1e-6 of a box face (in box-relative units) are flagged
/// by name; "delta" is also flagged when alpha sits at 0 since it is then
/// unidentified. Fixed parameters are never flagged.
std::vector<std::string> boundary_flags(const ParameterSet& params, const ParameterBounds& bounds,
                                        HeuristicMode mode);

LocalResult local_optimize(const ParameterSet& start, const EstimationWindow& window,
                           const ParameterBounds& bounds, const EstimatorConfig& config);

EstimationResult estimate(const EstimationWindow& window, const EstimatorConfig& config);

struct WindowOutcome {
    std::string asset_id;
    std::string period_label;
    std::optional<EstimationResult> result;
    std::string error;  ///< set when result is empty
};

/// Estimates every window; failures are recorded per window.
std::vector<WindowOutcome> estimate_panel(std::span<const EstimationWindow> windows,
                                          const EstimatorConfig& config);

}  // namespace pinph
