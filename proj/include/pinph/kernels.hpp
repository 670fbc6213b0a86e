#pragma once

// Hot loops of the estimator. Each OpenMP kernel has a serial reference
// that must produce bit-identical output.

#include <span>
#include <vector>

#include "pinph/estimator.hpp"
#include "pinph/model.hpp"

namespace pinph {

/// Window stored column-wise with the log-factorial constant folded out, so a
/// likelihood evaluation needs eight logarithms regardless of window length.
class PreparedWindow {
public:
    explicit PreparedWindow(std::span<const DailyCounts> days);

    /// Window log-likelihood; -inf when any day is degenerate.
    double log_likelihood(const ParameterSet& params) const noexcept;

    std::size_t size() const noexcept { return buys_.size(); }

private:
    std::vector<double> buys_;
    std::vector<double> sells_;
    std::vector<unsigned char> down_;
    double log_factorials_{0.0};
};

/// Local search against an already prepared window.
LocalResult local_optimize(const ParameterSet& start, const PreparedWindow& window,
                           const ParameterBounds& bounds, const EstimatorConfig& config);

std::vector<double> evaluate_candidates_serial(const PreparedWindow& window,
                                               std::span<const ParameterSet> candidates);

/// threads <= 0 uses the OpenMP default team size.
std::vector<double> evaluate_candidates(const PreparedWindow& window,
                                        std::span<const ParameterSet> candidates,
                                        int threads = 0);

std::vector<LocalResult> refine_starts_serial(const EstimationWindow& window,
                                              std::span<const ParameterSet> starts,
                                              const ParameterBounds& bounds,
                                              const EstimatorConfig& config);

std::vector<LocalResult> refine_starts(const EstimationWindow& window,
                                       std::span<const ParameterSet> starts,
                                       const ParameterBounds& bounds,
                                       const EstimatorConfig& config);

}  // namespace pinph
