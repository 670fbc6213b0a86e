#pragma once

// Derivative-free maximization over the unit box [0, 1]^d.

#include <functional>
#include <span>
#include <vector>

namespace pinph {

struct BoxSearchOptions {
    int max_iterations{1000};    ///< simplex steps summed over all sweeps
    double rel_tol{1e-8};
    double initial_step{0.05};   ///< simplex edge length in unit-box coordinates
};

struct BoxSearchResult {
    std::vector<double> point;
    double value{0.0};
    bool converged{false};
    int iterations{0};
    int sweeps{0};
};

using BoxObjective = std::function<double(std::span<const double>)>;

/// Maps a coordinate back into [0, 1] by mirroring at the nearest face.
double reflect_into_unit(double x) noexcept;

/// Nelder-Mead maximization with proposals reflected into the box. Each sweep
/// is one simplex run; a new sweep restarts from the incumbent until a sweep
/// improves the objective by less than rel_tol relative. The returned value is
/// never below the start's. A start evaluating to -inf, or a zero iteration
/// budget, returns the start unchanged.
BoxSearchResult maximize_in_unit_box(const BoxObjective& objective, std::vector<double> start,
                                     const BoxSearchOptions& options);

}  // namespace pinph
