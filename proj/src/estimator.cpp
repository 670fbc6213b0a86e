#include "pinph/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "pinph/kernels.hpp"
#include "pinph/optimizer.hpp"
#include "pinph/rng.hpp"

namespace pinph {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kBoundaryTol = 1e-6;
constexpr double kTieTol = 1e-10;

// Indices of ParameterSet::to_array() that the optimizer moves.
std::vector<std::size_t> free_indices(HeuristicMode mode) {
    if (mode == HeuristicMode::FixedZero) return {0, 1, 2, 3, 4};
    return {0, 1, 2, 3, 4, 5, 6};
}

ParameterSet apply_mode(ParameterSet p, HeuristicMode mode) {
    if (mode == HeuristicMode::FixedZero) {
        p.eps_bh = 0.0;
        p.eps_sh = 0.0;
    }
    return p;
}

class BoxMap {
public:
    BoxMap(const ParameterBounds& bounds, HeuristicMode mode)
        : upper_(bounds.upper()), free_(free_indices(mode)), mode_(mode) {}

    std::vector<double> to_unit(const ParameterSet& p) const {
        const auto v = p.to_array();
        std::vector<double> u;
        u.reserve(free_.size());
        for (const auto i : free_) u.push_back(std::clamp(v[i] / upper_[i], 0.0, 1.0));
        return u;
    }

    ParameterSet from_unit(std::span<const double> u, const ParameterSet& fixed) const {
        auto v = fixed.to_array();
        for (std::size_t j = 0; j < free_.size(); ++j) v[free_[j]] = u[j] * upper_[free_[j]];
        return apply_mode(ParameterSet::from_array(v), mode_);
    }

private:
    std::array<double, ParameterSet::size> upper_;
    std::vector<std::size_t> free_;
    HeuristicMode mode_;
};

bool better(const LocalResult& a, const LocalResult& incumbent) {
    const double scale = std::max(1.0, std::abs(incumbent.log_likelihood));
    if (a.log_likelihood > incumbent.log_likelihood + kTieTol * scale) return true;
    if (a.log_likelihood < incumbent.log_likelihood - kTieTol * scale) return false;
    if (a.params.mu != incumbent.params.mu) return a.params.mu < incumbent.params.mu;
    return a.params.alpha < incumbent.params.alpha;
}

}  // namespace

bool ParameterBounds::contains(const ParameterSet& p) const noexcept {
    if (!p.valid()) return false;
    const auto v = p.to_array();
    const auto hi = upper();
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (v[i] > hi[i]) return false;
    }
    return true;
}

void EstimatorConfig::validate() const {
    if (n_draws < 1) throw std::invalid_argument("n_draws must be at least 1");
    if (n_refine < 0 || n_refine > n_draws) {
        throw std::invalid_argument("n_refine must lie in [0, n_draws]");
    }
    if (max_iterations < 0) throw std::invalid_argument("max_iterations must be non-negative");
    if (!(rel_tol > 0.0)) throw std::invalid_argument("rel_tol must be positive");
}

ParameterBounds compute_bounds(const EstimationWindow& window) {
    if (window.days.empty()) {
        throw std::invalid_argument("window " + window.asset_id + "/" + window.period_label +
                                    " has no days");
    }
    double buys = 0.0;
    double sells = 0.0;
    for (const auto& d : window.days) {
        buys += static_cast<double>(d.buys);
        sells += static_cast<double>(d.sells);
    }
    const auto n = static_cast<double>(window.days.size());
    ParameterBounds b{buys / n, sells / n, 0.0};
    b.mu_cap = 10.0 * std::max(b.b_bar, b.s_bar);
    if (!(b.b_bar > 0.0 && b.s_bar > 0.0)) {
        throw std::invalid_argument("window " + window.asset_id + "/" + window.period_label +
                                    " has no buys or no sells; rate bounds would be empty");
    }
    return b;
}

std::vector<ParameterSet> draw_candidates(const ParameterBounds& bounds, int n, uint64_t seed) {
    if (n < 1) throw std::invalid_argument("candidate count must be at least 1");
    auto rng = make_engine(seed);
    std::vector<ParameterSet> out;
    out.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        ParameterSet p;
        // Fixed draw order keeps streams comparable across versions.
        p.alpha = uniform01(rng);
        p.delta = uniform01(rng);
        p.mu = uniform(rng, 0.0, bounds.mu_cap);
        p.eps_b = uniform(rng, 0.0, bounds.b_bar);
        p.eps_s = uniform(rng, 0.0, bounds.s_bar);
        p.eps_bh = uniform(rng, 0.0, bounds.b_bar);
        p.eps_sh = uniform(rng, 0.0, bounds.s_bar);
        out.push_back(p);
    }
    return out;
}

uint64_t window_seed(uint64_t master_seed, std::string_view asset_id,
                     std::string_view period_label) noexcept {
    uint64_t h = fnv1a64(asset_id);
    h = fnv1a64("\x1f", h);
    h = fnv1a64(period_label, h);
    return derive_seed(master_seed, h);
}

std::vector<std::string> boundary_flags(const ParameterSet& params, const ParameterBounds& bounds,
                                        HeuristicMode mode) {
    const auto v = params.to_array();
    const auto hi = bounds.upper();
    std::vector<std::string> flags;
    bool alpha_at_zero = false;
    for (const auto i : free_indices(mode)) {
        const double rel = v[i] / hi[i];
        if (rel <= kBoundaryTol || rel >= 1.0 - kBoundaryTol) {
            flags.emplace_back(ParameterSet::names[i]);
            if (i == 0 && rel <= kBoundaryTol) alpha_at_zero = true;
        }
    }
    if (alpha_at_zero && std::find(flags.begin(), flags.end(), "delta") == flags.end()) {
        flags.emplace_back("delta");
    }
    return flags;
}

LocalResult local_optimize(const ParameterSet& start, const PreparedWindow& window,
                           const ParameterBounds& bounds, const EstimatorConfig& config) {
    const ParameterSet origin = apply_mode(start, config.heuristics);
    if (!bounds.contains(origin)) throw std::invalid_argument("start lies outside the bounds");

    const BoxMap map(bounds, config.heuristics);
    const BoxObjective objective = [&](std::span<const double> u) {
        return window.log_likelihood(map.from_unit(u, origin));
    };
    const BoxSearchOptions options{config.max_iterations, config.rel_tol};
    const auto search = maximize_in_unit_box(objective, map.to_unit(origin), options);

    LocalResult r;
    r.iterations = search.iterations;
    r.converged = search.converged;
    if (search.value == kNegInf) {
        r.params = origin;
        r.log_likelihood = kNegInf;
        r.degenerate = true;
        r.converged = false;
        r.boundary_flags = boundary_flags(origin, bounds, config.heuristics);
        return r;
    }
    r.params = map.from_unit(search.point, origin);
    r.log_likelihood = search.value;
    r.boundary_flags = boundary_flags(r.params, bounds, config.heuristics);
    return r;
}

LocalResult local_optimize(const ParameterSet& start, const EstimationWindow& window,
                           const ParameterBounds& bounds, const EstimatorConfig& config) {
    config.validate();
    return local_optimize(start, PreparedWindow(window.days), bounds, config);
}

EstimationResult estimate(const EstimationWindow& window, const EstimatorConfig& config) {
    config.validate();
    const auto label = window.asset_id + "/" + window.period_label;
    const auto bounds = compute_bounds(window);
    const PreparedWindow prepared(window.days);

    auto candidates =
        draw_candidates(bounds, config.n_draws,
                        window_seed(config.master_seed, window.asset_id, window.period_label));
    for (auto& c : candidates) c = apply_mode(c, config.heuristics);
    const auto values = evaluate_candidates(prepared, candidates, config.threads);

    std::vector<std::size_t> order;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (values[i] != kNegInf && !std::isnan(values[i])) order.push_back(i);
    }
    if (order.empty()) {
        throw EstimationError("window " + label + ": all " + std::to_string(values.size()) +
                              " candidates have zero likelihood (some day has trades on a side "
                              "whose arrival rates are all zero)");
    }
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });

    LocalResult best;
    best.params = candidates[order.front()];
    best.log_likelihood = values[order.front()];
    best.boundary_flags = boundary_flags(best.params, bounds, config.heuristics);

    const auto n_refine = std::min<std::size_t>(static_cast<std::size_t>(config.n_refine),
                                                order.size());
    std::vector<ParameterSet> starts;
    starts.reserve(n_refine);
    for (std::size_t i = 0; i < n_refine; ++i) starts.push_back(candidates[order[i]]);
    const auto refined = refine_starts(window, starts, bounds, config);
    if (!refined.empty()) best = refined.front();
    for (std::size_t i = 1; i < refined.size(); ++i) {
        if (better(refined[i], best)) best = refined[i];
    }

    const auto indicators = window.indicators();
    const auto measures = average_pin_ph(best.params, indicators);
    EstimationResult result;
    result.params = best.params;
    result.log_likelihood = window_log_likelihood(best.params, window).value;
    result.pin = measures.pin;
    result.ph = measures.ph;
    result.n_restarts_used = static_cast<int>(n_refine);
    result.converged = !refined.empty() && best.converged;
    result.boundary_flags = best.boundary_flags;
    return result;
}

std::vector<WindowOutcome> estimate_panel(std::span<const EstimationWindow> windows,
                                          const EstimatorConfig& config) {
    config.validate();
    std::vector<WindowOutcome> out(windows.size());
    EstimatorConfig inner = config;
    inner.threads = 1;
    const auto n = static_cast<std::ptrdiff_t>(windows.size());
#ifdef _OPENMP
    const int team = config.threads > 0 ? config.threads : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 1) num_threads(team)
#endif
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        auto& o = out[i];
        o.asset_id = windows[i].asset_id;
        o.period_label = windows[i].period_label;
        try {
            o.result = estimate(windows[i], inner);
        } catch (const std::exception& e) {
            o.error = e.what();
        }
    }
    return out;
}

}  // namespace pinph
