#include "pinph/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace pinph {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double safe_log(double x) noexcept { return x > 0.0 ? std::log(x) : kNegInf; }

// k log(lambda) - lambda without the factorial, with 0 * log(0) read as 0.
double poisson_kernel(double k, double lambda, double log_lambda) noexcept {
    return k == 0.0 ? -lambda : k * log_lambda - lambda;
}

struct RegimeTerms {
    double lambda_b, log_b, lambda_bg, log_bg;
    double lambda_s, log_s, lambda_sb, log_sb;
};

RegimeTerms regime_terms(const ParameterSet& p, Indicator indicator) noexcept {
    const auto h = heuristic_rates(p, indicator);
    RegimeTerms t{};
    t.lambda_b = p.eps_b + h.buy;
    t.lambda_bg = p.mu + t.lambda_b;
    t.lambda_s = p.eps_s + h.sell;
    t.lambda_sb = p.mu + t.lambda_s;
    t.log_b = safe_log(t.lambda_b);
    t.log_bg = safe_log(t.lambda_bg);
    t.log_s = safe_log(t.lambda_s);
    t.log_sb = safe_log(t.lambda_sb);
    return t;
}

}  // namespace

PreparedWindow::PreparedWindow(std::span<const DailyCounts> days) {
    if (days.empty()) throw std::invalid_argument("estimation window has no days");
    buys_.reserve(days.size());
    sells_.reserve(days.size());
    down_.reserve(days.size());
    for (const auto& d : days) {
        if (d.buys < 0 || d.sells < 0) throw std::invalid_argument("negative daily count");
        const double b = static_cast<double>(d.buys);
        const double s = static_cast<double>(d.sells);
        buys_.push_back(b);
        sells_.push_back(s);
        down_.push_back(d.indicator == Indicator::Down ? 1 : 0);
        log_factorials_ += std::lgamma(b + 1.0) + std::lgamma(s + 1.0);
    }
}

double PreparedWindow::log_likelihood(const ParameterSet& p) const noexcept {
    const double w_none = safe_log(1.0 - p.alpha);
    const double w_bad = safe_log(p.alpha * p.delta);
    const double w_good = safe_log(p.alpha * (1.0 - p.delta));
    const RegimeTerms regimes[2] = {regime_terms(p, Indicator::Up),
                                    regime_terms(p, Indicator::Down)};

    double total = 0.0;
    for (std::size_t i = 0; i < buys_.size(); ++i) {
        const RegimeTerms& t = regimes[down_[i]];
        const double b = buys_[i];
        const double s = sells_[i];
        const double qb = poisson_kernel(b, t.lambda_b, t.log_b);
        const double qs = poisson_kernel(s, t.lambda_s, t.log_s);
        const double none = w_none == kNegInf ? kNegInf : w_none + qb + qs;
        const double bad =
            w_bad == kNegInf ? kNegInf : w_bad + qb + poisson_kernel(s, t.lambda_sb, t.log_sb);
        const double good =
            w_good == kNegInf ? kNegInf : w_good + poisson_kernel(b, t.lambda_bg, t.log_bg) + qs;
        const double m = std::max({none, bad, good});
        if (m == kNegInf) return kNegInf;
        total += m + std::log(std::exp(none - m) + std::exp(bad - m) + std::exp(good - m));
    }
    return total - log_factorials_;
}

std::vector<double> evaluate_candidates_serial(const PreparedWindow& window,
                                               std::span<const ParameterSet> candidates) {
    std::vector<double> out(candidates.size());
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        out[i] = window.log_likelihood(candidates[i]);
    }
    return out;
}

std::vector<double> evaluate_candidates(const PreparedWindow& window,
                                        std::span<const ParameterSet> candidates, int threads) {
    std::vector<double> out(candidates.size());
    const auto n = static_cast<std::ptrdiff_t>(candidates.size());
#ifdef _OPENMP
    const int team = threads > 0 ? threads : omp_get_max_threads();
#pragma omp parallel for schedule(static) num_threads(team)
#endif
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        out[i] = window.log_likelihood(candidates[i]);
    }
    (void)threads;
    return out;
}

std::vector<LocalResult> refine_starts_serial(const EstimationWindow& window,
                                              std::span<const ParameterSet> starts,
                                              const ParameterBounds& bounds,
                                              const EstimatorConfig& config) {
    const PreparedWindow prepared(window.days);
    std::vector<LocalResult> out;
    out.reserve(starts.size());
    for (const auto& s : starts) out.push_back(local_optimize(s, prepared, bounds, config));
    return out;
}

std::vector<LocalResult> refine_starts(const EstimationWindow& window,
                                       std::span<const ParameterSet> starts,
                                       const ParameterBounds& bounds,
                                       const EstimatorConfig& config) {
    const PreparedWindow prepared(window.days);
    std::vector<LocalResult> out(starts.size());
    const auto n = static_cast<std::ptrdiff_t>(starts.size());
#ifdef _OPENMP
    const int team = config.threads > 0 ? config.threads : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 1) num_threads(team)
#endif
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        out[i] = local_optimize(starts[i], prepared, bounds, config);
    }
    return out;
}

}  // namespace pinph
