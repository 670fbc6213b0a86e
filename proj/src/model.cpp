#include "pinph/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace pinph {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

bool finite_nonneg(double v) noexcept { return std::isfinite(v) && v >= 0.0; }

double log_weight(double w) noexcept { return w > 0.0 ? std::log(w) : kNegInf; }

double log_sum_exp3(double a, double b, double c) noexcept {
    const double m = std::max({a, b, c});
    if (m == kNegInf) return kNegInf;
    return m + std::log(std::exp(a - m) + std::exp(b - m) + std::exp(c - m));
}

double denominator(const ParameterSet& p, Indicator indicator) {
    const auto h = heuristic_rates(p, indicator);
    const double d = p.alpha * p.mu + p.eps_b + p.eps_s + h.buy + h.sell;
    if (!(d > 0.0)) {
        throw InvalidParameters("all arrival rates are zero; PIN and PH are undefined");
    }
    return d;
}

}  // namespace

Indicator indicator_from_int(int value) {
    if (value == 1) return Indicator::Up;
    if (value == -1) return Indicator::Down;
    throw std::invalid_argument("indicator must be +1 or -1, got " + std::to_string(value));
}

Indicator indicator_from_return(double market_return) noexcept {
    return market_return >= 0.0 ? Indicator::Up : Indicator::Down;
}

bool ParameterSet::valid() const noexcept {
    return alpha >= 0.0 && alpha <= 1.0 && delta >= 0.0 && delta <= 1.0 && finite_nonneg(mu) &&
           finite_nonneg(eps_b) && finite_nonneg(eps_s) && finite_nonneg(eps_bh) &&
           finite_nonneg(eps_sh);
}

void ParameterSet::validate() const {
    const auto v = to_array();
    for (std::size_t i = 0; i < size; ++i) {
        const bool probability = i < 2;
        const bool ok = probability ? (v[i] >= 0.0 && v[i] <= 1.0) : finite_nonneg(v[i]);
        if (!ok) {
            throw InvalidParameters(std::string(names[i]) + " = " + std::to_string(v[i]) +
                                    (probability ? " is outside [0, 1]"
                                                 : " must be finite and non-negative"));
        }
    }
}

std::vector<Indicator> EstimationWindow::indicators() const {
    std::vector<Indicator> out;
    out.reserve(days.size());
    for (const auto& d : days) out.push_back(d.indicator);
    return out;
}

HeuristicRates heuristic_rates(const ParameterSet& params, Indicator indicator) noexcept {
    if (indicator == Indicator::Down) return {params.eps_bh, 0.0};
    return {0.0, params.eps_sh};
}

HeuristicRates heuristic_rates(const ParameterSet& params, int indicator) {
    return heuristic_rates(params, indicator_from_int(indicator));
}

double log_poisson_pmf(int64_t k, double lambda) noexcept {
    if (lambda == 0.0) return k == 0 ? 0.0 : kNegInf;
    const double kd = static_cast<double>(k);
    return kd * std::log(lambda) - lambda - std::lgamma(kd + 1.0);
}

LogLikelihood daily_log_likelihood(const ParameterSet& params, const DailyCounts& day) {
    if (day.buys < 0 || day.sells < 0) {
        throw std::invalid_argument("daily counts must be non-negative");
    }
    const auto h = heuristic_rates(params, day.indicator);
    const double lambda_b = params.eps_b + h.buy;
    const double lambda_s = params.eps_s + h.sell;

    const double buys_quiet = log_poisson_pmf(day.buys, lambda_b);
    const double sells_quiet = log_poisson_pmf(day.sells, lambda_s);
    const double buys_good = log_poisson_pmf(day.buys, params.mu + lambda_b);
    const double sells_bad = log_poisson_pmf(day.sells, params.mu + lambda_s);

    const double w_none = log_weight(1.0 - params.alpha);
    const double w_bad = log_weight(params.alpha * params.delta);
    const double w_good = log_weight(params.alpha * (1.0 - params.delta));

    // A zero weight drops its branch before the poisoned sum -inf + finite.
    const double none = w_none == kNegInf ? kNegInf : w_none + buys_quiet + sells_quiet;
    const double bad = w_bad == kNegInf ? kNegInf : w_bad + buys_quiet + sells_bad;
    const double good = w_good == kNegInf ? kNegInf : w_good + buys_good + sells_quiet;

    const double value = log_sum_exp3(none, bad, good);
    return {value, value == kNegInf};
}

LogLikelihood window_log_likelihood(const ParameterSet& params,
                                    std::span<const DailyCounts> days) {
    if (days.empty()) throw std::invalid_argument("estimation window has no days");
    double total = 0.0;
    for (const auto& day : days) {
        const auto ll = daily_log_likelihood(params, day);
        if (ll.degenerate) return {kNegInf, true};
        total += ll.value;
    }
    return {total, false};
}

LogLikelihood window_log_likelihood(const ParameterSet& params, const EstimationWindow& window) {
    return window_log_likelihood(params, std::span<const DailyCounts>(window.days));
}

double daily_pin(const ParameterSet& params, Indicator indicator) {
    return params.alpha * params.mu / denominator(params, indicator);
}

double daily_ph(const ParameterSet& params, Indicator indicator) {
    const auto h = heuristic_rates(params, indicator);
    return (h.buy + h.sell) / denominator(params, indicator);
}

PinPh average_pin_ph(const ParameterSet& params, std::span<const Indicator> indicators) {
    if (indicators.empty()) throw std::invalid_argument("indicator sequence is empty");
    double pin = 0.0;
    double ph = 0.0;
    for (const auto i : indicators) {
        pin += daily_pin(params, i);
        ph += daily_ph(params, i);
    }
    const auto n = static_cast<double>(indicators.size());
    return {pin / n, ph / n};
}

}  // namespace pinph
