#include "pinph/simulator.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace pinph {

namespace {

int64_t poisson_draw(double lambda, Engine& rng) {
    if (lambda <= 0.0) return 0;
    std::poisson_distribution<int64_t> dist(lambda);
    return dist(rng);
}

long double pmf_closed_form(int64_t k, long double lambda) {
    if (lambda == 0.0L) return k == 0 ? 1.0L : 0.0L;
    long double factorial = 1.0L;
    for (int64_t i = 2; i <= k; ++i) factorial *= static_cast<long double>(i);
    const long double power = std::pow(lambda, static_cast<long double>(k));
    const long double decay = std::exp(-lambda);
    const long double value = power * decay / factorial;
    if (!std::isfinite(power) || decay == 0.0L || !std::isnormal(value)) return -1.0L;
    return value;
}

long double log_pmf_long(int64_t k, long double lambda) {
    if (lambda == 0.0L) {
        return k == 0 ? 0.0L : -std::numeric_limits<long double>::infinity();
    }
    const auto kl = static_cast<long double>(k);
    return kl * std::log(lambda) - lambda - std::lgamma(kl + 1.0L);
}

}  // namespace

void SimulationSpec::validate() const {
    params.validate();
    if (n_days < 1) throw std::invalid_argument("n_days must be at least 1");
    if (!indicators.empty() && indicators.size() < static_cast<std::size_t>(n_days)) {
        throw std::invalid_argument("indicator sequence shorter than n_days");
    }
}

DailyCounts simulate_day(const ParameterSet& p, Indicator indicator, Engine& rng) {
    const bool event = uniform01(rng) < p.alpha;
    const bool bad = event && uniform01(rng) < p.delta;
    const bool good = event && !bad;
    const auto h = heuristic_rates(p, indicator);
    DailyCounts day;
    day.indicator = indicator;
    day.buys = poisson_draw(p.eps_b + h.buy + (good ? p.mu : 0.0), rng);
    day.sells = poisson_draw(p.eps_s + h.sell + (bad ? p.mu : 0.0), rng);
    return day;
}

std::vector<Indicator> random_indicators(int n, uint64_t seed) {
    auto rng = make_engine(seed);
    std::vector<Indicator> out;
    out.reserve(static_cast<std::size_t>(std::max(n, 0)));
    for (int i = 0; i < n; ++i) {
        out.push_back(uniform01(rng) < 0.5 ? Indicator::Up : Indicator::Down);
    }
    return out;
}

EstimationWindow simulate_window(const SimulationSpec& spec) {
    spec.validate();
    const auto indicators = spec.indicators.empty()
                                ? random_indicators(spec.n_days, derive_seed(spec.seed, ~0ULL))
                                : spec.indicators;
    EstimationWindow w{spec.asset_id, spec.period_label, {}};
    w.days.resize(static_cast<std::size_t>(spec.n_days));
#pragma omp parallel for schedule(static) if (spec.n_days > 4096)
    for (int t = 0; t < spec.n_days; ++t) {
        auto rng = make_engine(derive_seed(spec.seed, static_cast<uint64_t>(t)));
        w.days[static_cast<std::size_t>(t)] =
            simulate_day(spec.params, indicators[static_cast<std::size_t>(t)], rng);
    }
    return w;
}

long double brute_force_day_probability(const ParameterSet& p, const DailyCounts& day) {
    p.validate();
    if (day.buys < 0 || day.sells < 0) throw std::invalid_argument("negative daily count");
    if (day.buys > kOracleMaxCount || day.sells > kOracleMaxCount) {
        throw std::out_of_range("oracle supports counts up to " +
                                std::to_string(kOracleMaxCount));
    }
    const auto h = heuristic_rates(p, day.indicator);
    const long double lb = static_cast<long double>(p.eps_b) + h.buy;
    const long double ls = static_cast<long double>(p.eps_s) + h.sell;
    const long double mu = p.mu;
    const long double alpha = p.alpha;
    const long double delta = p.delta;

    const long double weights[3] = {1.0L - alpha, alpha * delta, alpha * (1.0L - delta)};
    const long double buy_rates[3] = {lb, lb, mu + lb};
    const long double sell_rates[3] = {ls, mu + ls, ls};

    long double total = 0.0L;
    for (int branch = 0; branch < 3; ++branch) {
        if (weights[branch] == 0.0L) continue;
        const long double pb = pmf_closed_form(day.buys, buy_rates[branch]);
        const long double ps = pmf_closed_form(day.sells, sell_rates[branch]);
        if (pb >= 0.0L && ps >= 0.0L) {
            total += weights[branch] * pb * ps;
        } else {
            total += std::exp(std::log(weights[branch]) + log_pmf_long(day.buys, buy_rates[branch]) +
                              log_pmf_long(day.sells, sell_rates[branch]));
        }
    }
    return total;
}

}  // namespace pinph
