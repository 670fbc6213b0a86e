#include <cmath>
#include <map>
#include <stdexcept>

#include "doctest.h"
#include "pinph/simulator.hpp"

using namespace pinph;

TEST_CASE("brute-force oracle closed forms") {
    const ParameterSet quiet{0.0, 0.5, 9.0, 2.0, 3.0, 0.0, 0.0};
    CHECK(static_cast<double>(brute_force_day_probability(quiet, {2, 3, Indicator::Up})) ==
          doctest::Approx(0.06064152299176921).epsilon(1e-14));
    const ParameterSet all_news{1.0, 1.0, 5.0, 1.0, 1.0, 0.0, 0.0};
    CHECK(static_cast<double>(brute_force_day_probability(all_news, {0, 0, Indicator::Up})) ==
          doctest::Approx(9.118819655545162e-4).epsilon(1e-14));
    CHECK_THROWS_AS(brute_force_day_probability(quiet, {201, 0, Indicator::Up}), std::out_of_range);
    CHECK_NOTHROW(brute_force_day_probability(quiet, {200, 200, Indicator::Up}));
    const ParameterSet big{0.5, 0.5, 400.0, 300.0, 350.0, 50.0, 40.0};
    const double p = static_cast<double>(brute_force_day_probability(big, {200, 200, Indicator::Down}));
    CHECK(p > 0.0);
    CHECK(std::log(p) == doctest::Approx(daily_log_likelihood(big, {200, 200, Indicator::Down}).value).epsilon(1e-12));
}

TEST_CASE("oracle matches the log-space likelihood on a random grid") {
    Engine rng = make_engine(123);
    for (int trial = 0; trial < 100; ++trial) {
        const ParameterSet p{uniform01(rng), uniform01(rng), uniform(rng, 0, 10), uniform(rng, 0, 10),
                             uniform(rng, 0, 10), uniform(rng, 0, 10), uniform(rng, 0, 10)};
        for (int64_t b = 0; b <= 30; b += 5) {
            for (int64_t s = 0; s <= 30; s += 5) {
                const DailyCounts day{b, s, trial % 2 ? Indicator::Up : Indicator::Down};
                const double oracle = static_cast<double>(brute_force_day_probability(p, day));
                const double model = std::exp(daily_log_likelihood(p, day).value);
                CHECK(std::abs(model - oracle) <= 1e-12 * oracle);
            }
        }
    }
}

TEST_CASE("simulation worked examples") {
    SimulationSpec spec;
    spec.params = {0.0, 0.5, 7.0, 0.0, 0.0, 0.0, 0.0};
    spec.n_days = 500;
    spec.seed = 1;
    for (const auto& d : simulate_window(spec).days) {
        CHECK(d.buys == 0);
        CHECK(d.sells == 0);
    }

    spec.params = {1.0, 1.0, 1000.0, 1e-3, 1e-3, 0.0, 0.0};
    spec.n_days = 10000;
    double mean_gap = 0.0;
    for (const auto& d : simulate_window(spec).days) mean_gap += static_cast<double>(d.sells - d.buys);
    mean_gap /= spec.n_days;
    CHECK(std::abs(mean_gap - 1000.0) <= 50.0);

    spec.n_days = 1;
    CHECK(simulate_window(spec).days.size() == 1);
}

TEST_CASE("simulation is deterministic and gated by the indicator") {
    SimulationSpec spec;
    spec.params = {0.3, 0.4, 20.0, 10.0, 12.0, 5.0, 6.0};
    spec.n_days = 300;
    spec.seed = 42;
    const auto a = simulate_window(spec);
    const auto b = simulate_window(spec);
    REQUIRE(a.days.size() == b.days.size());
    bool same = true;
    for (std::size_t i = 0; i < a.days.size(); ++i) {
        same = same && a.days[i].buys == b.days[i].buys && a.days[i].sells == b.days[i].sells &&
               a.days[i].indicator == b.days[i].indicator;
    }
    CHECK(same);

    // Down days: the seller heuristic is inactive, so sells are unchanged by eps_sh.
    spec.indicators.assign(spec.n_days, Indicator::Down);
    const auto base = simulate_window(spec);
    spec.params.eps_sh = 1e6;
    const auto huge = simulate_window(spec);
    for (std::size_t i = 0; i < base.days.size(); ++i) CHECK(base.days[i].sells == huge.days[i].sells);

    spec.n_days = 0;
    CHECK_THROWS_AS(simulate_window(spec), std::invalid_argument);
    spec.n_days = 400;
    CHECK_THROWS_AS(simulate_window(spec), std::invalid_argument);
    spec.n_days = 10;
    spec.params.alpha = -0.1;
    CHECK_THROWS_AS(simulate_window(spec), InvalidParameters);
}

TEST_CASE("random indicators are balanced and reproducible") {
    const auto a = random_indicators(20000, 7);
    CHECK(a == random_indicators(20000, 7));
    int ups = 0;
    for (auto i : a) ups += i == Indicator::Up;
    CHECK(std::abs(ups / 20000.0 - 0.5) < 0.02);
}

TEST_CASE("property: empirical pmf matches the likelihood") {
    const ParameterSet p{0.5, 0.5, 5.0, 3.0, 3.0, 2.0, 2.0};
    for (const auto ind : {Indicator::Down, Indicator::Up}) {
        SimulationSpec spec;
        spec.params = p;
        spec.n_days = 1000000;
        spec.seed = ind == Indicator::Up ? 1001 : 2002;
        spec.indicators.assign(spec.n_days, ind);
        std::map<std::pair<int64_t, int64_t>, double> freq;
        for (const auto& d : simulate_window(spec).days) freq[{d.buys, d.sells}] += 1.0;
        double worst = 0.0;
        for (int64_t b = 0; b <= 40; ++b) {
            for (int64_t s = 0; s <= 40; ++s) {
                const double expected = std::exp(daily_log_likelihood(p, {b, s, ind}).value);
                const auto it = freq.find({b, s});
                const double observed = it == freq.end() ? 0.0 : it->second / spec.n_days;
                worst = std::max(worst, std::abs(observed - expected));
            }
        }
        CHECK(worst < 3e-3);
    }
}

TEST_CASE("property: buy-sell covariance matches the mixture") {
    const ParameterSet p{0.5, 0.3, 8.0, 4.0, 5.0, 3.0, 2.0};
    SimulationSpec spec;
    spec.params = p;
    spec.n_days = 400000;
    spec.seed = 55;
    spec.indicators.assign(spec.n_days, Indicator::Up);
    double sb = 0, ss = 0, sbs = 0;
    for (const auto& d : simulate_window(spec).days) {
        sb += d.buys;
        ss += d.sells;
        sbs += static_cast<double>(d.buys) * d.sells;
    }
    const double n = spec.n_days;
    const double cov = sbs / n - (sb / n) * (ss / n);
    // Per branch means (buy, sell): none (4, 7), bad (4, 15), good (12, 7).
    const double w[3] = {0.5, 0.15, 0.35};
    const double mb[3] = {4, 4, 12};
    const double ms[3] = {7, 15, 7};
    double eb = 0, es = 0, ebs = 0;
    for (int k = 0; k < 3; ++k) {
        eb += w[k] * mb[k];
        es += w[k] * ms[k];
        ebs += w[k] * mb[k] * ms[k];
    }
    const double implied = ebs - eb * es;
    CHECK(std::abs(cov - implied) < 0.15);
}
