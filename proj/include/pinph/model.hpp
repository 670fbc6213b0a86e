#pragma once

// Three-class Poisson mixture for daily buy/sell counts: uninformed,
// informed and contrarian (heuristic-driven) order flow.

#include <array>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace pinph {

/// Sign of the previous day's market return. Up covers r >= 0.
enum class Indicator : int8_t { Down = -1, Up = 1 };

Indicator indicator_from_int(int value);
Indicator indicator_from_return(double market_return) noexcept;
inline int to_int(Indicator i) noexcept { return static_cast<int>(i); }

class InvalidParameters : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct ParameterSet {
    double alpha{0.0};   ///< probability of an information event
    double delta{0.0};   ///< probability the event is bad news
    double mu{0.0};      ///< informed arrival rate
    double eps_b{0.0};   ///< uninformed buy rate
    double eps_s{0.0};   ///< uninformed sell rate
    double eps_bh{0.0};  ///< heuristic buy rate, active after a down day
    double eps_sh{0.0};  ///< heuristic sell rate, active after an up day

    static constexpr std::size_t size = 7;
    static constexpr std::array<std::string_view, size> names{
        "alpha", "delta", "mu", "eps_b", "eps_s", "eps_bh", "eps_sh"};

    std::array<double, size> to_array() const noexcept {
        return {alpha, delta, mu, eps_b, eps_s, eps_bh, eps_sh};
    }
    static ParameterSet from_array(const std::array<double, size>& v) noexcept {
        return {v[0], v[1], v[2], v[3], v[4], v[5], v[6]};
    }

    bool valid() const noexcept;
    /// Throws InvalidParameters naming the first offending field.
    void validate() const;

    friend bool operator==(const ParameterSet&, const ParameterSet&) = default;
};

struct DailyCounts {
    int64_t buys{0};
    int64_t sells{0};
    Indicator indicator{Indicator::Up};

    friend bool operator==(const DailyCounts&, const DailyCounts&) = default;
};

struct EstimationWindow {
    std::string asset_id;
    std::string period_label;
    std::vector<DailyCounts> days;

    std::vector<Indicator> indicators() const;
};

/// Natural-log likelihood. `degenerate` marks a value of -inf caused by
/// every mixture branch having probability exactly zero.
struct LogLikelihood {
    double value{0.0};
    bool degenerate{false};
};

struct HeuristicRates {
    double buy{0.0};
    double sell{0.0};
};

struct PinPh {
    double pin{0.0};
    double ph{0.0};
};

struct EstimationResult {
    ParameterSet params;
    double log_likelihood{-std::numeric_limits<double>::infinity()};
    double pin{0.0};
    double ph{0.0};
    int n_restarts_used{0};
    bool converged{false};
    std::vector<std::string> boundary_flags;
};

/// Exactly one heuristic rate is active per day: buys after a down day,
/// sells after an up day.
HeuristicRates heuristic_rates(const ParameterSet& params, Indicator indicator) noexcept;
HeuristicRates heuristic_rates(const ParameterSet& params, int indicator);

/// log Pois(k; lambda), with log Pois(0; 0) = 0 and log Pois(k > 0; 0) = -inf.
double log_poisson_pmf(int64_t k, double lambda) noexcept;

/// Log of the three-branch daily mixture likelihood, evaluated with
/// log-gamma factorials and a max-anchored log-sum-exp.
LogLikelihood daily_log_likelihood(const ParameterSet& params, const DailyCounts& day);

/// Sum of daily log-likelihoods in day order.
LogLikelihood window_log_likelihood(const ParameterSet& params,
                                    std::span<const DailyCounts> days);
LogLikelihood window_log_likelihood(const ParameterSet& params,
                                    const EstimationWindow& window);

double daily_pin(const ParameterSet& params, Indicator indicator);
double daily_ph(const ParameterSet& params, Indicator indicator);

/// Day-averaged PIN and PH over an indicator sequence.
PinPh average_pin_ph(const ParameterSet& params, std::span<const Indicator> indicators);

}  // namespace pinph
