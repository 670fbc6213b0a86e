#include "pinph/recovery.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "pinph/rng.hpp"
#include "pinph/simulator.hpp"
#include "pinph/stats.hpp"

namespace pinph {

double RecoveryReplicate::pin_error() const noexcept { return std::abs(estimate.pin - true_pin); }
double RecoveryReplicate::ph_error() const noexcept { return std::abs(estimate.ph - true_ph); }

namespace {

ErrorQuantiles quantiles(const std::vector<double>& v) {
    return {stats::percentile(v, 0.5), stats::percentile(v, 0.9)};
}

}  // namespace

RecoveryReport run_recovery(const ParameterSet& truth, int n_days, int replications,
                            uint64_t seed, const EstimatorConfig& config) {
    truth.validate();
    if (replications < 1) throw std::invalid_argument("replications must be at least 1");
    if (n_days < 1) throw std::invalid_argument("n_days must be at least 1");

    RecoveryReport report;
    report.truth = truth;
    report.n_days = n_days;
    std::vector<EstimationWindow> windows;
    for (int k = 0; k < replications; ++k) {
        SimulationSpec spec;
        spec.params = truth;
        spec.n_days = n_days;
        spec.seed = derive_seed(seed, static_cast<uint64_t>(k));
        spec.asset_id = "REC";
        spec.period_label = "rep-" + std::to_string(k);
        windows.push_back(simulate_window(spec));

        RecoveryReplicate r;
        r.index = k;
        r.seed = spec.seed;
        const auto indicators = windows.back().indicators();
        const auto m = average_pin_ph(truth, indicators);
        r.true_pin = m.pin;
        r.true_ph = m.ph;
        r.true_log_likelihood = window_log_likelihood(truth, windows.back()).value;
        report.replicates.push_back(r);
    }

    const auto outcomes = estimate_panel(windows, config);
    std::vector<double> pin_err;
    std::vector<double> ph_err;
    std::vector<double> ph_est;
    std::vector<std::vector<double>> param_err(ParameterSet::size);
    for (std::size_t k = 0; k < outcomes.size(); ++k) {
        if (!outcomes[k].result) {
            throw EstimationError("recovery replicate " + std::to_string(k) + " failed: " +
                                  outcomes[k].error);
        }
        auto& r = report.replicates[k];
        r.estimate = *outcomes[k].result;
        pin_err.push_back(r.pin_error());
        ph_err.push_back(r.ph_error());
        ph_est.push_back(r.estimate.ph);
        const auto est = r.estimate.params.to_array();
        const auto tru = truth.to_array();
        for (std::size_t i = 0; i < ParameterSet::size; ++i) {
            param_err[i].push_back(std::abs(est[i] - tru[i]));
        }
    }
    report.pin_abs_error = quantiles(pin_err);
    report.ph_abs_error = quantiles(ph_err);
    report.median_estimated_ph = stats::percentile(ph_est, 0.5);
    for (const auto& e : param_err) report.param_abs_error.push_back(quantiles(e));
    return report;
}

}  // namespace pinph
