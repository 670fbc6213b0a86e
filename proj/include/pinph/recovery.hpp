#pragma once

// Seeded simulate-then-estimate replications for a known parameter set.

#include <cstdint>
#include <vector>

#include "pinph/estimator.hpp"
#include "pinph/model.hpp"

namespace pinph {

struct RecoveryReplicate {
    int index{0};
    uint64_t seed{0};
    double true_pin{0.0};  ///< PIN of the true parameters over the replicate's indicators
    double true_ph{0.0};
    double true_log_likelihood{0.0};
    EstimationResult estimate;

    double pin_error() const noexcept;
    double ph_error() const noexcept;
};

struct ErrorQuantiles {
    double median{0.0};
    double p90{0.0};
};

struct RecoveryReport {
    ParameterSet truth;
    int n_days{0};
    std::vector<RecoveryReplicate> replicates;
    ErrorQuantiles pin_abs_error;
    ErrorQuantiles ph_abs_error;
    double median_estimated_ph{0.0};
    std::vector<ErrorQuantiles> param_abs_error;  ///< per ParameterSet field
};

/// Replicate k simulates n_days with i.i.d. indicators under
/// derive_seed(seed, k) and estimates it with `config`.
RecoveryReport run_recovery(const ParameterSet& truth, int n_days, int replications,
                            uint64_t seed, const EstimatorConfig& config);

}  // namespace pinph
