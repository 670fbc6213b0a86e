#pragma once

// Descriptive statistics, period mean-difference tests, OLS with Student-t
// inference and market-cap size-group profiles.

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace pinph::stats {

class StatsError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct PanelRow {
    std::string asset_id;
    std::string period_label;
    double pin{0.0};
    double ph{0.0};
    double market_cap{0.0};
    double volume{0.0};
    int q4_dummy{0};
};

/// Percentile by linear interpolation between order statistics, p in [0, 1].
double percentile(std::span<const double> values, double p);

struct Summary {
    std::size_t n{0};
    double mean{0.0};
    double median{0.0};
    double std_dev{0.0};  ///< sample standard deviation, 0 when n = 1
    double p10{0.0};
    double p90{0.0};
};

Summary describe(std::span<const double> values);

struct NamedColumn {
    std::string name;
    std::vector<double> values;
};

struct SummaryRow {
    std::string name;
    Summary summary;
};

std::vector<SummaryRow> descriptive_summary(std::span<const NamedColumn> columns);

struct WelchTest {
    double difference{0.0};  ///< mean(b) - mean(a)
    double t{0.0};
    double df{0.0};
    double p_value{1.0};
};

WelchTest welch_t_test(std::span<const double> a, std::span<const double> b);

enum class Star { None, Five, One };
std::string_view to_string(Star star);

struct DifferenceCell {
    double difference{0.0};
    double p_value{1.0};
    Star star{Star::None};
};

struct LabeledSample {
    std::string label;
    std::vector<double> values;
};

/// cells[i][j] for j >= i holds mean(group j) - mean(group i), the column
/// group measured against the row group; the lower triangle is empty.
struct DifferenceMatrix {
    std::vector<std::string> labels;
    std::vector<std::vector<std::optional<DifferenceCell>>> cells;
};

/// Welch-tested pairwise differences, starred at 5% (*) and 1% (**). A
/// single group gives the 1x1 zero matrix.
DifferenceMatrix mean_difference_matrix(std::span<const LabeledSample> groups);

struct OlsFit {
    std::vector<std::string> names;
    std::vector<double> coefficients;
    std::vector<double> std_errors;
    std::vector<double> t_stats;
    std::vector<double> p_values;  ///< two-sided, Student t with n - k df; NaN when n = k
    std::vector<double> residuals;
    double r_squared{0.0};
    int dof{0};
};

/// Least squares with classical standard errors. `regressors` must carry any
/// intercept column explicitly (see with_intercept). Throws StatsError naming
/// the collinear columns when the design is rank deficient.
OlsFit ols(std::span<const double> response, std::span<const NamedColumn> regressors);

/// Prepends a column of ones named "const".
std::vector<NamedColumn> with_intercept(std::vector<NamedColumn> columns);

struct AssetMeasure {
    std::string asset_id;
    double market_cap{0.0};
    double pin{0.0};
    double ph{0.0};
};

struct SizeGroup {
    int rank{0};  ///< 1 = smallest market caps
    std::vector<std::string> assets;
    double min_cap{0.0};
    double max_cap{0.0};
    double mean_pin{0.0};
    double mean_ph{0.0};
    double fitted_pin{0.0};
    double fitted_ph{0.0};
};

struct SizeProfile {
    std::vector<SizeGroup> groups;
    OlsFit pin_fit;  ///< mean PIN on group rank
    OlsFit ph_fit;   ///< mean PH on group rank
};

/// Sorts by market cap ascending and chunks the first n_groups * group_size
/// assets into consecutive groups. Needs n_groups >= 3 for the line fits.
SizeProfile size_group_profile(std::span<const AssetMeasure> assets, int n_groups, int group_size);

}  // namespace pinph::stats
