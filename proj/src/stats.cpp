#include "pinph/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Dense>
#include <boost/math/distributions/students_t.hpp>

namespace pinph::stats {

namespace {

double mean_of(std::span<const double> v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sample_variance(std::span<const double> v, double mean) {
    if (v.size() < 2) return 0.0;
    double ss = 0.0;
    for (const double x : v) ss += (x - mean) * (x - mean);
    return ss / static_cast<double>(v.size() - 1);
}

double two_sided_t_p(double t, double df) {
    if (std::isnan(t)) return 1.0;
    if (std::isinf(t)) return 0.0;
    const boost::math::students_t dist(df);
    return std::clamp(2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t))), 0.0, 1.0);
}

}  // namespace

double percentile(std::span<const double> values, double p) {
    if (values.empty()) throw StatsError("percentile of an empty sample");
    if (!(p >= 0.0 && p <= 1.0)) throw StatsError("percentile level must lie in [0, 1]");
    std::vector<double> v(values.begin(), values.end());
    std::sort(v.begin(), v.end());
    const double h = p * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

Summary describe(std::span<const double> values) {
    if (values.empty()) throw StatsError("summary of an empty sample");
    Summary s;
    s.n = values.size();
    s.mean = mean_of(values);
    s.std_dev = std::sqrt(sample_variance(values, s.mean));
    s.median = percentile(values, 0.5);
    s.p10 = percentile(values, 0.1);
    s.p90 = percentile(values, 0.9);
    return s;
}

std::vector<SummaryRow> descriptive_summary(std::span<const NamedColumn> columns) {
    std::vector<SummaryRow> out;
    out.reserve(columns.size());
    for (const auto& c : columns) out.push_back({c.name, describe(c.values)});
    return out;
}

WelchTest welch_t_test(std::span<const double> a, std::span<const double> b) {
    if (a.size() < 2 || b.size() < 2) throw StatsError("Welch test needs two observations per group");
    const double ma = mean_of(a);
    const double mb = mean_of(b);
    const double va = sample_variance(a, ma) / static_cast<double>(a.size());
    const double vb = sample_variance(b, mb) / static_cast<double>(b.size());
    WelchTest w;
    w.difference = mb - ma;
    const double se2 = va + vb;
    if (se2 == 0.0) {
        w.t = w.difference == 0.0 ? 0.0 : std::copysign(INFINITY, w.difference);
        w.df = static_cast<double>(a.size() + b.size() - 2);
        w.p_value = w.difference == 0.0 ? 1.0 : 0.0;
        return w;
    }
    w.t = w.difference / std::sqrt(se2);
    w.df = se2 * se2 /
           (va * va / static_cast<double>(a.size() - 1) + vb * vb / static_cast<double>(b.size() - 1));
    w.p_value = two_sided_t_p(w.t, w.df);
    return w;
}

std::string_view to_string(Star star) {
    switch (star) {
        case Star::One: return "**";
        case Star::Five: return "*";
        case Star::None: break;
    }
    return "";
}

DifferenceMatrix mean_difference_matrix(std::span<const LabeledSample> groups) {
    if (groups.empty()) throw StatsError("mean-difference matrix needs at least one group");
    DifferenceMatrix m;
    if (groups.size() == 1) {
        m.labels = {groups[0].label};
        m.cells = {{DifferenceCell{}}};
        return m;
    }
    for (const auto& g : groups) {
        if (g.values.size() < 2) {
            throw StatsError("group '" + g.label + "' has fewer than two observations");
        }
    }
    const auto n = groups.size();
    m.cells.assign(n, std::vector<std::optional<DifferenceCell>>(n));
    for (std::size_t i = 0; i < n; ++i) {
        m.labels.push_back(groups[i].label);
        m.cells[i][i] = DifferenceCell{};
        for (std::size_t j = i + 1; j < n; ++j) {
            const auto w = welch_t_test(groups[i].values, groups[j].values);
            DifferenceCell c{w.difference, w.p_value, Star::None};
            if (w.p_value < 0.01) {
                c.star = Star::One;
            } else if (w.p_value < 0.05) {
                c.star = Star::Five;
            }
            m.cells[i][j] = c;
        }
    }
    return m;
}

std::vector<NamedColumn> with_intercept(std::vector<NamedColumn> columns) {
    const std::size_t n = columns.empty() ? 0 : columns.front().values.size();
    columns.insert(columns.begin(), NamedColumn{"const", std::vector<double>(n, 1.0)});
    return columns;
}

OlsFit ols(std::span<const double> response, std::span<const NamedColumn> regressors) {
    const auto n = static_cast<Eigen::Index>(response.size());
    const auto k = static_cast<Eigen::Index>(regressors.size());
    if (k == 0) throw StatsError("regression has no regressors");
    if (n < k) {
        throw StatsError("regression needs at least as many observations (" + std::to_string(n) +
                         ") as regressors (" + std::to_string(k) + ")");
    }
    Eigen::MatrixXd x(n, k);
    int intercept = -1;
    for (Eigen::Index j = 0; j < k; ++j) {
        const auto& col = regressors[static_cast<std::size_t>(j)];
        if (static_cast<Eigen::Index>(col.values.size()) != n) {
            throw StatsError("column '" + col.name + "' length differs from the response");
        }
        bool constant = col.values.front() != 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            x(i, j) = col.values[static_cast<std::size_t>(i)];
            constant = constant && x(i, j) == x(0, j);
        }
        if (constant && intercept < 0) intercept = static_cast<int>(j);
    }

    // Shifting by the first response keeps a constant response exactly zero
    // after the shift; the intercept absorbs the shift.
    const double shift = intercept >= 0 ? response.front() : 0.0;
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) y(i) = response[static_cast<std::size_t>(i)] - shift;

    const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
    if (qr.rank() < k) {
        // Columns with weight in the null space of X form the collinear set.
        const auto rk = qr.rank();
        const auto& perm = qr.colsPermutation().indices();
        const Eigen::MatrixXd r_all = qr.matrixR().topRows(k).triangularView<Eigen::Upper>();
        const Eigen::MatrixXd z = r_all.topLeftCorner(rk, rk).triangularView<Eigen::Upper>().solve(
            r_all.topRightCorner(rk, k - rk));
        std::vector<bool> involved(static_cast<std::size_t>(k), false);
        for (Eigen::Index c = 0; c < k - rk; ++c) {
            involved[static_cast<std::size_t>(perm(rk + c))] = true;
            const double scale = std::max(1.0, z.col(c).cwiseAbs().maxCoeff());
            for (Eigen::Index i = 0; i < rk; ++i) {
                if (std::abs(z(i, c)) > 1e-8 * scale) involved[static_cast<std::size_t>(perm(i))] = true;
            }
        }
        std::string names;
        for (Eigen::Index j = 0; j < k; ++j) {
            if (!involved[static_cast<std::size_t>(j)]) continue;
            names += (names.empty() ? "" : ", ") + regressors[static_cast<std::size_t>(j)].name;
        }
        throw StatsError("design matrix is rank deficient; collinear columns: " + names);
    }
    Eigen::VectorXd beta = qr.solve(y);
    const Eigen::VectorXd resid = y - x * beta;
    if (intercept >= 0) beta(intercept) += shift / x(0, intercept);

    // (X'X)^-1 = P R^-1 R^-T P^T.
    const Eigen::MatrixXd r = qr.matrixR().topLeftCorner(k, k).triangularView<Eigen::Upper>();
    const Eigen::MatrixXd r_inv =
        r.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(k, k));
    const Eigen::MatrixXd cov_perm = r_inv * r_inv.transpose();
    const auto& perm = qr.colsPermutation();
    const Eigen::MatrixXd xtx_inv = perm * cov_perm * perm.transpose();

    OlsFit fit;
    fit.dof = static_cast<int>(n - k);
    const double ssr = resid.squaredNorm();
    const double sigma2 = ssr / static_cast<double>(fit.dof);
    for (Eigen::Index j = 0; j < k; ++j) {
        const double coef = beta(j);
        const double se = std::sqrt(sigma2 * xtx_inv(j, j));
        double t = 0.0;
        double p = 1.0;
        if (fit.dof == 0) {
            t = NAN;
            p = NAN;
        } else if (se > 0.0) {
            t = coef / se;
            p = two_sided_t_p(t, fit.dof);
        } else if (coef != 0.0) {
            t = std::copysign(INFINITY, coef);
            p = 0.0;
        }
        fit.names.push_back(regressors[static_cast<std::size_t>(j)].name);
        fit.coefficients.push_back(coef);
        fit.std_errors.push_back(se);
        fit.t_stats.push_back(t);
        fit.p_values.push_back(p);
    }
    fit.residuals.assign(resid.data(), resid.data() + n);

    const double y_mean = y.mean();
    const double sst = (y.array() - y_mean).square().sum();
    fit.r_squared = sst > 0.0 ? 1.0 - ssr / sst : 0.0;
    return fit;
}

SizeProfile size_group_profile(std::span<const AssetMeasure> assets, int n_groups, int group_size) {
    if (n_groups < 3 || group_size < 1) {
        throw StatsError("size profile needs at least 3 groups of at least 1 asset");
    }
    const auto needed = static_cast<std::size_t>(n_groups) * static_cast<std::size_t>(group_size);
    if (assets.size() < needed) {
        throw StatsError("size profile needs " + std::to_string(needed) + " assets, " +
                         std::to_string(assets.size()) + " available");
    }
    std::vector<AssetMeasure> sorted(assets.begin(), assets.end());
    std::stable_sort(sorted.begin(), sorted.end(), [](const AssetMeasure& a, const AssetMeasure& b) {
        if (a.market_cap != b.market_cap) return a.market_cap < b.market_cap;
        return a.asset_id < b.asset_id;
    });

    SizeProfile profile;
    std::vector<double> rank;
    std::vector<double> pin;
    std::vector<double> ph;
    for (int g = 0; g < n_groups; ++g) {
        SizeGroup group;
        group.rank = g + 1;
        double sum_pin = 0.0;
        double sum_ph = 0.0;
        for (int i = 0; i < group_size; ++i) {
            const auto& a = sorted[static_cast<std::size_t>(g * group_size + i)];
            group.assets.push_back(a.asset_id);
            sum_pin += a.pin;
            sum_ph += a.ph;
            group.min_cap = i == 0 ? a.market_cap : std::min(group.min_cap, a.market_cap);
            group.max_cap = std::max(group.max_cap, a.market_cap);
        }
        group.mean_pin = sum_pin / group_size;
        group.mean_ph = sum_ph / group_size;
        rank.push_back(group.rank);
        pin.push_back(group.mean_pin);
        ph.push_back(group.mean_ph);
        profile.groups.push_back(std::move(group));
    }
    const auto design = with_intercept({NamedColumn{"rank", rank}});
    profile.pin_fit = ols(pin, design);
    profile.ph_fit = ols(ph, design);
    for (auto& g : profile.groups) {
        g.fitted_pin = profile.pin_fit.coefficients[0] + profile.pin_fit.coefficients[1] * g.rank;
        g.fitted_ph = profile.ph_fit.coefficients[0] + profile.ph_fit.coefficients[1] * g.rank;
    }
    return profile;
}

}  // namespace pinph::stats
