#include "pinph/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace pinph {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

using Point = std::vector<double>;

struct Vertex {
    Point x;
    double f;
};

bool within_tol(double best, double other, double rel_tol) {
    if (best == kNegInf) return false;
    return std::abs(best - other) <= rel_tol * std::max(std::abs(best), 1e-300);
}

class Simplex {
public:
    Simplex(const BoxObjective& objective, int& iterations, int max_iterations)
        : objective_(objective), iterations_(iterations), max_iterations_(max_iterations) {}

    // One Nelder-Mead run. Returns true when the simplex value spread fell
    // below rel_tol, false when the iteration budget ran out first.
    bool run(Vertex& incumbent, double step, double rel_tol) {
        const std::size_t d = incumbent.x.size();
        std::vector<Vertex> v;
        v.reserve(d + 1);
        v.push_back(incumbent);
        for (std::size_t i = 0; i < d; ++i) {
            Point x = incumbent.x;
            x[i] = x[i] + step <= 1.0 ? x[i] + step : x[i] - step;
            v.push_back({x, eval(x)});
        }

        bool converged = false;
        while (true) {
            std::stable_sort(v.begin(), v.end(),
                             [](const Vertex& a, const Vertex& b) { return a.f > b.f; });
            if (within_tol(v.front().f, v.back().f, rel_tol) || collapsed(v)) {
                converged = true;
                break;
            }
            if (iterations_ >= max_iterations_) break;
            ++iterations_;

            const Point c = centroid(v);
            Vertex& worst = v.back();
            const double f_second = v[d - 1].f;

            Point xr = along(c, worst.x, 1.0);
            const double fr = eval(xr);
            if (fr > v.front().f) {
                Point xe = along(c, worst.x, 2.0);
                const double fe = eval(xe);
                if (fe > fr) {
                    worst = {std::move(xe), fe};
                } else {
                    worst = {std::move(xr), fr};
                }
            } else if (fr > f_second) {
                worst = {std::move(xr), fr};
            } else if (fr > worst.f) {
                Point xc = along(c, worst.x, 0.5);
                const double fc = eval(xc);
                if (fc >= fr) {
                    worst = {std::move(xc), fc};
                } else {
                    shrink(v);
                }
            } else {
                Point xc = along(c, worst.x, -0.5);
                const double fc = eval(xc);
                if (fc > worst.f) {
                    worst = {std::move(xc), fc};
                } else {
                    shrink(v);
                }
            }
        }
        const auto best = std::max_element(
            v.begin(), v.end(), [](const Vertex& a, const Vertex& b) { return a.f < b.f; });
        if (best->f > incumbent.f) incumbent = *best;
        return converged;
    }

private:
    double eval(const Point& x) const {
        const double f = objective_(x);
        return std::isnan(f) ? kNegInf : f;
    }

    static Point centroid(const std::vector<Vertex>& v) {
        const std::size_t d = v.front().x.size();
        Point c(d, 0.0);
        for (std::size_t i = 0; i + 1 < v.size(); ++i) {
            for (std::size_t j = 0; j < d; ++j) c[j] += v[i].x[j];
        }
        for (auto& cj : c) cj /= static_cast<double>(d);
        return c;
    }

    // c + coef * (c - w), reflected into the box.
    static Point along(const Point& c, const Point& w, double coef) {
        Point x(c.size());
        for (std::size_t j = 0; j < c.size(); ++j) {
            x[j] = reflect_into_unit(c[j] + coef * (c[j] - w[j]));
        }
        return x;
    }

    void shrink(std::vector<Vertex>& v) {
        const Point& best = v.front().x;
        for (std::size_t i = 1; i < v.size(); ++i) {
            for (std::size_t j = 0; j < best.size(); ++j) {
                v[i].x[j] = best[j] + 0.5 * (v[i].x[j] - best[j]);
            }
            v[i].f = eval(v[i].x);
        }
    }

    static bool collapsed(const std::vector<Vertex>& v) {
        double size = 0.0;
        for (std::size_t i = 1; i < v.size(); ++i) {
            for (std::size_t j = 0; j < v[i].x.size(); ++j) {
                size = std::max(size, std::abs(v[i].x[j] - v[0].x[j]));
            }
        }
        return size < 1e-13;
    }

    const BoxObjective& objective_;
    int& iterations_;
    int max_iterations_;
};

}  // namespace

double reflect_into_unit(double x) noexcept {
    if (x < 0.0) x = -x;
    if (x > 1.0) x = 2.0 - x;
    return std::clamp(x, 0.0, 1.0);
}

BoxSearchResult maximize_in_unit_box(const BoxObjective& objective, std::vector<double> start,
                                     const BoxSearchOptions& options) {
    if (start.empty()) throw std::invalid_argument("search space has no free coordinates");
    if (!(options.rel_tol > 0.0)) throw std::invalid_argument("rel_tol must be positive");
    for (auto& x : start) {
        if (!(x >= 0.0 && x <= 1.0)) throw std::invalid_argument("start lies outside the unit box");
    }

    BoxSearchResult result;
    Vertex incumbent{std::move(start), 0.0};
    incumbent.f = objective(incumbent.x);
    if (std::isnan(incumbent.f) || incumbent.f == kNegInf) {
        result.point = std::move(incumbent.x);
        result.value = kNegInf;
        return result;
    }
    if (options.max_iterations == 0) {
        result.point = std::move(incumbent.x);
        result.value = incumbent.f;
        return result;
    }

    Simplex simplex(objective, result.iterations, options.max_iterations);
    while (true) {
        const double before = incumbent.f;
        const bool settled = simplex.run(incumbent, options.initial_step, options.rel_tol);
        ++result.sweeps;
        if (!settled) break;
        if (result.sweeps > 1 && within_tol(incumbent.f, before, options.rel_tol)) {
            result.converged = true;
            break;
        }
        if (result.iterations >= options.max_iterations) break;
    }
    result.point = std::move(incumbent.x);
    result.value = incumbent.f;
    return result;
}

}  // namespace pinph
