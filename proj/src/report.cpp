#include "pinph/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "json.hpp"

#include "pinph/ingest.hpp"

namespace pinph::report {

namespace {

std::string fmt(double v, const char* spec = "%.17g") {
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

double to_double(const std::string& s, std::size_t line, const char* field) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) {
        throw ParseError(line, field, "cannot parse '" + s + "' as a number");
    }
    return v;
}

bool data_line(std::string& line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return !line.empty() && line.front() != '#';
}

// Reads lines until the header, verifying it.
bool read_header(std::istream& in, std::size_t& line_no, const std::string& expected) {
    std::string line;
    while (std::getline(in, line)) {
        ++line_no;
        if (!data_line(line)) continue;
        if (line != expected) {
            throw ParseError(line_no, "header", "unexpected header; expected " + expected);
        }
        return true;
    }
    return false;
}

constexpr const char* kResultsHeader =
    "ticker,period,n_days,alpha,delta,mu,eps_b,eps_s,eps_bh,eps_sh,log_likelihood,pin,ph,"
    "n_restarts,converged,flags,error";

double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (const double x : v) s += x;
    return s / static_cast<double>(v.size());
}

nlohmann::json fit_json(const stats::OlsFit& f) {
    nlohmann::json terms = nlohmann::json::array();
    for (std::size_t j = 0; j < f.names.size(); ++j) {
        terms.push_back({{"term", f.names[j]},
                         {"coefficient", f.coefficients[j]},
                         {"std_error", f.std_errors[j]},
                         {"t_stat", f.t_stats[j]},
                         {"p_value", f.p_values[j]}});
    }
    return {{"terms", terms}, {"r_squared", f.r_squared}, {"dof", f.dof}};
}

nlohmann::json matrix_json(const stats::DifferenceMatrix& m) {
    nlohmann::json cells = nlohmann::json::array();
    for (std::size_t i = 0; i < m.labels.size(); ++i) {
        for (std::size_t j = i; j < m.labels.size(); ++j) {
            const auto& c = *m.cells[i][j];
            cells.push_back({{"row", m.labels[i]},
                             {"column", m.labels[j]},
                             {"difference", c.difference},
                             {"p_value", c.p_value},
                             {"star", std::string(stats::to_string(c.star))}});
        }
    }
    return {{"labels", m.labels}, {"cells", cells}};
}

}  // namespace

void write_results(std::ostream& out, std::span<const ResultRow> rows) {
    out << kResultsHeader << '\n';
    for (const auto& r : rows) {
        out << r.asset_id << ',' << r.period_label << ',' << r.n_days << ',';
        if (r.result) {
            const auto& e = *r.result;
            for (const double v : e.params.to_array()) out << fmt(v) << ',';
            out << fmt(e.log_likelihood) << ',' << fmt(e.pin) << ',' << fmt(e.ph) << ','
                << e.n_restarts_used << ',' << (e.converged ? 1 : 0) << ',';
            for (std::size_t i = 0; i < e.boundary_flags.size(); ++i) {
                out << (i ? ";" : "") << e.boundary_flags[i];
            }
            out << ",\n";
        } else {
            std::string msg = r.error;
            std::replace(msg.begin(), msg.end(), ',', ';');
            std::replace(msg.begin(), msg.end(), '\n', ' ');
            out << ",,,,,,,,,,,,," << msg << '\n';
        }
    }
}

std::vector<ResultRow> parse_results(std::istream& in) {
    std::vector<ResultRow> rows;
    std::size_t line_no = 0;
    if (!read_header(in, line_no, kResultsHeader)) return rows;
    std::string line;
    while (std::getline(in, line)) {
        ++line_no;
        if (!data_line(line)) continue;
        const auto f = split_line(line);
        if (f.size() != 17) {
            throw ParseError(line_no, "row", "expected 17 fields, found " + std::to_string(f.size()));
        }
        ResultRow r;
        r.asset_id = f[0];
        r.period_label = f[1];
        r.n_days = static_cast<int>(to_double(f[2], line_no, "n_days"));
        if (!f[16].empty()) {
            r.error = f[16];
            rows.push_back(std::move(r));
            continue;
        }
        std::array<double, ParameterSet::size> p{};
        for (std::size_t i = 0; i < p.size(); ++i) {
            p[i] = to_double(f[3 + i], line_no, std::string(ParameterSet::names[i]).c_str());
        }
        EstimationResult e;
        e.params = ParameterSet::from_array(p);
        e.log_likelihood = to_double(f[10], line_no, "log_likelihood");
        e.pin = to_double(f[11], line_no, "pin");
        e.ph = to_double(f[12], line_no, "ph");
        e.n_restarts_used = static_cast<int>(to_double(f[13], line_no, "n_restarts"));
        e.converged = f[14] == "1";
        std::stringstream flags(f[15]);
        std::string flag;
        while (std::getline(flags, flag, ';')) {
            if (!flag.empty()) e.boundary_flags.push_back(flag);
        }
        r.result = std::move(e);
        rows.push_back(std::move(r));
    }
    return rows;
}

std::vector<FixtureRow> parse_fixture(std::istream& in) {
    std::vector<FixtureRow> rows;
    std::size_t line_no = 0;
    if (!read_header(in, line_no, "ticker,pin,ph,market_cap,transactions")) return rows;
    std::string line;
    while (std::getline(in, line)) {
        ++line_no;
        if (!data_line(line)) continue;
        const auto f = split_line(line);
        if (f.size() != 5) {
            throw ParseError(line_no, "row", "expected 5 fields, found " + std::to_string(f.size()));
        }
        rows.push_back({f[0], to_double(f[1], line_no, "pin"), to_double(f[2], line_no, "ph"),
                        to_double(f[3], line_no, "market_cap") * 1e6,
                        to_double(f[4], line_no, "transactions")});
    }
    return rows;
}

Tables build_tables(std::span<const Record> records, const std::string& scheme_label,
                    const TableOptions& options) {
    Tables t;
    t.scheme_label = scheme_label;
    if (records.empty()) throw stats::StatsError("no records to report on");

    // Descriptive summary in the column order of the published tables.
    std::vector<stats::NamedColumn> columns;
    const bool with_params =
        std::all_of(records.begin(), records.end(), [](const Record& r) { return r.params.has_value(); });
    if (with_params) {
        const std::array<std::size_t, 7> order{3, 4, 5, 6, 0, 1, 2};
        for (const auto i : order) {
            stats::NamedColumn c{std::string(ParameterSet::names[i]), {}};
            for (const auto& r : records) c.values.push_back(r.params->to_array()[i]);
            columns.push_back(std::move(c));
        }
    }
    stats::NamedColumn ph_col{"PH", {}};
    stats::NamedColumn pin_col{"PIN", {}};
    for (const auto& r : records) {
        ph_col.values.push_back(r.row.ph);
        pin_col.values.push_back(r.row.pin);
    }
    columns.push_back(std::move(ph_col));
    columns.push_back(std::move(pin_col));
    t.summary = stats::descriptive_summary(columns);

    // Period groups.
    std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> periods;
    for (const auto& r : records) {
        auto& g = periods[r.row.period_label];
        g.first.push_back(r.row.pin);
        g.second.push_back(r.row.ph);
    }
    t.period_count = static_cast<int>(periods.size());
    {
        std::vector<stats::LabeledSample> pin_groups;
        std::vector<stats::LabeledSample> ph_groups;
        for (const auto& [label, g] : periods) {
            pin_groups.push_back({label, g.first});
            ph_groups.push_back({label, g.second});
        }
        try {
            t.pin_differences = stats::mean_difference_matrix(pin_groups);
            t.ph_differences = stats::mean_difference_matrix(ph_groups);
        } catch (const stats::StatsError& e) {
            t.warnings.push_back(std::string("mean-difference tables skipped: ") + e.what());
        }
    }

    // Whole-period per-asset averages.
    struct AssetAgg {
        std::vector<double> pin, ph;
        double cap{0.0}, volume{0.0};
    };
    std::map<std::string, AssetAgg> assets;
    for (const auto& r : records) {
        auto& a = assets[r.row.asset_id];
        a.pin.push_back(r.row.pin);
        a.ph.push_back(r.row.ph);
        a.cap = r.row.market_cap;
        a.volume = r.row.volume;
    }
    std::vector<double> pin_avg, ph_avg, cap, volume;
    std::vector<stats::AssetMeasure> measures;
    for (const auto& [id, a] : assets) {
        pin_avg.push_back(mean_of(a.pin));
        ph_avg.push_back(mean_of(a.ph));
        cap.push_back(a.cap);
        volume.push_back(a.volume);
        measures.push_back({id, a.cap, pin_avg.back(), ph_avg.back()});
    }
    const auto run = [&](std::vector<Regression>& dest, const char* name,
                         const std::vector<double>& x) {
        const auto design = stats::with_intercept({stats::NamedColumn{name, x}});
        try {
            dest.push_back({"PH", stats::ols(ph_avg, design)});
            dest.push_back({"PIN", stats::ols(pin_avg, design)});
        } catch (const stats::StatsError& e) {
            dest.clear();
            t.warnings.push_back(std::string("regression on ") + name + " skipped: " + e.what());
        }
    };
    run(t.market_cap, "mkt.cap", cap);
    run(t.volume, "volume", volume);

    // Asset x period panel regression.
    std::vector<double> y, pcap, pvol, q4, ppin;
    for (const auto& r : records) {
        y.push_back(r.row.ph);
        pcap.push_back(r.row.market_cap);
        pvol.push_back(r.row.volume);
        q4.push_back(r.row.q4_dummy);
        ppin.push_back(r.row.pin);
    }
    try {
        const auto design = stats::with_intercept({{"mkt.cap", pcap}, {"volume", pvol}, {"Q4", q4}, {"PIN", ppin}});
        t.panel = Regression{"PH", stats::ols(y, design)};
    } catch (const stats::StatsError& e) {
        t.warnings.push_back(std::string("panel regression skipped: ") + e.what());
    }

    try {
        t.size_profile = stats::size_group_profile(measures, options.size_groups, options.group_size);
    } catch (const stats::StatsError& e) {
        t.warnings.push_back(std::string("size-group profile skipped: ") + e.what());
    }
    return t;
}

void write_summary(std::ostream& out, const Tables& t) {
    out << "# scheme=" << t.scheme_label << " periods=" << t.period_count << '\n';
    out << "statistic";
    for (const auto& r : t.summary) out << ',' << r.name;
    out << '\n';
    const auto row = [&](const char* name, auto get) {
        out << name;
        for (const auto& r : t.summary) out << ',' << fmt(get(r.summary), "%.6g");
        out << '\n';
    };
    row("mean", [](const stats::Summary& s) { return s.mean; });
    row("median", [](const stats::Summary& s) { return s.median; });
    row("std_dev", [](const stats::Summary& s) { return s.std_dev; });
    row("p10", [](const stats::Summary& s) { return s.p10; });
    row("p90", [](const stats::Summary& s) { return s.p90; });
}

void write_differences(std::ostream& out, const stats::DifferenceMatrix& m) {
    for (const auto& l : m.labels) out << ',' << l;
    out << '\n';
    for (std::size_t i = 0; i < m.labels.size(); ++i) {
        out << m.labels[i];
        for (std::size_t j = 0; j < m.labels.size(); ++j) {
            out << ',';
            if (m.cells[i][j]) {
                out << fmt(m.cells[i][j]->difference, "%.4f") << stats::to_string(m.cells[i][j]->star);
            }
        }
        out << '\n';
    }
}

void write_regressions(std::ostream& out, std::span<const Regression> regressions) {
    out << "dependent,term,coefficient,std_error,t_stat,p_value,n,r_squared\n";
    for (const auto& r : regressions) {
        const auto& f = r.fit;
        for (std::size_t j = 0; j < f.names.size(); ++j) {
            out << r.dependent << ',' << f.names[j] << ',' << fmt(f.coefficients[j], "%.6g") << ','
                << fmt(f.std_errors[j], "%.6g") << ',' << fmt(f.t_stats[j], "%.6g") << ','
                << fmt(f.p_values[j], "%.4f") << ',' << f.residuals.size() << ','
                << fmt(f.r_squared, "%.6g") << '\n';
        }
    }
}

void write_size_profile(std::ostream& out, const stats::SizeProfile& p) {
    out << "rank,n_assets,min_cap,max_cap,mean_pin,mean_ph,fitted_pin,fitted_ph\n";
    for (const auto& g : p.groups) {
        out << g.rank << ',' << g.assets.size() << ',' << fmt(g.min_cap, "%.6g") << ','
            << fmt(g.max_cap, "%.6g") << ',' << fmt(g.mean_pin, "%.6f") << ','
            << fmt(g.mean_ph, "%.6f") << ',' << fmt(g.fitted_pin, "%.6f") << ','
            << fmt(g.fitted_ph, "%.6f") << '\n';
    }
}

void write_size_chart_svg(std::ostream& out, const stats::SizeProfile& p) {
    constexpr double w = 640, h = 400, left = 60, right = 20, top = 30, bottom = 50;
    double y_max = 0.0;
    for (const auto& g : p.groups) y_max = std::max({y_max, g.mean_pin, g.mean_ph, g.fitted_pin});
    y_max = y_max > 0.0 ? std::ceil(y_max * 10.0 * 1.1) / 10.0 : 1.0;
    const auto n = static_cast<double>(p.groups.size());
    const auto px = [&](double rank) { return left + (rank - 0.5) / n * (w - left - right); };
    const auto py = [&](double v) { return top + (1.0 - v / y_max) * (h - top - bottom); };

    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
        << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<line x1=\"" << left << "\" y1=\"" << h - bottom << "\" x2=\"" << w - right
        << "\" y2=\"" << h - bottom << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\""
        << h - bottom << "\" stroke=\"black\"/>\n";
    for (int k = 0; k <= 4; ++k) {
        const double v = y_max * k / 4.0;
        out << "<text x=\"" << left - 8 << "\" y=\"" << fmt(py(v) + 4, "%.1f")
            << "\" text-anchor=\"end\">" << fmt(v, "%.2f") << "</text>\n";
    }
    for (const auto& g : p.groups) {
        out << "<text x=\"" << fmt(px(g.rank), "%.1f") << "\" y=\"" << h - bottom + 18
            << "\" text-anchor=\"middle\">" << g.rank << "</text>\n";
    }
    out << "<text x=\"" << (left + w - right) / 2 << "\" y=\"" << h - 10
        << "\" text-anchor=\"middle\">size group (1 = smallest market cap)</text>\n";

    const auto series = [&](const char* color, auto mean, auto fitted, const char* label, double ly) {
        for (const auto& g : p.groups) {
            out << "<circle cx=\"" << fmt(px(g.rank), "%.1f") << "\" cy=\"" << fmt(py(mean(g)), "%.1f")
                << "\" r=\"4\" fill=\"" << color << "\"/>\n";
        }
        const auto& a = p.groups.front();
        const auto& b = p.groups.back();
        out << "<line x1=\"" << fmt(px(a.rank), "%.1f") << "\" y1=\"" << fmt(py(fitted(a)), "%.1f")
            << "\" x2=\"" << fmt(px(b.rank), "%.1f") << "\" y2=\"" << fmt(py(fitted(b)), "%.1f")
            << "\" stroke=\"" << color << "\" stroke-dasharray=\"6 3\"/>\n";
        out << "<text x=\"" << w - right - 60 << "\" y=\"" << ly << "\" fill=\"" << color << "\">"
            << label << "</text>\n";
    };
    series("#1f77b4", [](const stats::SizeGroup& g) { return g.mean_pin; },
           [](const stats::SizeGroup& g) { return g.fitted_pin; }, "PIN", top + 10);
    series("#d62728", [](const stats::SizeGroup& g) { return g.mean_ph; },
           [](const stats::SizeGroup& g) { return g.fitted_ph; }, "PH", top + 26);
    out << "</svg>\n";
}

void write_json(std::ostream& out, const Tables& t, const std::string& provenance) {
    nlohmann::json j;
    j["provenance"] = provenance;
    j["scheme"] = t.scheme_label;
    j["period_count"] = t.period_count;
    nlohmann::json summary = nlohmann::json::array();
    for (const auto& r : t.summary) {
        summary.push_back({{"name", r.name},
                           {"n", r.summary.n},
                           {"mean", r.summary.mean},
                           {"median", r.summary.median},
                           {"std_dev", r.summary.std_dev},
                           {"p10", r.summary.p10},
                           {"p90", r.summary.p90}});
    }
    j["summary"] = summary;
    if (!t.pin_differences.labels.empty()) {
        j["pin_differences"] = matrix_json(t.pin_differences);
        j["ph_differences"] = matrix_json(t.ph_differences);
    }
    const auto regs = [](std::span<const Regression> rs) {
        nlohmann::json a = nlohmann::json::array();
        for (const auto& r : rs) a.push_back({{"dependent", r.dependent}, {"fit", fit_json(r.fit)}});
        return a;
    };
    j["market_cap_regressions"] = regs(t.market_cap);
    j["volume_regressions"] = regs(t.volume);
    if (t.panel) j["panel_regression"] = {{"dependent", t.panel->dependent}, {"fit", fit_json(t.panel->fit)}};
    if (t.size_profile) {
        nlohmann::json groups = nlohmann::json::array();
        for (const auto& g : t.size_profile->groups) {
            groups.push_back({{"rank", g.rank},
                              {"assets", g.assets},
                              {"mean_pin", g.mean_pin},
                              {"mean_ph", g.mean_ph},
                              {"fitted_pin", g.fitted_pin},
                              {"fitted_ph", g.fitted_ph}});
        }
        j["size_profile"] = {{"groups", groups},
                             {"pin_fit", fit_json(t.size_profile->pin_fit)},
                             {"ph_fit", fit_json(t.size_profile->ph_fit)}};
    }
    j["warnings"] = t.warnings;
    out << j.dump(2) << '\n';
}

}  // namespace pinph::report
