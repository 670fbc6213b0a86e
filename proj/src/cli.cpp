#include "pinph/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "pinph/recovery.hpp"
#include "pinph/report.hpp"
#include "pinph/rng.hpp"
#include "pinph/simulator.hpp"

namespace pinph::cli {

namespace fs = std::filesystem;

namespace {

class InputMissing : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class EmptyInput : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

void log_line(std::ostream& log, const char* level, const std::string& cmd, const std::string& msg) {
    std::string escaped;
    for (const char c : msg) {
        if (c == '"') escaped += '\\';
        escaped += c == '\n' ? ' ' : c;
    }
    log << "pinph level=" << level << " cmd=" << cmd << " msg=\"" << escaped << "\"\n";
}

std::string hex(uint64_t v) {
    char buf[24];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::ifstream open_input(const std::string& path, const std::string& what) {
    std::ifstream in(path);
    if (!in) {
        throw InputMissing("cannot read " + what + " file '" + path + "'");
    }
    return in;
}

class OutputFile {
public:
    OutputFile(const fs::path& dir, const std::string& name) : path_(dir / name), out_(path_) {
        if (!out_) throw std::ios_base::failure("cannot write '" + path_.string() + "'");
    }
    std::ostream& stream() { return out_; }
    ~OutputFile() = default;

private:
    fs::path path_;
    std::ofstream out_;
};

fs::path output_dir(const RunConfig& config) {
    fs::path dir = config.get("out", "out");
    fs::create_directories(dir);
    return dir;
}

std::vector<Date> business_days(Date start, int count) {
    std::vector<Date> out;
    Date d = start;
    while (static_cast<int>(out.size()) < count) {
        const std::chrono::weekday wd{d};
        if (wd != std::chrono::Saturday && wd != std::chrono::Sunday) out.push_back(d);
        d += std::chrono::days{1};
    }
    return out;
}

std::string scheme_of_labels(const std::set<std::string>& labels) {
    bool quarterly = true;
    bool monthly = true;
    for (const auto& l : labels) {
        quarterly = quarterly && l.size() == 7 && l[5] == 'Q';
        monthly = monthly && l.size() == 7 && l[4] == '-' && l[5] != 'Q';
    }
    if (quarterly) return "quarterly";
    if (monthly) return "monthly";
    return "custom";
}

std::string format_real(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

int guarded(const std::string& cmd, std::ostream& log, const std::function<int()>& body) {
    try {
        return body();
    } catch (const UsageError& e) {
        log_line(log, "error", cmd, e.what());
        return kUsageError;
    } catch (const InvalidParameters& e) {
        log_line(log, "error", cmd, std::string("invalid parameters: ") + e.what());
        return kUsageError;
    } catch (const ParseError& e) {
        log_line(log, "error", cmd, e.what());
        return kInputError;
    } catch (const InputMissing& e) {
        log_line(log, "error", cmd, e.what());
        return kEmptyInput;
    } catch (const EmptyInput& e) {
        log_line(log, "error", cmd, e.what());
        return kEmptyInput;
    } catch (const EstimationError& e) {
        log_line(log, "error", cmd, e.what());
        return kNumericalFailure;
    } catch (const std::ios_base::failure& e) {
        log_line(log, "error", cmd, e.what());
        return kIoError;
    } catch (const fs::filesystem_error& e) {
        log_line(log, "error", cmd, e.what());
        return kIoError;
    } catch (const std::exception& e) {
        log_line(log, "error", cmd, e.what());
        return kInputError;
    }
}

}  // namespace

void RunConfig::set(const std::string& key, const std::string& value) { values[key] = value; }

bool RunConfig::has(const std::string& key) const { return values.count(key) > 0; }

std::string RunConfig::get(const std::string& key, const std::string& fallback) const {
    const auto it = values.find(key);
    return it == values.end() ? fallback : it->second;
}

std::string RunConfig::path(const std::string& key) const {
    const auto v = get(key);
    if (v.empty()) throw UsageError("missing required setting '" + key + "'");
    return v;
}

double RunConfig::real(const std::string& key, double fallback) const {
    if (!has(key)) return fallback;
    const auto s = get(key);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
        throw UsageError("setting '" + key + "' expects a number, got '" + s + "'");
    }
    return v;
}

int64_t RunConfig::integer(const std::string& key, int64_t fallback) const {
    if (!has(key)) return fallback;
    const auto s = get(key);
    int64_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
        throw UsageError("setting '" + key + "' expects an integer, got '" + s + "'");
    }
    return v;
}

uint64_t RunConfig::seed() const {
    const auto s = get("seed", "0");
    uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
        throw UsageError("seed expects an unsigned 64-bit integer, got '" + s + "'");
    }
    return v;
}

PeriodScheme RunConfig::scheme() const {
    try {
        return parse_scheme(get("scheme", "quarterly"));
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
}

EstimatorConfig RunConfig::estimator() const {
    EstimatorConfig c;
    c.n_draws = static_cast<int>(integer("n_draws", c.n_draws));
    c.n_refine = static_cast<int>(integer("n_refine", c.n_refine));
    c.max_iterations = static_cast<int>(integer("max_iterations", c.max_iterations));
    c.rel_tol = real("rel_tol", c.rel_tol);
    c.master_seed = seed();
    c.threads = static_cast<int>(integer("threads", 0));
    const auto mode = get("heuristics", "free");
    if (mode == "free") {
        c.heuristics = HeuristicMode::Free;
    } else if (mode == "fixed-zero") {
        c.heuristics = HeuristicMode::FixedZero;
    } else {
        throw UsageError("heuristics must be free or fixed-zero, got '" + mode + "'");
    }
    try {
        c.validate();
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    return c;
}

ParameterSet RunConfig::theta() const {
    std::array<double, ParameterSet::size> v{};
    for (std::size_t i = 0; i < v.size(); ++i) {
        const std::string key(ParameterSet::names[i]);
        if (!has(key)) throw UsageError("missing parameter '" + key + "'");
        v[i] = real(key, 0.0);
    }
    const auto p = ParameterSet::from_array(v);
    p.validate();
    return p;
}

uint64_t RunConfig::hash() const {
    uint64_t h = fnv1a64("");
    for (const auto& [k, v] : values) {
        if (k == "threads" || k == "out") continue;
        h = fnv1a64(k, h);
        h = fnv1a64("=", h);
        h = fnv1a64(v, h);
        h = fnv1a64("\n", h);
    }
    return h;
}

std::string RunConfig::provenance(const std::string& command) const {
    return std::string("# pinph ") + kVersion + " command=" + command + " config_hash=" +
           hex(hash()) + " seed=" + std::to_string(seed());
}

RunConfig parse_config(std::istream& in, const std::string& origin) {
    RunConfig c;
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        const auto t = trim(line);
        if (t.empty() || t.front() == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos) {
            throw UsageError(origin + ":" + std::to_string(n) + ": expected key = value");
        }
        const auto key = trim(t.substr(0, eq));
        if (key.empty()) throw UsageError(origin + ":" + std::to_string(n) + ": empty key");
        c.set(key, trim(t.substr(eq + 1)));
    }
    return c;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot read config file '" + path + "'");
    return parse_config(in, path);
}

int cmd_ingest(const RunConfig& config, std::ostream& log) {
    const std::string cmd = "ingest";
    return guarded(cmd, log, [&] {
        const bool has_trades = config.has("trades");
        const bool has_counts = config.has("counts");
        if (has_trades == has_counts) {
            throw UsageError("set exactly one of 'trades' or 'counts'");
        }
        AssetDayPanel panel;
        if (has_trades) {
            auto in = open_input(config.path("trades"), "trades");
            auto trades = parse_trades(in);
            if (trades.empty()) throw EmptyInput("trades file '" + config.path("trades") + "' has no rows");
            std::stable_sort(trades.begin(), trades.end(), [](const TradeRecord& a, const TradeRecord& b) {
                if (a.asset_id != b.asset_id) return a.asset_id < b.asset_id;
                return a.timestamp < b.timestamp;
            });
            const auto method_name = config.get("sign_method", "pre-signed");
            SignMethod method = SignMethod::PreSigned;
            if (method_name == "tick-test") {
                method = SignMethod::TickTest;
            } else if (method_name != "pre-signed") {
                throw UsageError("sign_method must be pre-signed or tick-test");
            }
            panel = aggregate_daily(classify_trade_signs(std::move(trades), method));
        } else {
            auto in = open_input(config.path("counts"), "counts");
            panel = parse_counts(in);
            if (panel.assets.empty()) throw EmptyInput("counts file '" + config.path("counts") + "' has no rows");
        }
        if (config.has("metadata")) {
            auto in = open_input(config.path("metadata"), "metadata");
            panel.metadata = parse_metadata(in);
            for (const auto& [asset, _] : panel.assets) {
                if (!panel.metadata.count(asset)) {
                    log_line(log, "warn", cmd, asset + ": no metadata row, treated as equity");
                }
            }
        }
        auto market_in = open_input(config.path("market"), "market");
        const auto market = parse_market(market_in);
        const auto indicators = build_indicator_series(market);
        const auto calendar = indicators.trading_days();
        if (calendar.empty()) throw EmptyInput("market file needs at least two trading days");

        const auto filtered = filter_universe(panel, calendar);
        std::size_t dropped = 0;
        for (const auto& [asset, days] : filtered.assets) {
            for (const auto& [d, _] : days) {
                if (!indicators.prior.count(d)) {
                    ++dropped;
                    log_line(log, "warn", cmd,
                             asset + " " + format_date(d) + ": no prior-day market return, day dropped");
                }
            }
        }

        const auto dir = output_dir(config);
        {
            OutputFile f(dir, "panel.csv");
            f.stream() << config.provenance(cmd) << '\n';
            write_panel(f.stream(), filtered, indicators);
        }
        {
            OutputFile f(dir, "ingest_report.csv");
            f.stream() << config.provenance(cmd) << '\n'
                       << "metric,value\n"
                       << "assets_before," << panel.assets.size() << '\n'
                       << "assets_after," << filtered.assets.size() << '\n'
                       << "trades_before," << panel.total_trades() << '\n'
                       << "trades_after," << filtered.total_trades() << '\n'
                       << "trading_days," << calendar.size() << '\n'
                       << "dropped_days," << dropped << '\n';
        }
        log_line(log, "info", cmd,
                 "assets " + std::to_string(panel.assets.size()) + " -> " +
                     std::to_string(filtered.assets.size()) + ", trades " +
                     std::to_string(panel.total_trades()) + " -> " +
                     std::to_string(filtered.total_trades()));
        return kSuccess;
    });
}

int cmd_estimate(const RunConfig& config, std::ostream& log) {
    const std::string cmd = "estimate";
    return guarded(cmd, log, [&] {
        const auto estimator = config.estimator();
        const auto scheme = config.scheme();
        const std::string panel_path =
            config.get("panel", (fs::path(config.get("out", "out")) / "panel.csv").string());
        if (!fs::exists(panel_path)) {
            throw InputMissing("panel file '" + panel_path +
                               "' not found; run `pinph ingest` first or set panel=<path>");
        }
        auto in = open_input(panel_path, "panel");
        const auto artifact = parse_panel(in);
        if (artifact.panel.assets.empty()) throw EmptyInput("panel '" + panel_path + "' has no rows");

        std::vector<std::string> warnings;
        const auto windows = partition_periods(artifact.panel, artifact.indicators, scheme, &warnings);
        for (const auto& w : warnings) log_line(log, "warn", cmd, w);
        log_line(log, "info", cmd,
                 "estimating " + std::to_string(windows.size()) + " windows (" +
                     std::string(to_string(scheme)) + ", n_draws=" + std::to_string(estimator.n_draws) +
                     ", n_refine=" + std::to_string(estimator.n_refine) + ")");

        const auto outcomes = estimate_panel(windows, estimator);
        std::vector<report::ResultRow> rows;
        std::size_t failures = 0;
        for (std::size_t i = 0; i < outcomes.size(); ++i) {
            report::ResultRow r;
            r.asset_id = outcomes[i].asset_id;
            r.period_label = outcomes[i].period_label;
            r.n_days = static_cast<int>(windows[i].days.size());
            r.result = outcomes[i].result;
            r.error = outcomes[i].error;
            if (!r.result) {
                ++failures;
                log_line(log, "warn", cmd, r.asset_id + "/" + r.period_label + ": " + r.error);
            }
            rows.push_back(std::move(r));
        }
        const auto dir = output_dir(config);
        OutputFile f(dir, "results.csv");
        f.stream() << config.provenance(cmd) << '\n';
        report::write_results(f.stream(), rows);
        log_line(log, "info", cmd,
                 std::to_string(rows.size() - failures) + " of " + std::to_string(rows.size()) +
                     " windows estimated");
        return failures == rows.size() ? kNumericalFailure : kSuccess;
    });
}

int cmd_simulate(const RunConfig& config, std::ostream& log) {
    const std::string cmd = "simulate";
    return guarded(cmd, log, [&] {
        const auto theta = config.theta();
        const auto n_days = config.integer("n_days", 252);
        const auto n_assets = config.integer("n_assets", 1);
        if (n_days < 1) throw UsageError("n_days must be at least 1");
        if (n_assets < 1) throw UsageError("n_assets must be at least 1");
        const auto format = config.get("sim_format", "counts");
        if (format != "counts" && format != "trades") {
            throw UsageError("sim_format must be counts or trades");
        }
        const uint64_t seed = config.seed();
        Date start;
        try {
            start = parse_date(config.get("start_date", "2008-01-01"));
        } catch (const std::invalid_argument& e) {
            throw UsageError(e.what());
        }

        // The first market day only anchors the indicator of the first panel day.
        const auto dates = business_days(start, static_cast<int>(n_days) + 1);
        auto rng = make_engine(derive_seed(seed, fnv1a64("market")));
        std::vector<double> returns;
        for (std::size_t t = 0; t < dates.size(); ++t) {
            const double sign = uniform01(rng) < 0.5 ? -1.0 : 1.0;
            returns.push_back(sign * (0.0005 + 0.02 * uniform01(rng)));
        }
        std::vector<Indicator> indicators;
        for (std::size_t t = 1; t < dates.size(); ++t) {
            indicators.push_back(indicator_from_return(returns[t - 1]));
        }
        const std::span<const Date> panel_dates(dates.begin() + 1, dates.end());

        const auto dir = output_dir(config);
        const auto header = config.provenance(cmd);
        {
            OutputFile f(dir, "market.csv");
            f.stream() << header << "\ndate,return\n";
            for (std::size_t t = 0; t < dates.size(); ++t) {
                f.stream() << format_date(dates[t]) << ',' << format_real(returns[t]) << '\n';
            }
        }
        OutputFile data(dir, format == "counts" ? "counts.csv" : "trades.csv");
        OutputFile meta(dir, "metadata.csv");
        OutputFile truth(dir, "truth.csv");
        data.stream() << header << '\n';
        if (format == "counts") data.stream() << "date,ticker,buys,sells\n";
        meta.stream() << header << "\nticker,market_cap,mean_daily_volume,is_equity\n";
        truth.stream() << header << "\nticker,alpha,delta,mu,eps_b,eps_s,eps_bh,eps_sh,pin,ph\n";

        std::vector<TradeRecord> trades;
        for (int64_t a = 0; a < n_assets; ++a) {
            char id[24];
            std::snprintf(id, sizeof id, "SIM%02lld", static_cast<long long>(a + 1));
            SimulationSpec spec;
            spec.params = theta;
            spec.indicators = indicators;
            spec.n_days = static_cast<int>(n_days);
            spec.seed = derive_seed(seed, fnv1a64(id));
            spec.asset_id = id;
            const auto window = simulate_window(spec);
            if (format == "counts") {
                write_counts(data.stream(), id, panel_dates, window.days);
            } else {
                auto t = expand_to_trades(id, panel_dates, window.days);
                trades.insert(trades.end(), t.begin(), t.end());
            }
            double volume = 0.0;
            for (const auto& d : window.days) volume += static_cast<double>(d.buys + d.sells);
            volume /= static_cast<double>(window.days.size());
            meta.stream() << id << ',' << (a + 1) * 1000 << ',' << format_real(volume) << ",1\n";
            const auto m = average_pin_ph(theta, indicators);
            truth.stream() << id;
            for (const double v : theta.to_array()) truth.stream() << ',' << format_real(v);
            truth.stream() << ',' << format_real(m.pin) << ',' << format_real(m.ph) << '\n';
        }
        if (format == "trades") write_trades(data.stream(), trades);
        log_line(log, "info", cmd,
                 "simulated " + std::to_string(n_assets) + " asset(s) x " + std::to_string(n_days) +
                     " days into " + dir.string());
        return kSuccess;
    });
}

int cmd_recover(const RunConfig& config, std::ostream& log) {
    const std::string cmd = "recover";
    return guarded(cmd, log, [&] {
        const auto theta = config.theta();
        const auto estimator = config.estimator();
        const auto n_days = config.integer("n_days", 252);
        const auto k = config.integer("replications", 20);
        if (n_days < 1) throw UsageError("n_days must be at least 1");
        if (k < 1) throw UsageError("replications must be at least 1");
        log_line(log, "info", cmd,
                 "running " + std::to_string(k) + " replications of " + std::to_string(n_days) + " days");
        const auto rep = run_recovery(theta, static_cast<int>(n_days), static_cast<int>(k),
                                      config.seed(), estimator);

        const auto dir = output_dir(config);
        const auto header = config.provenance(cmd);
        {
            OutputFile f(dir, "recovery.csv");
            auto& o = f.stream();
            o << header << "\nreplicate,seed";
            for (const auto n : ParameterSet::names) o << ",true_" << n << ",est_" << n;
            o << ",true_pin,est_pin,abs_err_pin,true_ph,est_ph,abs_err_ph,true_log_likelihood,"
                 "est_log_likelihood,converged,flags\n";
            for (const auto& r : rep.replicates) {
                o << r.index << ',' << r.seed;
                const auto t = rep.truth.to_array();
                const auto e = r.estimate.params.to_array();
                for (std::size_t i = 0; i < t.size(); ++i) {
                    o << ',' << format_real(t[i]) << ',' << format_real(e[i]);
                }
                o << ',' << format_real(r.true_pin) << ',' << format_real(r.estimate.pin) << ','
                  << format_real(r.pin_error()) << ',' << format_real(r.true_ph) << ','
                  << format_real(r.estimate.ph) << ',' << format_real(r.ph_error()) << ','
                  << format_real(r.true_log_likelihood) << ','
                  << format_real(r.estimate.log_likelihood) << ',' << (r.estimate.converged ? 1 : 0)
                  << ',';
                for (std::size_t i = 0; i < r.estimate.boundary_flags.size(); ++i) {
                    o << (i ? ";" : "") << r.estimate.boundary_flags[i];
                }
                o << '\n';
            }
        }
        {
            OutputFile f(dir, "recovery_summary.csv");
            auto& o = f.stream();
            o << header << "\nmetric,median,p90\n";
            o << "abs_err_pin," << format_real(rep.pin_abs_error.median) << ','
              << format_real(rep.pin_abs_error.p90) << '\n';
            o << "abs_err_ph," << format_real(rep.ph_abs_error.median) << ','
              << format_real(rep.ph_abs_error.p90) << '\n';
            for (std::size_t i = 0; i < ParameterSet::size; ++i) {
                o << "abs_err_" << ParameterSet::names[i] << ','
                  << format_real(rep.param_abs_error[i].median) << ','
                  << format_real(rep.param_abs_error[i].p90) << '\n';
            }
            o << "est_ph," << format_real(rep.median_estimated_ph) << ",\n";
        }
        log_line(log, "info", cmd,
                 "median |PIN error| " + format_real(rep.pin_abs_error.median) +
                     ", median |PH error| " + format_real(rep.ph_abs_error.median));
        return kSuccess;
    });
}

int cmd_report(const RunConfig& config, std::ostream& log) {
    const std::string cmd = "report";
    return guarded(cmd, log, [&] {
        std::vector<report::Record> records;
        std::string scheme_label;
        if (config.has("fixture")) {
            auto in = open_input(config.path("fixture"), "fixture");
            const auto rows = report::parse_fixture(in);
            if (rows.empty()) throw EmptyInput("fixture has no rows");
            for (const auto& r : rows) {
                stats::PanelRow p{r.ticker, "whole-period", r.pin, r.ph, r.market_cap, r.transactions, 0};
                records.push_back({p, std::nullopt});
            }
            scheme_label = "whole-period";
        } else {
            const std::string results_path =
                config.get("results", (fs::path(config.get("out", "out")) / "results.csv").string());
            auto in = open_input(results_path, "results");
            const auto rows = report::parse_results(in);
            if (rows.empty()) throw EmptyInput("results file '" + results_path + "' has no rows");
            auto meta_in = open_input(config.path("metadata"), "metadata");
            const auto metadata = parse_metadata(meta_in);
            std::set<std::string> labels;
            std::set<std::string> missing;
            for (const auto& r : rows) {
                if (!r.result) {
                    log_line(log, "warn", cmd, r.asset_id + "/" + r.period_label + ": no estimate, skipped");
                    continue;
                }
                const auto md = metadata.find(r.asset_id);
                if (md == metadata.end()) {
                    if (missing.insert(r.asset_id).second) {
                        log_line(log, "warn", cmd, r.asset_id + ": no metadata row, excluded from report");
                    }
                    continue;
                }
                stats::PanelRow p{r.asset_id, r.period_label, r.result->pin, r.result->ph,
                                  md->second.market_cap, md->second.mean_daily_volume,
                                  is_fourth_quarter(r.period_label) ? 1 : 0};
                records.push_back({p, r.result->params});
                labels.insert(r.period_label);
            }
            if (records.empty()) throw EmptyInput("no results could be joined with metadata");
            scheme_label = scheme_of_labels(labels);
        }

        report::TableOptions options;
        options.size_groups = static_cast<int>(config.integer("size_groups", options.size_groups));
        options.group_size = static_cast<int>(config.integer("group_size", options.group_size));
        const auto tables = report::build_tables(records, scheme_label, options);
        for (const auto& w : tables.warnings) log_line(log, "warn", cmd, w);

        const auto dir = output_dir(config);
        const auto header = config.provenance(cmd);
        {
            OutputFile f(dir, scheme_label == "monthly" ? "table7_summary.csv" : "table1_summary.csv");
            f.stream() << header << '\n';
            report::write_summary(f.stream(), tables);
        }
        if (!tables.pin_differences.labels.empty()) {
            OutputFile a(dir, "table2_pin_differences.csv");
            a.stream() << header << '\n';
            report::write_differences(a.stream(), tables.pin_differences);
            OutputFile b(dir, "table3_ph_differences.csv");
            b.stream() << header << '\n';
            report::write_differences(b.stream(), tables.ph_differences);
        }
        if (!tables.market_cap.empty()) {
            OutputFile f(dir, "table4_market_cap.csv");
            f.stream() << header << '\n';
            report::write_regressions(f.stream(), tables.market_cap);
        }
        if (!tables.volume.empty()) {
            OutputFile f(dir, "table5_volume.csv");
            f.stream() << header << '\n';
            report::write_regressions(f.stream(), tables.volume);
        }
        if (tables.panel) {
            OutputFile f(dir, "table6_panel.csv");
            f.stream() << header << '\n';
            report::write_regressions(f.stream(), std::span(&*tables.panel, 1));
        }
        if (tables.size_profile) {
            OutputFile f(dir, "figure1_size_groups.csv");
            f.stream() << header << '\n';
            report::write_size_profile(f.stream(), *tables.size_profile);
            OutputFile svg(dir, "figure1_size_groups.svg");
            report::write_size_chart_svg(svg.stream(), *tables.size_profile);
        }
        {
            OutputFile f(dir, "report.json");
            report::write_json(f.stream(), tables, header.substr(2));
        }
        log_line(log, "info", cmd,
                 "report for " + std::to_string(records.size()) + " rows over " +
                     std::to_string(tables.period_count) + " period(s) written to " + dir.string());
        return kSuccess;
    });
}

int run(int argc, const char* const* argv, std::ostream& log) {
    CLI::App app{"Estimate PIN and PH from daily buy/sell counts", "pinph"};
    app.require_subcommand(1);

    struct Flags {
        std::string config;
        std::string seed;
        std::string scheme;
        std::string threads;
        std::string out;
        std::vector<std::string> sets;
    } flags;

    const std::vector<std::pair<std::string, std::string>> commands{
        {"ingest", "parse trades or counts, filter the universe, write the panel"},
        {"estimate", "fit the model per asset and period"},
        {"simulate", "generate synthetic market and count data"},
        {"recover", "seeded parameter-recovery experiment"},
        {"report", "summary tables, regressions and size-group profile"},
    };
    for (const auto& [name, help] : commands) {
        auto* sub = app.add_subcommand(name, help);
        sub->add_option("--config", flags.config, "key = value configuration file");
        sub->add_option("--seed", flags.seed, "master seed (u64)");
        sub->add_option("--scheme", flags.scheme, "quarterly or monthly");
        sub->add_option("--threads", flags.threads, "worker thread cap; never changes results");
        sub->add_option("--out", flags.out, "output directory");
        sub->add_option("--set", flags.sets, "override a config key: key=value");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        std::ostringstream msg;
        const int code = app.exit(e, msg, msg);
        log << msg.str();
        return code == 0 ? kSuccess : kUsageError;
    }

    const auto* chosen = app.get_subcommands().front();
    const std::string name = chosen->get_name();
    RunConfig config;
    try {
        if (!flags.config.empty()) config = load_config(flags.config);
        for (const auto& s : flags.sets) {
            const auto eq = s.find('=');
            if (eq == std::string::npos) throw UsageError("--set expects key=value, got '" + s + "'");
            config.set(trim(s.substr(0, eq)), trim(s.substr(eq + 1)));
        }
        if (!flags.seed.empty()) config.set("seed", flags.seed);
        if (!flags.scheme.empty()) config.set("scheme", flags.scheme);
        if (!flags.threads.empty()) config.set("threads", flags.threads);
        if (!flags.out.empty()) config.set("out", flags.out);
        config.seed();
    } catch (const UsageError& e) {
        log_line(log, "error", name, e.what());
        return kUsageError;
    }

    if (name == "ingest") return cmd_ingest(config, log);
    if (name == "estimate") return cmd_estimate(config, log);
    if (name == "simulate") return cmd_simulate(config, log);
    if (name == "recover") return cmd_recover(config, log);
    return cmd_report(config, log);
}

}  // namespace pinph::cli
