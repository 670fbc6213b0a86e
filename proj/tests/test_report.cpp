#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "pinph/report.hpp"

using namespace pinph;
using namespace pinph::report;

namespace {

std::vector<FixtureRow> load_fixture() {
    std::ifstream in(PINPH_SOURCE_DIR "/data/table_a1.csv");
    REQUIRE(in);
    return parse_fixture(in);
}

std::vector<Record> fixture_records() {
    std::vector<Record> out;
    for (const auto& f : load_fixture()) {
        out.push_back({{f.ticker, "2008", f.pin, f.ph, f.market_cap, f.transactions, 0}, std::nullopt});
    }
    return out;
}

const stats::OlsFit& fit_for(const std::vector<Regression>& regs, const std::string& dependent) {
    for (const auto& r : regs) {
        if (r.dependent == dependent) return r.fit;
    }
    FAIL("missing regression " << dependent);
    return regs.front().fit;
}

}  // namespace

TEST_CASE("results file round trip") {
    EstimationResult r;
    r.params = {0.4, 0.5, 300.0 + 1.0 / 3.0, 400.25, 500.0, 50.0, 0.0};
    r.log_likelihood = -12345.678901234567;
    r.pin = 0.1121;
    r.ph = 0.0467;
    r.n_restarts_used = 50;
    r.converged = true;
    r.boundary_flags = {"eps_sh", "delta"};
    const std::vector<ResultRow> rows{{"OTP", "2008-Q1", 62, r, ""},
                                      {"MOL", "2008-Q1", 62, std::nullopt, "window MOL/2008-Q1: all draws degenerate"}};
    std::ostringstream out;
    write_results(out, rows);
    CHECK(out.str().rfind("ticker,period,n_days,alpha,delta,mu,eps_b,eps_s,eps_bh,eps_sh,log_likelihood,pin,ph,"
                          "n_restarts,converged,flags,error\n", 0) == 0);
    std::istringstream in(out.str());
    const auto back = parse_results(in);
    REQUIRE(back.size() == 2);
    CHECK(back[0].asset_id == "OTP");
    CHECK(back[0].n_days == 62);
    REQUIRE(back[0].result.has_value());
    CHECK(back[0].result->params == r.params);
    CHECK(back[0].result->log_likelihood == r.log_likelihood);
    CHECK(back[0].result->boundary_flags == r.boundary_flags);
    CHECK(back[0].result->converged);
    CHECK_FALSE(back[1].result.has_value());
    CHECK(back[1].error == rows[1].error);

    std::ostringstream again;
    write_results(again, back);
    CHECK(again.str() == out.str());
}

TEST_CASE("fixture loads with market caps in units") {
    const auto rows = load_fixture();
    CHECK(rows.size() == 45);
    CHECK(rows[0].ticker == "FEVITAN");
    CHECK(rows[0].pin == 0.0781);
    CHECK(rows[0].market_cap == 745e6);
    std::istringstream bad("ticker,pin,ph,market_cap,transactions\nX,abc,0.1,1,1\n");
    CHECK_THROWS(parse_fixture(bad));
}

TEST_CASE("fixture tables reproduce the published size pattern") {
    const auto records = fixture_records();
    const auto t = build_tables(records, "whole-period");
    CHECK(t.period_count == 1);
    // One period leaves the Q4 column all zero, so only the panel regression is skipped.
    REQUIRE(t.warnings.size() == 1);
    CHECK(t.warnings[0].find("panel regression skipped") != std::string::npos);
    CHECK(t.warnings[0].find("Q4") != std::string::npos);
    CHECK_FALSE(t.panel.has_value());

    const auto& pin_cap = fit_for(t.market_cap, "PIN");
    const auto& ph_cap = fit_for(t.market_cap, "PH");
    CHECK(pin_cap.coefficients[1] == doctest::Approx(-5.211379471827538e-14).epsilon(1e-9));
    CHECK(pin_cap.coefficients[0] == doctest::Approx(0.19698157053098256).epsilon(1e-9));
    CHECK(pin_cap.p_values[1] == doctest::Approx(0.0022774228261116278).epsilon(1e-7));
    CHECK(pin_cap.p_values[1] < 0.01);
    CHECK(ph_cap.coefficients[1] == doctest::Approx(5.439578534442811e-16).epsilon(1e-8));
    CHECK(ph_cap.p_values[1] == doctest::Approx(0.8885401718218631).epsilon(1e-7));

    const auto& pin_vol = fit_for(t.volume, "PIN");
    const auto& ph_vol = fit_for(t.volume, "PH");
    CHECK(pin_vol.coefficients[1] < 0.0);
    CHECK(ph_vol.p_values[1] == doctest::Approx(0.9336540812116741).epsilon(1e-7));

    REQUIRE(t.size_profile.has_value());
    const auto& prof = *t.size_profile;
    CHECK(prof.groups.size() == 9);
    CHECK(prof.pin_fit.coefficients[1] == doctest::Approx(-0.002462666666666666).epsilon(1e-9));
    CHECK(prof.ph_fit.p_values[1] == doctest::Approx(0.7864343232548199).epsilon(1e-7));

    CHECK(t.pin_differences.labels.size() == 1);
    CHECK(t.pin_differences.cells[0][0]->difference == 0.0);
}

TEST_CASE("multi-period tables") {
    std::vector<Record> records;
    const char* labels[] = {"2008-Q1", "2008-Q2", "2008-Q3", "2008-Q4"};
    int k = 0;
    for (const auto& f : load_fixture()) {
        for (int q = 0; q < 4; ++q) {
            const double bump = q == 3 ? -0.03 : 0.0;
            const double jitter = 0.001 * ((k++ * 7) % 11);
            records.push_back({{f.ticker, labels[q], f.pin + bump + jitter, f.ph + jitter, f.market_cap,
                                f.transactions, q == 3 ? 1 : 0},
                               ParameterSet{0.4, 0.5, 100.0 + q, 50.0, 60.0, 5.0, 6.0}});
        }
    }
    const auto t = build_tables(records, "quarterly");
    CHECK(t.period_count == 4);
    REQUIRE(t.summary.size() == 9);
    CHECK(t.summary[0].name == "eps_b");
    CHECK(t.summary[7].name == "PH");
    CHECK(t.summary[8].name == "PIN");
    REQUIRE(t.pin_differences.labels.size() == 4);
    CHECK(t.pin_differences.cells[0][3]->difference < 0.0);
    REQUIRE(t.panel.has_value());
    CHECK(t.panel->fit.names == std::vector<std::string>{"const", "mkt.cap", "volume", "Q4", "PIN"});

    std::ostringstream summary, diffs, regs, profile, svg, json;
    write_summary(summary, t);
    CHECK(summary.str().rfind("# scheme=quarterly periods=4\nstatistic,eps_b", 0) == 0);
    write_differences(diffs, t.pin_differences);
    CHECK(diffs.str().find("2008-Q4") != std::string::npos);
    write_regressions(regs, t.market_cap);
    CHECK(regs.str().find("mkt.cap") != std::string::npos);
    write_size_profile(profile, *t.size_profile);
    write_size_chart_svg(svg, *t.size_profile);
    CHECK(svg.str().find("<svg") != std::string::npos);
    write_json(json, t, "# pinph test");
    const auto parsed = nlohmann::json::parse(json.str());
    CHECK(parsed.contains("summary"));
}

TEST_CASE("empty input is rejected") {
    CHECK_THROWS_AS(build_tables(std::vector<Record>{}, "quarterly"), stats::StatsError);
}
