#include <algorithm>
#include <set>
#include <sstream>

#include "doctest.h"
#include "pinph/ingest.hpp"
#include "pinph/simulator.hpp"

using namespace pinph;
using namespace std::chrono;

namespace {

Date d(int y, unsigned m, unsigned day) { return sys_days{year{y} / month{m} / std::chrono::day{day}}; }

TradeRecord trade(const char* ts, const char* asset, double price, Side side = Side::Unknown,
                  int64_t qty = 1) {
    return {parse_timestamp(ts), asset, price, qty, side};
}

std::vector<Date> business_days(Date from, int n) {
    std::vector<Date> out;
    for (Date x = from; static_cast<int>(out.size()) < n; x += days{1}) {
        const weekday wd{x};
        if (wd != Saturday && wd != Sunday) out.push_back(x);
    }
    return out;
}

}  // namespace

TEST_CASE("dates and timestamps") {
    CHECK(parse_date("2008-03-31") == d(2008, 3, 31));
    CHECK(format_date(d(2008, 1, 2)) == "2008-01-02");
    CHECK_THROWS(parse_date("2008-02-30"));
    CHECK_THROWS(parse_date("yesterday"));
    const auto t = parse_timestamp("2008-01-02T09:30:00.250");
    CHECK(t == parse_timestamp("2008-01-02 09:30:00.250Z"));
    CHECK(format_timestamp(t) == "2008-01-02T09:30:00.250000");
    CHECK(parse_timestamp(format_timestamp(t)) == t);
    CHECK_THROWS(parse_timestamp("2008-01-02T25:00:00"));
}

TEST_CASE("trade parsing") {
    SUBCASE("header only gives no trades") {
        std::istringstream in("timestamp,ticker,price,quantity,side\n");
        CHECK(parse_trades(in).empty());
        std::istringstream empty("");
        CHECK(parse_trades(empty).empty());
    }
    SUBCASE("three rows round-trip") {
        const std::string text =
            "timestamp,ticker,price,quantity,side\n"
            "# comment\n"
            "2008-01-02T09:00:00,OTP,5000.5,10,B\n"
            "2008-01-02T09:00:01,OTP,5001,1,S\n"
            "\n"
            "2008-01-02T09:00:02,MOL,20000,3,U\n";
        std::istringstream in(text);
        const auto trades = parse_trades(in);
        REQUIRE(trades.size() == 3);
        CHECK(trades[0].asset_id == "OTP");
        CHECK(trades[0].price == 5000.5);
        CHECK(trades[0].quantity == 10);
        CHECK(trades[1].side == Side::Sell);
        CHECK(trades[2].side == Side::Unknown);
        std::ostringstream out;
        write_trades(out, trades);
        std::istringstream back(out.str());
        CHECK(parse_trades(back) == trades);
    }
    SUBCASE("bad rows are line addressed") {
        std::istringstream in(
            "timestamp,ticker,price,quantity,side\n"
            "2008-01-02T09:00:00,OTP,100,1,B\n"
            "2008-01-02T09:00:01,OTP,-3,1,B\n");
        try {
            parse_trades(in);
            FAIL("expected a parse error");
        } catch (const ParseError& e) {
            CHECK(e.line() == 3);
            CHECK(e.field() == "price");
        }
        std::istringstream qty("timestamp,ticker,price,quantity,side\n2008-01-02T09:00:00,OTP,1,0,B\n");
        CHECK_THROWS_AS(parse_trades(qty), ParseError);
        std::istringstream side("timestamp,ticker,price,quantity,side\n2008-01-02T09:00:00,OTP,1,1,X\n");
        CHECK_THROWS_AS(parse_trades(side), ParseError);
        std::istringstream header("time,ticker,price\n");
        CHECK_THROWS_AS(parse_trades(header), ParseError);
        std::istringstream width("timestamp,ticker,price,quantity,side\n2008-01-02T09:00:00,OTP,1\n");
        CHECK_THROWS_AS(parse_trades(width), ParseError);
    }
    SUBCASE("alternative delimiter") {
        std::istringstream in("timestamp;ticker;price;quantity;side\n2008-01-02T09:00:00;OTP;1;1;B\n");
        CHECK(parse_trades(in, {';'}).size() == 1);
    }
}

TEST_CASE("trade signing") {
    std::vector<TradeRecord> ticks{trade("2008-01-02T09:00:00", "A", 100), trade("2008-01-02T09:00:01", "A", 101),
                                   trade("2008-01-02T09:00:02", "A", 101), trade("2008-01-02T09:00:03", "A", 99)};
    const auto signed_ticks = classify_trade_signs(ticks, SignMethod::TickTest);
    std::string sides;
    for (const auto& t : signed_ticks) sides += static_cast<char>(t.side);
    CHECK(sides == "BBBS");

    const std::vector<TradeRecord> single{trade("2008-01-02T09:00:00", "A", 100, Side::Sell)};
    CHECK(classify_trade_signs(single, SignMethod::TickTest)[0].side == Side::Buy);

    // A new asset restarts the tick test.
    std::vector<TradeRecord> two{trade("2008-01-02T09:00:00", "A", 100), trade("2008-01-02T09:00:01", "A", 90),
                                 trade("2008-01-02T09:00:00", "B", 50)};
    const auto s2 = classify_trade_signs(two, SignMethod::TickTest);
    CHECK(s2[1].side == Side::Sell);
    CHECK(s2[2].side == Side::Buy);

    std::vector<TradeRecord> pre{trade("2008-01-02T09:00:00", "A", 100, Side::Sell),
                                 trade("2008-01-02T09:00:01", "A", 101, Side::Buy)};
    CHECK(classify_trade_signs(pre, SignMethod::PreSigned) == pre);
    pre.push_back(trade("2008-01-02T09:00:02", "A", 101, Side::Unknown));
    try {
        classify_trade_signs(pre, SignMethod::PreSigned);
        FAIL("expected rejection");
    } catch (const std::exception& e) {
        CHECK(std::string(e.what()).find("3") != std::string::npos);
    }
}

TEST_CASE("daily aggregation counts transactions") {
    const std::vector<TradeRecord> trades{
        trade("2008-01-02T10:00:00", "A", 100, Side::Buy, 1),
        trade("2008-01-02T11:00:00", "A", 100, Side::Buy, 1000000),
        trade("2008-01-02T23:59:59.999", "A", 100, Side::Sell),
        trade("2008-01-03T00:00:00", "A", 100, Side::Sell),
    };
    const auto panel = aggregate_daily(trades);
    CHECK(panel.assets.at("A").at(d(2008, 1, 2)) == DayCell{2, 1});
    CHECK(panel.assets.at("A").at(d(2008, 1, 3)) == DayCell{0, 1});
    CHECK(panel.total_trades() == 4);
    CHECK(panel.day_count("A") == 2);
    CHECK(panel.day_count("Z") == 0);
}

TEST_CASE("market series and indicators") {
    const auto m = make_market_series({d(2008, 1, 2), d(2008, 1, 3), d(2008, 1, 4)}, {-0.02, 0.01, 0.0});
    CHECK(m.indicators == std::vector<Indicator>{Indicator::Down, Indicator::Up, Indicator::Up});
    const auto ind = build_indicator_series(m);
    CHECK(ind.prior.size() == 2);
    CHECK_FALSE(ind.prior.contains(d(2008, 1, 2)));
    CHECK(ind.prior.at(d(2008, 1, 3)) == Indicator::Down);
    CHECK(ind.prior.at(d(2008, 1, 4)) == Indicator::Up);

    std::istringstream closes("date,close\n2008-01-02,100\n2008-01-03,99\n2008-01-04,99\n");
    const auto c = parse_market(closes);
    REQUIRE(c.returns.size() == 2);
    CHECK(c.returns[0] == doctest::Approx(-0.01));
    CHECK(c.indicators[1] == Indicator::Up);

    std::istringstream unordered("date,return\n2008-01-03,0.1\n2008-01-02,0.1\n");
    CHECK_THROWS_AS(parse_market(unordered), ParseError);
    CHECK_THROWS_AS(make_market_series({d(2008, 1, 2)}, {}), std::invalid_argument);
}

TEST_CASE("universe filter") {
    const std::vector<Date> cal{d(2008, 1, 2), d(2008, 1, 3)};
    AssetDayPanel panel;
    panel.assets["FULL"] = {{cal[0], {3, 2}}, {cal[1], {1, 1}}};
    panel.assets["NOSELL"] = {{cal[0], {3, 2}}, {cal[1], {4, 0}}};
    panel.assets["MISSING"] = {{cal[0], {3, 2}}};
    panel.assets["BOND"] = {{cal[0], {9, 9}}, {cal[1], {9, 9}}};
    panel.metadata["BOND"] = {1e9, 10.0, false};
    panel.metadata["FULL"] = {2e9, 10.0, true};
    const auto kept = filter_universe(panel, cal);
    CHECK(kept.assets.size() == 1);
    CHECK(kept.assets.at("FULL") == panel.assets.at("FULL"));
    const auto twice = filter_universe(kept, cal);
    CHECK(twice.assets == kept.assets);
}

TEST_CASE("periods") {
    CHECK(parse_scheme("quarterly") == PeriodScheme::Quarterly);
    CHECK(parse_scheme("monthly") == PeriodScheme::Monthly);
    CHECK_THROWS(parse_scheme("weekly"));
    CHECK(to_string(PeriodScheme::Monthly) == "monthly");
    CHECK(period_label(d(2008, 9, 30), PeriodScheme::Quarterly) == "2008-Q3");
    CHECK(period_label(d(2008, 9, 30), PeriodScheme::Monthly) == "2008-09");
    CHECK(is_fourth_quarter("2008-Q4"));
    CHECK(is_fourth_quarter("2008-11"));
    CHECK_FALSE(is_fourth_quarter("2008-Q3"));
    CHECK_FALSE(is_fourth_quarter("2008-09"));

    // Anchor day plus a full year of business days.
    const auto cal = business_days(d(2007, 12, 31), 263);
    std::vector<double> returns(cal.size());
    for (std::size_t i = 0; i < returns.size(); ++i) returns[i] = i % 3 ? 0.01 : -0.01;
    const auto ind = build_indicator_series(make_market_series(cal, returns));
    AssetDayPanel panel;
    for (const auto& x : cal) {
        panel.assets["A"][x] = {2, 3};
        panel.assets["B"][x] = {1, 1};
    }
    std::vector<std::string> warnings;
    const auto q = partition_periods(panel, ind, PeriodScheme::Quarterly, &warnings);
    CHECK(q.size() == 8);
    CHECK(q[0].asset_id == "A");
    CHECK(q[0].period_label == "2008-Q1");
    CHECK(warnings.size() >= 1);
    std::size_t total = 0;
    std::set<std::string> labels;
    for (const auto& w : q) {
        if (w.asset_id == "A") total += w.days.size();
        labels.insert(w.period_label);
    }
    CHECK(total == cal.size() - 1);
    CHECK(labels.size() == 4);
    CHECK(partition_periods(panel, ind, PeriodScheme::Monthly).size() == 24);

    AssetDayPanel one_quarter;
    for (const auto& x : cal) {
        if (x >= d(2008, 4, 1) && x < d(2008, 7, 1)) one_quarter.assets["A"][x] = {1, 1};
    }
    CHECK(partition_periods(one_quarter, ind, PeriodScheme::Quarterly).size() == 1);
}

TEST_CASE("panel artifact and counts round trip") {
    const auto cal = business_days(d(2008, 1, 1), 30);
    SimulationSpec spec;
    spec.params = {0.4, 0.5, 30.0, 20.0, 25.0, 5.0, 5.0};
    spec.n_days = 29;
    spec.seed = 3;
    std::vector<double> returns(cal.size(), 0.0);
    const auto market = make_market_series(cal, returns);
    const auto ind = build_indicator_series(market);
    spec.indicators.assign(29, Indicator::Up);
    const auto window = simulate_window(spec);
    const std::vector<Date> days(cal.begin() + 1, cal.end());

    std::ostringstream counts;
    counts << "date,ticker,buys,sells\n";
    write_counts(counts, "SIM01", days, window.days);
    std::istringstream counts_in(counts.str());
    const auto panel = parse_counts(counts_in);
    REQUIRE(panel.day_count("SIM01") == 29);

    // simulate -> trades -> parse -> aggregate reproduces the counts.
    std::ostringstream trades_out;
    write_trades(trades_out, expand_to_trades("SIM01", days, window.days));
    std::istringstream trades_in(trades_out.str());
    const auto reagg = aggregate_daily(classify_trade_signs(parse_trades(trades_in), SignMethod::PreSigned));
    for (std::size_t i = 0; i < days.size(); ++i) {
        const auto& cell = reagg.assets.at("SIM01").at(days[i]);
        const auto& original = panel.assets.at("SIM01").at(days[i]);
        CHECK(cell == original);
        CHECK(cell.buys == window.days[i].buys);
    }
    CHECK(filter_universe(reagg, days).assets.size() == 1);

    std::ostringstream artifact;
    write_panel(artifact, panel, ind);
    std::istringstream artifact_in(artifact.str());
    const auto back = parse_panel(artifact_in);
    CHECK(back.panel.assets == panel.assets);
    for (const auto& x : days) CHECK(back.indicators.prior.at(x) == ind.prior.at(x));
}

TEST_CASE("metadata") {
    std::istringstream in("ticker,market_cap,mean_daily_volume,is_equity\nOTP,1500.5,200,true\nBOND,10,1,false\n");
    const auto m = parse_metadata(in);
    CHECK(m.at("OTP").market_cap == doctest::Approx(1.5005e9));
    CHECK(m.at("OTP").is_equity);
    CHECK_FALSE(m.at("BOND").is_equity);
    std::istringstream dup("ticker,market_cap,mean_daily_volume,is_equity\nA,1,1,1\nA,1,1,1\n");
    CHECK_THROWS_AS(parse_metadata(dup), ParseError);
}
