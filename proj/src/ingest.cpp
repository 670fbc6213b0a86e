#include "pinph/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <set>

namespace pinph {

namespace {

using namespace std::chrono;

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return s;
}

std::vector<std::string_view> split(std::string_view line, char delim) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(delim, start);
        out.push_back(trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

// Delimited-text reader skipping blank and '#' comment lines.
class TableReader {
public:
    TableReader(std::istream& in, TextFormat format) : in_(in), format_(format) {}

    bool next(std::vector<std::string_view>& fields) {
        while (std::getline(in_, line_)) {
            ++line_no_;
            const auto t = trim(line_);
            if (t.empty() || t.front() == '#') continue;
            fields = split(t, format_.delimiter);
            return true;
        }
        return false;
    }

    // Reads the header and checks it against one of the accepted layouts;
    // returns the index of the matching layout or -1 when the input is empty.
    int header(std::initializer_list<std::vector<std::string_view>> layouts) {
        std::vector<std::string_view> fields;
        if (!next(fields)) return -1;
        int index = 0;
        for (const auto& layout : layouts) {
            if (fields == layout) return index;
            ++index;
        }
        std::string expected;
        for (const auto& layout : layouts) {
            if (!expected.empty()) expected += " or ";
            for (std::size_t i = 0; i < layout.size(); ++i) {
                expected += (i ? "," : "") + std::string(layout[i]);
            }
        }
        throw ParseError(line_no_, "header", "unexpected header; expected " + expected);
    }

    void expect_width(const std::vector<std::string_view>& fields, std::size_t n) const {
        if (fields.size() != n) {
            throw ParseError(line_no_, "row",
                             "expected " + std::to_string(n) + " fields, found " +
                                 std::to_string(fields.size()));
        }
    }

    std::size_t line() const noexcept { return line_no_; }

private:
    std::istream& in_;
    TextFormat format_;
    std::string line_;
    std::size_t line_no_{0};
};

template <typename T>
T parse_number(std::string_view text, std::size_t line, const char* field) {
    T value{};
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc{} || ptr != end || text.empty()) {
        throw ParseError(line, field, "cannot parse '" + std::string(text) + "' as a number");
    }
    return value;
}

bool parse_flag(std::string_view text, std::size_t line, const char* field) {
    std::string lower(text);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (lower == "1" || lower == "true" || lower == "yes") return true;
    if (lower == "0" || lower == "false" || lower == "no") return false;
    throw ParseError(line, field, "expected a boolean, got '" + std::string(text) + "'");
}

int fixed_digits(std::string_view s, std::size_t pos, std::size_t len) {
    if (pos + len > s.size()) throw std::invalid_argument("truncated");
    int v = 0;
    for (std::size_t i = pos; i < pos + len; ++i) {
        if (s[i] < '0' || s[i] > '9') throw std::invalid_argument("not a digit");
        v = v * 10 + (s[i] - '0');
    }
    return v;
}

Date date_or_throw(std::string_view text, std::size_t line, const char* field) {
    try {
        return parse_date(text);
    } catch (const std::invalid_argument& e) {
        throw ParseError(line, field, e.what());
    }
}

}  // namespace

ParseError::ParseError(std::size_t line, std::string field, const std::string& message)
    : std::runtime_error("line " + std::to_string(line) + ", field '" + field + "': " + message),
      line_(line),
      field_(std::move(field)) {}

Date parse_date(std::string_view text) {
    try {
        if (text.size() != 10 || text[4] != '-' || text[7] != '-') throw std::invalid_argument("");
        const year_month_day ymd{year{fixed_digits(text, 0, 4)},
                                 month{static_cast<unsigned>(fixed_digits(text, 5, 2))},
                                 day{static_cast<unsigned>(fixed_digits(text, 8, 2))}};
        if (!ymd.ok()) throw std::invalid_argument("");
        return sys_days{ymd};
    } catch (const std::invalid_argument&) {
        throw std::invalid_argument("invalid date '" + std::string(text) + "', expected YYYY-MM-DD");
    }
}

std::string format_date(Date date) {
    const year_month_day ymd{date};
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
    return buf;
}

Timestamp parse_timestamp(std::string_view text) {
    const auto fail = [&] {
        return std::invalid_argument("invalid timestamp '" + std::string(text) +
                                     "', expected YYYY-MM-DDTHH:MM:SS[.ffffff][Z]");
    };
    if (text.size() < 19 || (text[10] != 'T' && text[10] != ' ')) throw fail();
    if (!text.empty() && text.back() == 'Z') text.remove_suffix(1);
    try {
        const Date d = parse_date(text.substr(0, 10));
        if (text[13] != ':' || text[16] != ':') throw fail();
        const int hh = fixed_digits(text, 11, 2);
        const int mm = fixed_digits(text, 14, 2);
        const int ss = fixed_digits(text, 17, 2);
        if (hh > 23 || mm > 59 || ss > 60) throw fail();
        int64_t micros = 0;
        if (text.size() > 19) {
            if (text[19] != '.' || text.size() == 20 || text.size() > 26) throw fail();
            const auto frac = text.substr(20);
            micros = fixed_digits(frac, 0, frac.size());
            for (std::size_t i = frac.size(); i < 6; ++i) micros *= 10;
        }
        return Timestamp{d} + hours{hh} + minutes{mm} + seconds{ss} + microseconds{micros};
    } catch (const std::invalid_argument&) {
        throw fail();
    }
}

std::string format_timestamp(Timestamp ts) {
    const Date d = floor<days>(ts);
    const auto tod = ts - Timestamp{d};
    const auto h = duration_cast<hours>(tod);
    const auto m = duration_cast<minutes>(tod - h);
    const auto s = duration_cast<seconds>(tod - h - m);
    const auto us = (tod - h - m - s).count();
    char buf[48];
    if (us == 0) {
        std::snprintf(buf, sizeof buf, "%sT%02d:%02d:%02d", format_date(d).c_str(),
                      static_cast<int>(h.count()), static_cast<int>(m.count()),
                      static_cast<int>(s.count()));
    } else {
        std::snprintf(buf, sizeof buf, "%sT%02d:%02d:%02d.%06lld", format_date(d).c_str(),
                      static_cast<int>(h.count()), static_cast<int>(m.count()),
                      static_cast<int>(s.count()), static_cast<long long>(us));
    }
    return buf;
}

std::vector<TradeRecord> parse_trades(std::istream& in, TextFormat format) {
    TableReader reader(in, format);
    std::vector<TradeRecord> out;
    if (reader.header({{"timestamp", "ticker", "price", "quantity", "side"}}) < 0) return out;
    std::vector<std::string_view> f;
    while (reader.next(f)) {
        const auto line = reader.line();
        reader.expect_width(f, 5);
        TradeRecord r;
        try {
            r.timestamp = parse_timestamp(f[0]);
        } catch (const std::invalid_argument& e) {
            throw ParseError(line, "timestamp", e.what());
        }
        if (f[1].empty()) throw ParseError(line, "ticker", "empty ticker");
        r.asset_id = std::string(f[1]);
        r.price = parse_number<double>(f[2], line, "price");
        if (!(r.price > 0.0) || !std::isfinite(r.price)) {
            throw ParseError(line, "price", "price must be positive, got " + std::string(f[2]));
        }
        r.quantity = parse_number<int64_t>(f[3], line, "quantity");
        if (r.quantity < 1) {
            throw ParseError(line, "quantity", "quantity must be at least 1, got " + std::string(f[3]));
        }
        if (f[4] == "B") {
            r.side = Side::Buy;
        } else if (f[4] == "S") {
            r.side = Side::Sell;
        } else if (f[4] == "U") {
            r.side = Side::Unknown;
        } else {
            throw ParseError(line, "side", "side must be B, S or U, got '" + std::string(f[4]) + "'");
        }
        out.push_back(std::move(r));
    }
    return out;
}

void write_trades(std::ostream& out, std::span<const TradeRecord> trades) {
    out << "timestamp,ticker,price,quantity,side\n";
    char price[32];
    for (const auto& t : trades) {
        std::snprintf(price, sizeof price, "%.17g", t.price);
        out << format_timestamp(t.timestamp) << ',' << t.asset_id << ',' << price << ','
            << t.quantity << ',' << static_cast<char>(t.side) << '\n';
    }
}

std::vector<TradeRecord> classify_trade_signs(std::vector<TradeRecord> trades, SignMethod method) {
    if (method == SignMethod::PreSigned) {
        std::string offending;
        std::size_t count = 0;
        for (std::size_t i = 0; i < trades.size(); ++i) {
            if (trades[i].side != Side::Unknown) continue;
            if (++count <= 20) offending += (offending.empty() ? "" : ", ") + std::to_string(i + 1);
        }
        if (count > 0) {
            throw std::invalid_argument(std::to_string(count) +
                                        " trade(s) have unknown side in pre-signed mode (rows " +
                                        offending + (count > 20 ? ", ..." : "") + ")");
        }
        return trades;
    }
    const std::string* asset = nullptr;
    double last_price = 0.0;
    Side last_side = Side::Buy;
    for (auto& t : trades) {
        if (asset == nullptr || *asset != t.asset_id) {
            t.side = Side::Buy;
        } else if (t.price > last_price) {
            t.side = Side::Buy;
        } else if (t.price < last_price) {
            t.side = Side::Sell;
        } else {
            t.side = last_side;
        }
        asset = &t.asset_id;
        last_price = t.price;
        last_side = t.side;
    }
    return trades;
}

int64_t AssetDayPanel::total_trades() const {
    int64_t total = 0;
    for (const auto& [_, days] : assets) {
        for (const auto& [__, c] : days) total += c.buys + c.sells;
    }
    return total;
}

std::size_t AssetDayPanel::day_count(const std::string& asset) const {
    const auto it = assets.find(asset);
    return it == assets.end() ? 0 : it->second.size();
}

AssetDayPanel aggregate_daily(std::span<const TradeRecord> signed_trades) {
    AssetDayPanel panel;
    for (const auto& t : signed_trades) {
        auto& cell = panel.assets[t.asset_id][floor<days>(t.timestamp)];
        switch (t.side) {
            case Side::Buy: ++cell.buys; break;
            case Side::Sell: ++cell.sells; break;
            case Side::Unknown:
                throw std::invalid_argument("aggregate_daily needs signed trades; " + t.asset_id +
                                            " at " + format_timestamp(t.timestamp) + " is unknown");
        }
    }
    return panel;
}

AssetDayPanel parse_counts(std::istream& in, TextFormat format) {
    TableReader reader(in, format);
    AssetDayPanel panel;
    if (reader.header({{"date", "ticker", "buys", "sells"}}) < 0) return panel;
    std::vector<std::string_view> f;
    while (reader.next(f)) {
        const auto line = reader.line();
        reader.expect_width(f, 4);
        const Date d = date_or_throw(f[0], line, "date");
        if (f[1].empty()) throw ParseError(line, "ticker", "empty ticker");
        const auto b = parse_number<int64_t>(f[2], line, "buys");
        const auto s = parse_number<int64_t>(f[3], line, "sells");
        if (b < 0) throw ParseError(line, "buys", "negative count");
        if (s < 0) throw ParseError(line, "sells", "negative count");
        auto& cell = panel.assets[std::string(f[1])][d];
        cell.buys += b;
        cell.sells += s;
    }
    return panel;
}

std::map<std::string, AssetMetadata> parse_metadata(std::istream& in, TextFormat format) {
    TableReader reader(in, format);
    std::map<std::string, AssetMetadata> out;
    if (reader.header({{"ticker", "market_cap", "mean_daily_volume", "is_equity"}}) < 0) {
        return out;
    }
    std::vector<std::string_view> f;
    while (reader.next(f)) {
        const auto line = reader.line();
        reader.expect_width(f, 4);
        AssetMetadata m;
        m.market_cap = parse_number<double>(f[1], line, "market_cap") * 1e6;
        m.mean_daily_volume = parse_number<double>(f[2], line, "mean_daily_volume");
        m.is_equity = parse_flag(f[3], line, "is_equity");
        if (!out.emplace(std::string(f[0]), m).second) {
            throw ParseError(line, "ticker", "duplicate ticker " + std::string(f[0]));
        }
    }
    return out;
}

MarketSeries make_market_series(std::vector<Date> dates, std::vector<double> returns) {
    if (dates.size() != returns.size()) {
        throw std::invalid_argument("market dates and returns differ in length");
    }
    for (std::size_t i = 1; i < dates.size(); ++i) {
        if (!(dates[i - 1] < dates[i])) {
            throw std::invalid_argument("market dates must be strictly increasing at " +
                                        format_date(dates[i]));
        }
    }
    MarketSeries m{std::move(dates), std::move(returns), {}};
    m.indicators.reserve(m.returns.size());
    for (const double r : m.returns) m.indicators.push_back(indicator_from_return(r));
    return m;
}

MarketSeries parse_market(std::istream& in, TextFormat format) {
    TableReader reader(in, format);
    const int layout = reader.header({{"date", "return"}, {"date", "close"}});
    std::vector<Date> dates;
    std::vector<double> values;
    std::vector<std::string_view> f;
    while (reader.next(f)) {
        const auto line = reader.line();
        reader.expect_width(f, 2);
        const Date d = date_or_throw(f[0], line, "date");
        if (!dates.empty() && !(dates.back() < d)) {
            throw ParseError(line, "date", "dates must be strictly increasing");
        }
        const double v = parse_number<double>(f[1], line, layout == 0 ? "return" : "close");
        if (layout == 1 && !(v > 0.0)) throw ParseError(line, "close", "close must be positive");
        if (!std::isfinite(v)) throw ParseError(line, "return", "value must be finite");
        dates.push_back(d);
        values.push_back(v);
    }
    if (layout != 1) return make_market_series(std::move(dates), std::move(values));
    std::vector<Date> return_dates;
    std::vector<double> returns;
    for (std::size_t i = 1; i < dates.size(); ++i) {
        return_dates.push_back(dates[i]);
        returns.push_back(values[i] / values[i - 1] - 1.0);
    }
    return make_market_series(std::move(return_dates), std::move(returns));
}

std::vector<Date> IndicatorSeries::trading_days() const {
    std::vector<Date> out;
    out.reserve(prior.size());
    for (const auto& [d, _] : prior) out.push_back(d);
    return out;
}

IndicatorSeries build_indicator_series(const MarketSeries& market) {
    IndicatorSeries s;
    for (std::size_t t = 1; t < market.dates.size(); ++t) {
        s.prior.emplace(market.dates[t], market.indicators[t - 1]);
    }
    return s;
}

AssetDayPanel filter_universe(const AssetDayPanel& panel, std::span<const Date> trading_days) {
    AssetDayPanel out;
    out.metadata = panel.metadata;
    for (const auto& [asset, days] : panel.assets) {
        const auto md = panel.metadata.find(asset);
        if (md != panel.metadata.end() && !md->second.is_equity) continue;
        const bool active = std::all_of(trading_days.begin(), trading_days.end(), [&](Date d) {
            const auto it = days.find(d);
            return it != days.end() && it->second.buys >= 1 && it->second.sells >= 1;
        });
        if (active) out.assets.emplace(asset, days);
    }
    return out;
}

PeriodScheme parse_scheme(std::string_view text) {
    if (text == "quarterly") return PeriodScheme::Quarterly;
    if (text == "monthly") return PeriodScheme::Monthly;
    throw std::invalid_argument("scheme must be quarterly or monthly, got '" + std::string(text) +
                                "'");
}

std::string_view to_string(PeriodScheme scheme) {
    return scheme == PeriodScheme::Quarterly ? "quarterly" : "monthly";
}

std::string period_label(Date date, PeriodScheme scheme) {
    const year_month_day ymd{date};
    const auto m = static_cast<unsigned>(ymd.month());
    char buf[32];
    if (scheme == PeriodScheme::Quarterly) {
        std::snprintf(buf, sizeof buf, "%04d-Q%u", static_cast<int>(ymd.year()), (m - 1) / 3 + 1);
    } else {
        std::snprintf(buf, sizeof buf, "%04d-%02u", static_cast<int>(ymd.year()), m);
    }
    return buf;
}

bool is_fourth_quarter(std::string_view label) {
    if (label.size() == 7 && label[4] == '-' && label[5] == 'Q') return label[6] == '4';
    if (label.size() == 7 && label[4] == '-') {
        return label.substr(5) == "10" || label.substr(5) == "11" || label.substr(5) == "12";
    }
    return false;
}

std::vector<EstimationWindow> partition_periods(const AssetDayPanel& panel,
                                                const IndicatorSeries& indicators,
                                                PeriodScheme scheme,
                                                std::vector<std::string>* warnings) {
    std::vector<EstimationWindow> out;
    for (const auto& [asset, days] : panel.assets) {
        std::map<std::string, EstimationWindow> by_period;
        for (const auto& [d, cell] : days) {
            const auto it = indicators.prior.find(d);
            if (it == indicators.prior.end()) {
                if (warnings) {
                    warnings->push_back(asset + " " + format_date(d) +
                                        ": no prior-day market return, day dropped");
                }
                continue;
            }
            const auto label = period_label(d, scheme);
            auto& w = by_period[label];
            w.asset_id = asset;
            w.period_label = label;
            w.days.push_back({cell.buys, cell.sells, it->second});
        }
        for (auto& [_, w] : by_period) out.push_back(std::move(w));
    }
    return out;
}

void write_panel(std::ostream& out, const AssetDayPanel& panel, const IndicatorSeries& indicators) {
    out << "date,ticker,buys,sells,indicator\n";
    for (const auto& [asset, days] : panel.assets) {
        for (const auto& [d, cell] : days) {
            const auto it = indicators.prior.find(d);
            if (it == indicators.prior.end()) continue;
            out << format_date(d) << ',' << asset << ',' << cell.buys << ',' << cell.sells << ','
                << to_int(it->second) << '\n';
        }
    }
}

PanelArtifact parse_panel(std::istream& in, TextFormat format) {
    TableReader reader(in, format);
    PanelArtifact a;
    if (reader.header({{"date", "ticker", "buys", "sells", "indicator"}}) < 0) return a;
    std::vector<std::string_view> f;
    while (reader.next(f)) {
        const auto line = reader.line();
        reader.expect_width(f, 5);
        const Date d = date_or_throw(f[0], line, "date");
        const auto b = parse_number<int64_t>(f[2], line, "buys");
        const auto s = parse_number<int64_t>(f[3], line, "sells");
        if (b < 0 || s < 0) throw ParseError(line, b < 0 ? "buys" : "sells", "negative count");
        const auto ind = parse_number<int>(f[4], line, "indicator");
        if (ind != 1 && ind != -1) throw ParseError(line, "indicator", "indicator must be +1 or -1");
        const auto [it, fresh] = a.indicators.prior.emplace(d, indicator_from_int(ind));
        if (!fresh && it->second != indicator_from_int(ind)) {
            throw ParseError(line, "indicator", "conflicting indicator for " + format_date(d));
        }
        a.panel.assets[std::string(f[1])][d] = {b, s};
    }
    return a;
}

void write_counts(std::ostream& out, const std::string& asset_id, std::span<const Date> dates,
                  std::span<const DailyCounts> days) {
    if (dates.size() < days.size()) throw std::invalid_argument("fewer dates than days");
    for (std::size_t i = 0; i < days.size(); ++i) {
        out << format_date(dates[i]) << ',' << asset_id << ',' << days[i].buys << ','
            << days[i].sells << '\n';
    }
}

std::vector<TradeRecord> expand_to_trades(const std::string& asset_id,
                                          std::span<const Date> dates,
                                          std::span<const DailyCounts> days, double price) {
    if (dates.size() < days.size()) throw std::invalid_argument("fewer dates than days");
    std::vector<TradeRecord> out;
    for (std::size_t i = 0; i < days.size(); ++i) {
        const int64_t n = days[i].buys + days[i].sells;
        // Spread the day's trades over the session starting 09:00.
        const auto open = Timestamp{dates[i]} + hours{9};
        for (int64_t k = 0; k < n; ++k) {
            TradeRecord t;
            t.timestamp = open + microseconds{k * 1000};
            t.asset_id = asset_id;
            t.price = price;
            t.quantity = 1;
            t.side = k < days[i].buys ? Side::Buy : Side::Sell;
            out.push_back(std::move(t));
        }
    }
    return out;
}

}  // namespace pinph
