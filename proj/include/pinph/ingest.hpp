#pragma once

// Trade and market-index ingestion: parsing, trade signing, daily
// aggregation, indicator alignment, universe filter and periodization.

#include <chrono>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "pinph/model.hpp"

namespace pinph {

using Date = std::chrono::sys_days;
using Timestamp = std::chrono::sys_time<std::chrono::microseconds>;

/// Malformed input, addressed by 1-based line number and field name.
class ParseError : public std::runtime_error {
public:
    ParseError(std::size_t line, std::string field, const std::string& message);
    std::size_t line() const noexcept { return line_; }
    const std::string& field() const noexcept { return field_; }

private:
    std::size_t line_;
    std::string field_;
};

Date parse_date(std::string_view text);
std::string format_date(Date date);
Timestamp parse_timestamp(std::string_view text);
std::string format_timestamp(Timestamp ts);

enum class Side : char { Buy = 'B', Sell = 'S', Unknown = 'U' };

struct TradeRecord {
    Timestamp timestamp;
    std::string asset_id;
    double price{0.0};
    int64_t quantity{0};
    Side side{Side::Unknown};

    friend bool operator==(const TradeRecord&, const TradeRecord&) = default;
};

struct TextFormat {
    char delimiter{','};
};

/// Reads `timestamp,ticker,price,quantity,side`. Blank lines and lines
/// starting with '#' are skipped.
std::vector<TradeRecord> parse_trades(std::istream& in, TextFormat format = {});
void write_trades(std::ostream& out, std::span<const TradeRecord> trades);

enum class SignMethod { PreSigned, TickTest };

/// Pre-signed passes sides through and rejects unknowns. Tick test: uptick
/// buys, downtick sells, zero tick repeats the previous sign, and each
/// asset's first trade is a buy. Input must be sorted by (asset, timestamp).
std::vector<TradeRecord> classify_trade_signs(std::vector<TradeRecord> trades, SignMethod method);

struct DayCell {
    int64_t buys{0};
    int64_t sells{0};
    friend bool operator==(const DayCell&, const DayCell&) = default;
};

struct AssetMetadata {
    double market_cap{0.0};         ///< quote currency units
    double mean_daily_volume{0.0};
    bool is_equity{true};
};

struct AssetDayPanel {
    std::map<std::string, std::map<Date, DayCell>> assets;
    std::map<std::string, AssetMetadata> metadata;

    int64_t total_trades() const;
    std::size_t day_count(const std::string& asset) const;
};

/// Transaction counts per asset and calendar day; quantity is ignored.
AssetDayPanel aggregate_daily(std::span<const TradeRecord> signed_trades);

/// Reads `date,ticker,buys,sells`.
AssetDayPanel parse_counts(std::istream& in, TextFormat format = {});

/// `market_cap` is read in millions and stored in units.
std::map<std::string, AssetMetadata> parse_metadata(std::istream& in, TextFormat format = {});

struct MarketSeries {
    std::vector<Date> dates;
    std::vector<double> returns;
    std::vector<Indicator> indicators;
};

/// Reads `date,return` or `date,close`; closes become simple returns from the
/// second row on.
MarketSeries parse_market(std::istream& in, TextFormat format = {});
MarketSeries make_market_series(std::vector<Date> dates, std::vector<double> returns);

/// Maps each trading day to I_{t-1}, the sign of the previous trading day's
/// market return. The first market day has no entry.
struct IndicatorSeries {
    std::map<Date, Indicator> prior;

    std::vector<Date> trading_days() const;
};

IndicatorSeries build_indicator_series(const MarketSeries& market);

/// Keeps equities (assets without metadata count as equities) that have at
/// least one buy and one sell on every trading day.
AssetDayPanel filter_universe(const AssetDayPanel& panel, std::span<const Date> trading_days);

enum class PeriodScheme { Quarterly, Monthly };

PeriodScheme parse_scheme(std::string_view text);
std::string_view to_string(PeriodScheme scheme);
std::string period_label(Date date, PeriodScheme scheme);
/// True when the labelled period lies in calendar Q4.
bool is_fourth_quarter(std::string_view period_label);

/// One window per asset per period in calendar order. Days lacking a prior
/// market return are dropped and reported in `warnings`.
std::vector<EstimationWindow> partition_periods(const AssetDayPanel& panel,
                                                const IndicatorSeries& indicators,
                                                PeriodScheme scheme,
                                                std::vector<std::string>* warnings = nullptr);

/// Panel artifact `date,ticker,buys,sells,indicator`, indicator being I_{t-1}.
void write_panel(std::ostream& out, const AssetDayPanel& panel, const IndicatorSeries& indicators);
struct PanelArtifact {
    AssetDayPanel panel;
    IndicatorSeries indicators;
};
PanelArtifact parse_panel(std::istream& in, TextFormat format = {});

/// Writes one window as counts rows dated by `dates`, without a header so
/// several assets can share a file.
void write_counts(std::ostream& out, const std::string& asset_id, std::span<const Date> dates,
                  std::span<const DailyCounts> days);

/// Expands daily counts into one pre-signed trade row per transaction.
std::vector<TradeRecord> expand_to_trades(const std::string& asset_id,
                                          std::span<const Date> dates,
                                          std::span<const DailyCounts> days, double price = 100.0);

}  // namespace pinph
