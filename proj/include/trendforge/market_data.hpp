#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace trendforge {

using EpochMs = std::int64_t;

/// One exchange kline. Field order follows the 12-column klines layout.
struct Candle {
    EpochMs open_time = 0;
    double open = 0.0;
    double high = 0.0;
    double low = 0.0;
    double close = 0.0;
    double volume = 0.0;
    EpochMs close_time = 0;
    double quote_asset_volume = 0.0;
    std::int64_t num_trades = 0;
    double taker_buy_base_volume = 0.0;
    double taker_buy_quote_volume = 0.0;

    friend bool operator==(const Candle&, const Candle&) = default;
};

/// Empty string when the candle satisfies every OHLC/volume/time invariant,
/// otherwise a description of the first violation.
std::string candle_violation(const Candle& candle);

/// Candles ordered by strictly increasing open_time. Missing bars are not
/// imputed; gaps are surfaced by `missing_open_times`.
class CandleSeries {
public:
    CandleSeries() = default;
    /// Throws Validation if open times are not strictly increasing or a candle is invalid.
    CandleSeries(std::vector<Candle> candles, std::int64_t interval_ms);

    std::span<const Candle> candles() const noexcept { return candles_; }
    std::int64_t interval_ms() const noexcept { return interval_ms_; }
    std::size_t size() const noexcept { return candles_.size(); }
    bool empty() const noexcept { return candles_.empty(); }
    const Candle& operator[](std::size_t i) const { return candles_[i]; }

    std::vector<double> closes() const;
    std::vector<double> highs() const;
    std::vector<double> lows() const;
    std::vector<double> volumes() const;
    std::vector<EpochMs> open_times() const;

    friend bool operator==(const CandleSeries&, const CandleSeries&) = default;

private:
    std::vector<Candle> candles_;
    std::int64_t interval_ms_ = 0;
};

/// "1m", "15m", "1h", "1d", ... → milliseconds. Throws Parameter for unsupported names.
std::int64_t interval_from_string(std::string_view name);
std::string interval_to_string(std::int64_t interval_ms);

/// Open times the series should contain between its first and last bar but does not.
std::vector<EpochMs> missing_open_times(const CandleSeries& series);
/// Open times expected in [start, end) at the given interval but absent from the series.
std::vector<EpochMs> missing_open_times(const CandleSeries& series, EpochMs start, EpochMs end);

struct ParseResult {
    CandleSeries series;
    std::size_t rows_read = 0;
    std::size_t duplicates_dropped = 0;
    std::vector<EpochMs> missing;
};

/// Parses klines CSV. Rows are sorted by open_time; for duplicate open times
/// the first occurrence in file order is kept.
ParseResult parse_klines(std::istream& in, std::int64_t interval_ms);
ParseResult parse_klines_csv(const std::filesystem::path& path, std::int64_t interval_ms);

void write_klines(std::ostream& out, const CandleSeries& series);
void write_klines_csv(const std::filesystem::path& path, const CandleSeries& series);

struct FetchOptions {
    /// Scheme + host (+ optional path prefix). Empty: $TRENDFORGE_API_BASE, else the public exchange API.
    std::string base_url;
    std::size_t page_limit = 1000;
    int max_attempts = 3;
    std::chrono::milliseconds backoff_base{1000};
    std::chrono::seconds timeout{30};
    /// Replaced in tests to observe backoff without waiting.
    std::function<void(std::chrono::milliseconds)> sleep;
};

struct FetchResult {
    CandleSeries series;
    std::size_t requests = 0;
    std::size_t duplicates_dropped = 0;
    std::vector<EpochMs> missing;
    bool complete = true;
    std::string error;  // set when complete == false
};

std::string default_api_base();

/// Paginated GET /api/v3/klines over [start, end). Requests are issued sequentially.
/// Throws Network when not a single bar could be fetched; a later page failure
/// returns the bars fetched so far with complete == false.
FetchResult fetch_klines(const std::string& symbol, std::int64_t interval_ms, EpochMs start, EpochMs end,
                         const FetchOptions& options = {});

}  // namespace trendforge
