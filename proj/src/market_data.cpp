#include "trendforge/market_data.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "trendforge/error.hpp"
#include "trendforge/numfmt.hpp"

namespace trendforge {

std::string candle_violation(const Candle& c) {
    if (!(c.high >= c.low)) return "high < low";
    if (!(c.low <= std::min(c.open, c.close))) return "low above open/close";
    if (!(c.high >= std::max(c.open, c.close))) return "high below open/close";
    if (!(c.volume >= 0.0)) return "negative volume";
    if (c.num_trades < 0) return "negative trade count";
    if (!(c.close_time > c.open_time)) return "close_time not after open_time";
    return {};
}

CandleSeries::CandleSeries(std::vector<Candle> candles, std::int64_t interval_ms)
    : candles_(std::move(candles)), interval_ms_(interval_ms) {
    if (interval_ms_ <= 0) fail(ErrorKind::Parameter, "interval must be positive");
    for (std::size_t i = 0; i < candles_.size(); ++i) {
        if (auto why = candle_violation(candles_[i]); !why.empty())
            fail(ErrorKind::Validation, "candle " + std::to_string(i) + ": " + why);
        if (i > 0 && candles_[i].open_time <= candles_[i - 1].open_time)
            fail(ErrorKind::Validation, "candle " + std::to_string(i) + ": open_time not strictly increasing");
    }
}

namespace {

template <class F>
std::vector<double> project(std::span<const Candle> candles, F field) {
    std::vector<double> out;
    out.reserve(candles.size());
    for (const auto& c : candles) out.push_back(field(c));
    return out;
}

}  // namespace

std::vector<double> CandleSeries::closes() const { return project(candles_, [](const Candle& c) { return c.close; }); }
std::vector<double> CandleSeries::highs() const { return project(candles_, [](const Candle& c) { return c.high; }); }
std::vector<double> CandleSeries::lows() const { return project(candles_, [](const Candle& c) { return c.low; }); }
std::vector<double> CandleSeries::volumes() const {
    return project(candles_, [](const Candle& c) { return c.volume; });
}
std::vector<EpochMs> CandleSeries::open_times() const {
    std::vector<EpochMs> out;
    out.reserve(candles_.size());
    for (const auto& c : candles_) out.push_back(c.open_time);
    return out;
}

namespace {

constexpr std::pair<std::string_view, std::int64_t> kIntervals[] = {
    {"1m", 60'000},        {"3m", 180'000},        {"5m", 300'000},         {"15m", 900'000},
    {"30m", 1'800'000},    {"1h", 3'600'000},      {"2h", 7'200'000},       {"4h", 14'400'000},
    {"6h", 21'600'000},    {"8h", 28'800'000},     {"12h", 43'200'000},     {"1d", 86'400'000},
    {"3d", 259'200'000},   {"1w", 604'800'000},
};

}  // namespace

std::int64_t interval_from_string(std::string_view name) {
    for (auto [n, ms] : kIntervals)
        if (n == name) return ms;
    fail(ErrorKind::Parameter, "unsupported interval '" + std::string(name) + "'");
}

std::string interval_to_string(std::int64_t interval_ms) {
    for (auto [n, ms] : kIntervals)
        if (ms == interval_ms) return std::string(n);
    fail(ErrorKind::Parameter, "unsupported interval of " + std::to_string(interval_ms) + " ms");
}

std::vector<EpochMs> missing_open_times(const CandleSeries& series, EpochMs start, EpochMs end) {
    std::vector<EpochMs> missing;
    const auto step = series.interval_ms();
    const auto candles = series.candles();
    std::size_t j = 0;
    for (EpochMs t = start; t < end; t += step) {
        while (j < candles.size() && candles[j].open_time < t) ++j;
        if (j < candles.size() && candles[j].open_time == t) continue;
        missing.push_back(t);
    }
    return missing;
}

std::vector<EpochMs> missing_open_times(const CandleSeries& series) {
    if (series.empty()) return {};
    const auto candles = series.candles();
    return missing_open_times(series, candles.front().open_time, candles.back().open_time + series.interval_ms());
}

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t pos = 0;
    while (true) {
        auto comma = line.find(',', pos);
        if (comma == std::string_view::npos) {
            fields.push_back(line.substr(pos));
            break;
        }
        fields.push_back(line.substr(pos, comma - pos));
        pos = comma + 1;
    }
    return fields;
}

[[noreturn]] void row_error(ErrorKind kind, std::size_t row, const std::string& what) {
    fail(kind, "row " + std::to_string(row) + ": " + what);
}

double real_field(std::string_view text, std::size_t row, const char* name) {
    auto v = parse_real(text);
    if (!v || !std::isfinite(*v)) row_error(ErrorKind::Parse, row, std::string("malformed ") + name + " '" + std::string(text) + "'");
    return *v;
}

std::int64_t int_field(std::string_view text, std::size_t row, const char* name) {
    if (auto v = parse_int(text)) return *v;
    // Some dumps write integral columns as "123.0".
    if (auto r = parse_real(text); r && std::isfinite(*r) && *r == static_cast<double>(static_cast<std::int64_t>(*r)))
        return static_cast<std::int64_t>(*r);
    row_error(ErrorKind::Parse, row, std::string("malformed ") + name + " '" + std::string(text) + "'");
}

}  // namespace

ParseResult parse_klines(std::istream& in, std::int64_t interval_ms) {
    if (interval_ms <= 0) fail(ErrorKind::Parameter, "interval must be positive");
    std::vector<std::pair<Candle, std::size_t>> rows;  // candle, source row number
    std::string line;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        std::string_view view(line);
        if (!view.empty() && view.back() == '\r') view.remove_suffix(1);
        if (view.empty()) continue;
        // Tolerate a header line on the first row (newer dumps ship one).
        if (row == 1 && !view.empty() && std::isalpha(static_cast<unsigned char>(view.front()))) continue;
        auto f = split_fields(view);
        if (f.size() < 11)
            row_error(ErrorKind::Parse, row, "expected at least 11 fields, got " + std::to_string(f.size()));
        Candle c;
        c.open_time = int_field(f[0], row, "open_time");
        c.open = real_field(f[1], row, "open");
        c.high = real_field(f[2], row, "high");
        c.low = real_field(f[3], row, "low");
        c.close = real_field(f[4], row, "close");
        c.volume = real_field(f[5], row, "volume");
        c.close_time = int_field(f[6], row, "close_time");
        c.quote_asset_volume = real_field(f[7], row, "quote_asset_volume");
        c.num_trades = int_field(f[8], row, "num_trades");
        c.taker_buy_base_volume = real_field(f[9], row, "taker_buy_base_volume");
        c.taker_buy_quote_volume = real_field(f[10], row, "taker_buy_quote_volume");
        if (auto why = candle_violation(c); !why.empty()) row_error(ErrorKind::Validation, row, why);
        rows.emplace_back(c, row);
    }
    if (rows.empty()) fail(ErrorKind::EmptyInput, "klines input contains no rows");

    ParseResult result;
    result.rows_read = rows.size();
    // stable sort keeps file order among equal open times, so unique() keeps the first.
    std::stable_sort(rows.begin(), rows.end(),
                     [](const auto& a, const auto& b) { return a.first.open_time < b.first.open_time; });
    std::vector<Candle> candles;
    candles.reserve(rows.size());
    for (const auto& [c, r] : rows) {
        if (!candles.empty() && candles.back().open_time == c.open_time) {
            ++result.duplicates_dropped;
            continue;
        }
        candles.push_back(c);
    }
    result.series = CandleSeries(std::move(candles), interval_ms);
    result.missing = missing_open_times(result.series);
    return result;
}

ParseResult parse_klines_csv(const std::filesystem::path& path, std::int64_t interval_ms) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::MissingArtifact, "cannot open klines file " + path.string());
    return parse_klines(in, interval_ms);
}

void write_klines(std::ostream& out, const CandleSeries& series) {
    for (const auto& c : series.candles()) {
        out << c.open_time << ',' << format_shortest(c.open) << ',' << format_shortest(c.high) << ','
            << format_shortest(c.low) << ',' << format_shortest(c.close) << ',' << format_shortest(c.volume) << ','
            << c.close_time << ',' << format_shortest(c.quote_asset_volume) << ',' << c.num_trades << ','
            << format_shortest(c.taker_buy_base_volume) << ',' << format_shortest(c.taker_buy_quote_volume) << ",0\n";
    }
}

void write_klines_csv(const std::filesystem::path& path, const CandleSeries& series) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorKind::Parameter, "cannot write " + path.string());
    write_klines(out, series);
}

}  // namespace trendforge
