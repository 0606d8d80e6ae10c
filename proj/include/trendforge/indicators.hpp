#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "trendforge/market_data.hpp"

namespace trendforge::indicators {

/// A named, bar-aligned indicator series. Warm-up entries hold NaN:
/// values[i] is NaN exactly for i < lookback.
struct IndicatorColumn {
    std::string name;
    std::vector<double> values;
    std::size_t lookback = 0;

    std::size_t size() const noexcept { return values.size(); }
    bool defined(std::size_t i) const { return !std::isnan(values[i]); }
};

inline constexpr double kUndefined = std::numeric_limits<double>::quiet_NaN();

IndicatorColumn sma(std::span<const double> series, std::size_t period);

/// Raw EMA recursion seeded with series[0]; every index is populated.
std::vector<double> ema_recursive(std::span<const double> series, std::size_t period);
/// EMA column; the recursion starts at bar 0 but values before period - 1 are masked.
IndicatorColumn ema(std::span<const double> series, std::size_t period);

/// Wilder-smoothed RSI in [0, 100]. Zero gain and zero loss reads 50.
IndicatorColumn rsi(std::span<const double> series, std::size_t period);

/// EMA12 - EMA26. Throws InsufficientData for fewer than 26 values.
IndicatorColumn macd(std::span<const double> series);

IndicatorColumn momentum(std::span<const double> series, std::size_t period);

/// Percent change over `period` bars; undefined where the base value is 0.
IndicatorColumn proc(std::span<const double> series, std::size_t period);

/// %K over the rolling high/low range; a flat range reads 50.
IndicatorColumn stochastic_k(const CandleSeries& bars, std::size_t period);

/// 3-bar SMA of a %K column.
IndicatorColumn stochastic_d(const IndicatorColumn& k_column, std::size_t period);

struct BollingerBands {
    IndicatorColumn ma;
    IndicatorColumn up;
    IndicatorColumn dn;
};

/// MA ± 2σ over the window; ddof 0 is the population deviation, 1 the sample deviation.
BollingerBands bollinger(std::span<const double> series, std::size_t period, int ddof = 0);

/// Arithmetic mean of the last `period` true ranges (TR is defined from bar 1).
IndicatorColumn atr(const CandleSeries& bars, std::size_t period);

/// (TP - SMA(TP)) / (0.015 MAD); zero MAD reads 0.
IndicatorColumn cci(const CandleSeries& bars, std::size_t period);

/// Williams %R in [-100, 0]; a flat range reads -50.
IndicatorColumn williams_r(const CandleSeries& bars, std::size_t period);

/// Chaikin money flow in [-1, 1].
IndicatorColumn cmf(const CandleSeries& bars, std::size_t period);

IndicatorColumn obv(const CandleSeries& bars);
IndicatorColumn adl(const CandleSeries& bars);

/// ((C - L) - (H - C)) / (H - L), 0 for a bar with H == L.
double money_flow_multiplier(const Candle& bar);

/// Rolling max/min over a trailing window, via monotone deques. Entries before
/// period - 1 are NaN.
std::vector<double> rolling_max(std::span<const double> series, std::size_t period);
std::vector<double> rolling_min(std::span<const double> series, std::size_t period);

}  // namespace trendforge::indicators
