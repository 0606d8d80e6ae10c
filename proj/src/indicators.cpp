#include "trendforge/indicators.hpp"

#include <algorithm>
#include <deque>

#include "trendforge/error.hpp"

namespace trendforge::indicators {

namespace {

void require_period(std::size_t period, std::size_t minimum, const char* what) {
    if (period < minimum)
        fail(ErrorKind::Parameter, std::string(what) + " period must be >= " + std::to_string(minimum));
}

IndicatorColumn make_column(std::string name, std::size_t n, std::size_t lookback) {
    return {std::move(name), std::vector<double>(n, kUndefined), lookback};
}

double window_mean(std::span<const double> s, std::size_t end_inclusive, std::size_t period) {
    double sum = 0.0;
    for (std::size_t j = end_inclusive + 1 - period; j <= end_inclusive; ++j) sum += s[j];
    return sum / static_cast<double>(period);
}

template <class Better>
std::vector<double> rolling_extreme(std::span<const double> s, std::size_t period, Better better) {
    std::vector<double> out(s.size(), kUndefined);
    if (period == 0) return out;
    std::deque<std::size_t> window;  // indices, values monotone under `better`
    for (std::size_t i = 0; i < s.size(); ++i) {
        while (!window.empty() && !better(s[window.back()], s[i])) window.pop_back();
        window.push_back(i);
        if (window.front() + period <= i) window.pop_front();
        if (i + 1 >= period) out[i] = s[window.front()];
    }
    return out;
}

}  // namespace

std::vector<double> rolling_max(std::span<const double> series, std::size_t period) {
    return rolling_extreme(series, period, [](double kept, double incoming) { return kept > incoming; });
}

std::vector<double> rolling_min(std::span<const double> series, std::size_t period) {
    return rolling_extreme(series, period, [](double kept, double incoming) { return kept < incoming; });
}

IndicatorColumn sma(std::span<const double> series, std::size_t period) {
    require_period(period, 1, "SMA");
    auto col = make_column("MA" + std::to_string(period), series.size(), period - 1);
    for (std::size_t i = period - 1; i < series.size(); ++i) col.values[i] = window_mean(series, i, period);
    return col;
}

std::vector<double> ema_recursive(std::span<const double> series, std::size_t period) {
    require_period(period, 1, "EMA");
    std::vector<double> out(series.size());
    if (series.empty()) return out;
    const double alpha = 2.0 / (static_cast<double>(period) + 1.0);
    out[0] = series[0];
    for (std::size_t i = 1; i < series.size(); ++i) out[i] = alpha * series[i] + (1.0 - alpha) * out[i - 1];
    return out;
}

IndicatorColumn ema(std::span<const double> series, std::size_t period) {
    auto raw = ema_recursive(series, period);
    auto col = make_column("EMA" + std::to_string(period), series.size(), period - 1);
    for (std::size_t i = period - 1; i < series.size(); ++i) col.values[i] = raw[i];
    return col;
}

IndicatorColumn rsi(std::span<const double> series, std::size_t period) {
    require_period(period, 1, "RSI");
    auto col = make_column("RSI" + std::to_string(period), series.size(), period);
    if (series.size() <= period) return col;
    const double n = static_cast<double>(period);
    auto reading = [](double gain, double loss) {
        if (loss == 0.0) return gain == 0.0 ? 50.0 : 100.0;
        return 100.0 - 100.0 / (1.0 + gain / loss);
    };
    double avg_gain = 0.0, avg_loss = 0.0;
    for (std::size_t i = 1; i <= period; ++i) {
        const double d = series[i] - series[i - 1];
        avg_gain += std::max(d, 0.0);
        avg_loss += std::max(-d, 0.0);
    }
    avg_gain /= n;
    avg_loss /= n;
    col.values[period] = reading(avg_gain, avg_loss);
    for (std::size_t i = period + 1; i < series.size(); ++i) {
        const double d = series[i] - series[i - 1];
        avg_gain = (avg_gain * (n - 1.0) + std::max(d, 0.0)) / n;
        avg_loss = (avg_loss * (n - 1.0) + std::max(-d, 0.0)) / n;
        col.values[i] = reading(avg_gain, avg_loss);
    }
    return col;
}

IndicatorColumn macd(std::span<const double> series) {
    if (series.size() < 26)
        fail(ErrorKind::InsufficientData, "MACD needs at least 26 values, got " + std::to_string(series.size()));
    auto fast = ema_recursive(series, 12);
    auto slow = ema_recursive(series, 26);
    auto col = make_column("MACD", series.size(), 25);
    for (std::size_t i = 25; i < series.size(); ++i) col.values[i] = fast[i] - slow[i];
    return col;
}

IndicatorColumn momentum(std::span<const double> series, std::size_t period) {
    require_period(period, 1, "MOM");
    auto col = make_column("MOM" + std::to_string(period), series.size(), period);
    for (std::size_t i = period; i < series.size(); ++i) col.values[i] = series[i] - series[i - period];
    return col;
}

IndicatorColumn proc(std::span<const double> series, std::size_t period) {
    require_period(period, 1, "PROC");
    auto col = make_column("PROC" + std::to_string(period), series.size(), period);
    for (std::size_t i = period; i < series.size(); ++i) {
        const double base = series[i - period];
        if (base != 0.0) col.values[i] = 100.0 * (series[i] - base) / base;
    }
    return col;
}

namespace {

struct RangeWindows {
    std::vector<double> highest;
    std::vector<double> lowest;
    std::vector<double> close;
};

RangeWindows range_windows(const CandleSeries& bars, std::size_t period) {
    auto highs = bars.highs();
    auto lows = bars.lows();
    return {rolling_max(highs, period), rolling_min(lows, period), bars.closes()};
}

}  // namespace

IndicatorColumn stochastic_k(const CandleSeries& bars, std::size_t period) {
    require_period(period, 1, "%K");
    auto col = make_column("%K" + std::to_string(period), bars.size(), period - 1);
    auto w = range_windows(bars, period);
    for (std::size_t i = period - 1; i < bars.size(); ++i) {
        const double range = w.highest[i] - w.lowest[i];
        col.values[i] = range == 0.0 ? 50.0 : 100.0 * (w.close[i] - w.lowest[i]) / range;
    }
    return col;
}

IndicatorColumn stochastic_d(const IndicatorColumn& k_column, std::size_t period) {
    auto col = make_column("%D" + std::to_string(period), k_column.size(), k_column.lookback + 2);
    for (std::size_t i = col.lookback; i < k_column.size(); ++i)
        col.values[i] = (k_column.values[i - 2] + k_column.values[i - 1] + k_column.values[i]) / 3.0;
    return col;
}

BollingerBands bollinger(std::span<const double> series, std::size_t period, int ddof) {
    require_period(period, 2, "Bollinger");
    if (ddof != 0 && ddof != 1) fail(ErrorKind::Parameter, "Bollinger ddof must be 0 or 1");
    const auto p = std::to_string(period);
    BollingerBands bb{make_column("MA" + p, series.size(), period - 1), make_column("BB_up" + p, series.size(), period - 1),
                      make_column("BB_dn" + p, series.size(), period - 1)};
    for (std::size_t i = period - 1; i < series.size(); ++i) {
        const double mean = window_mean(series, i, period);
        double ss = 0.0;
        for (std::size_t j = i + 1 - period; j <= i; ++j) ss += (series[j] - mean) * (series[j] - mean);
        const double sigma = std::sqrt(ss / static_cast<double>(period - ddof));
        bb.ma.values[i] = mean;
        bb.up.values[i] = mean + 2.0 * sigma;
        bb.dn.values[i] = mean - 2.0 * sigma;
    }
    return bb;
}

IndicatorColumn atr(const CandleSeries& bars, std::size_t period) {
    require_period(period, 1, "ATR");
    auto col = make_column("ATR" + std::to_string(period), bars.size(), period);
    std::vector<double> tr(bars.size(), 0.0);
    for (std::size_t i = 1; i < bars.size(); ++i) {
        const auto& b = bars[i];
        const double prev = bars[i - 1].close;
        tr[i] = std::max({b.high - b.low, std::abs(b.high - prev), std::abs(b.low - prev)});
    }
    for (std::size_t i = period; i < bars.size(); ++i) col.values[i] = window_mean(tr, i, period);
    return col;
}

IndicatorColumn cci(const CandleSeries& bars, std::size_t period) {
    require_period(period, 1, "CCI");
    auto col = make_column("CCI" + std::to_string(period), bars.size(), period - 1);
    std::vector<double> tp(bars.size());
    for (std::size_t i = 0; i < bars.size(); ++i) tp[i] = (bars[i].high + bars[i].low + bars[i].close) / 3.0;
    for (std::size_t i = period - 1; i < bars.size(); ++i) {
        const double mean = window_mean(tp, i, period);
        double mad = 0.0;
        for (std::size_t j = i + 1 - period; j <= i; ++j) mad += std::abs(tp[j] - mean);
        mad /= static_cast<double>(period);
        col.values[i] = mad == 0.0 ? 0.0 : (tp[i] - mean) / (0.015 * mad);
    }
    return col;
}

IndicatorColumn williams_r(const CandleSeries& bars, std::size_t period) {
    require_period(period, 1, "%R");
    auto col = make_column("%R" + std::to_string(period), bars.size(), period - 1);
    auto w = range_windows(bars, period);
    for (std::size_t i = period - 1; i < bars.size(); ++i) {
        const double range = w.highest[i] - w.lowest[i];
        col.values[i] = range == 0.0 ? -50.0 : -100.0 * (w.highest[i] - w.close[i]) / range;
    }
    return col;
}

double money_flow_multiplier(const Candle& bar) {
    const double range = bar.high - bar.low;
    if (range == 0.0) return 0.0;
    return ((bar.close - bar.low) - (bar.high - bar.close)) / range;
}

IndicatorColumn cmf(const CandleSeries& bars, std::size_t period) {
    require_period(period, 1, "CMF");
    auto col = make_column("CMF" + std::to_string(period), bars.size(), period - 1);
    std::vector<double> mfv(bars.size());
    for (std::size_t i = 0; i < bars.size(); ++i) mfv[i] = money_flow_multiplier(bars[i]) * bars[i].volume;
    for (std::size_t i = period - 1; i < bars.size(); ++i) {
        double flow = 0.0, volume = 0.0;
        for (std::size_t j = i + 1 - period; j <= i; ++j) {
            flow += mfv[j];
            volume += bars[j].volume;
        }
        col.values[i] = volume == 0.0 ? 0.0 : flow / volume;
    }
    return col;
}

IndicatorColumn obv(const CandleSeries& bars) {
    auto col = make_column("OBV", bars.size(), 0);
    if (bars.empty()) return col;
    col.values[0] = 0.0;
    for (std::size_t i = 1; i < bars.size(); ++i) {
        const double d = bars[i].close - bars[i - 1].close;
        const double signed_volume = d > 0.0 ? bars[i].volume : (d < 0.0 ? -bars[i].volume : 0.0);
        col.values[i] = col.values[i - 1] + signed_volume;
    }
    return col;
}

IndicatorColumn adl(const CandleSeries& bars) {
    auto col = make_column("ADL", bars.size(), 0);
    double running = 0.0;
    for (std::size_t i = 0; i < bars.size(); ++i) {
        running += money_flow_multiplier(bars[i]) * bars[i].volume;
        col.values[i] = running;
    }
    return col;
}

}  // namespace trendforge::indicators
