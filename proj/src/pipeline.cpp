#include "trendforge/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "trendforge/error.hpp"
#include "trendforge/indicators.hpp"
#include "trendforge/labeling.hpp"

namespace trendforge {

FeatureFrame::FeatureFrame(std::vector<EpochMs> timestamps, std::vector<std::string> names,
                           std::vector<std::vector<double>> columns, std::vector<std::uint8_t> labels)
    : timestamps_(std::move(timestamps)),
      names_(std::move(names)),
      columns_(std::move(columns)),
      labels_(std::move(labels)) {
    if (names_.size() != columns_.size()) fail(ErrorKind::Validation, "column name count differs from column count");
    if (timestamps_.size() != labels_.size()) fail(ErrorKind::Validation, "timestamp count differs from label count");
    std::set<std::string> seen;
    for (std::size_t j = 0; j < columns_.size(); ++j) {
        if (!seen.insert(names_[j]).second) fail(ErrorKind::Validation, "duplicate column name " + names_[j]);
        if (columns_[j].size() != labels_.size())
            fail(ErrorKind::Validation, "column " + names_[j] + " has " + std::to_string(columns_[j].size()) +
                                            " rows, expected " + std::to_string(labels_.size()));
        for (std::size_t i = 0; i < columns_[j].size(); ++i)
            if (!std::isfinite(columns_[j][i]))
                fail(ErrorKind::Validation, "column " + names_[j] + " row " + std::to_string(i) + " is undefined");
    }
    for (auto y : labels_)
        if (y > 1) fail(ErrorKind::Validation, "labels must be 0 or 1");
}

std::optional<std::size_t> FeatureFrame::index_of(const std::string& name) const {
    auto it = std::find(names_.begin(), names_.end(), name);
    if (it == names_.end()) return std::nullopt;
    return static_cast<std::size_t>(it - names_.begin());
}

std::span<const double> FeatureFrame::column(const std::string& name) const {
    auto j = index_of(name);
    if (!j) fail(ErrorKind::Parameter, "no column named " + name);
    return columns_[*j];
}

std::vector<double> FeatureFrame::row(std::size_t i) const {
    std::vector<double> out(cols());
    for (std::size_t j = 0; j < cols(); ++j) out[j] = columns_[j][i];
    return out;
}

FeatureFrame FeatureFrame::select_columns(std::span<const std::string> names) const {
    std::vector<std::vector<double>> cols;
    cols.reserve(names.size());
    for (const auto& n : names) {
        auto c = column(n);
        cols.emplace_back(c.begin(), c.end());
    }
    return FeatureFrame(timestamps_, {names.begin(), names.end()}, std::move(cols), labels_);
}

FeatureFrame build_frame(const CandleSeries& candles, const FeatureSpec& spec, FrameBuildInfo* info) {
    namespace ind = indicators;
    const auto closes = candles.closes();
    const std::size_t n = candles.size();

    std::vector<ind::IndicatorColumn> cols;
    if (spec.include_close) cols.push_back({"Close", closes, 0});
    if (spec.include_volume) cols.push_back({"Volume", candles.volumes(), 0});
    for (auto p : spec.rsi) cols.push_back(ind::rsi(closes, p));
    for (auto p : spec.mom) cols.push_back(ind::momentum(closes, p));
    if (spec.include_macd) {
        if (n < 26)
            fail(ErrorKind::InsufficientData,
                 "insufficient data: " + std::to_string(n) + " bars, MACD needs at least 26");
        cols.push_back(ind::macd(closes));
    }
    for (auto p : spec.proc) cols.push_back(ind::proc(closes, p));
    for (auto p : spec.ema) cols.push_back(ind::ema(closes, p));
    std::vector<ind::IndicatorColumn> ks;
    for (auto p : spec.stoch) ks.push_back(ind::stochastic_k(candles, p));
    for (const auto& k : ks) cols.push_back(k);
    for (std::size_t i = 0; i < ks.size(); ++i) cols.push_back(ind::stochastic_d(ks[i], spec.stoch[i]));
    for (auto p : spec.bb) {
        auto bands = ind::bollinger(closes, p, spec.bb_ddof);
        cols.push_back(std::move(bands.ma));
        cols.push_back(std::move(bands.up));
        cols.push_back(std::move(bands.dn));
    }
    for (auto p : spec.atr) cols.push_back(ind::atr(candles, p));
    for (auto p : spec.cci) cols.push_back(ind::cci(candles, p));
    for (auto p : spec.williams_r) cols.push_back(ind::williams_r(candles, p));
    for (auto p : spec.cmf) cols.push_back(ind::cmf(candles, p));
    if (spec.include_obv) cols.push_back(ind::obv(candles));
    if (spec.include_adl) cols.push_back(ind::adl(candles));
    if (cols.empty()) fail(ErrorKind::Parameter, "feature spec selects no columns");

    // The label rule has its own warm-up of long - 1 bars.
    std::size_t warmup = spec.label_long >= 1 ? spec.label_long - 1 : 0;
    std::string binding = "Signal";
    for (const auto& c : cols)
        if (c.lookback > warmup) {
            warmup = c.lookback;
            binding = c.name;
        }
    if (n <= warmup + 1) {
        std::string msg = "insufficient data: " + std::to_string(n) + " bars, " + binding + " needs more than " +
                          std::to_string(warmup + 1) + " (lookback " + std::to_string(warmup) + ")";
        std::string others;
        for (const auto& c : cols)
            if (c.name != binding && c.lookback + 1 >= n) others += (others.empty() ? "" : ", ") + c.name;
        if (!others.empty()) msg += "; also short: " + others;
        fail(ErrorKind::InsufficientData, msg);
    }

    const auto labels = labeling::ma_crossover_labels(closes, spec.label_short, spec.label_long);
    std::vector<std::size_t> keep;
    for (std::size_t i = warmup; i < n; ++i) {
        bool ok = labels.values[i] != labeling::Signal::Undefined;
        for (const auto& c : cols) ok = ok && c.defined(i);
        if (ok) keep.push_back(i);
    }

    std::vector<EpochMs> ts;
    std::vector<std::uint8_t> y;
    std::vector<std::vector<double>> data(cols.size());
    std::vector<std::string> names;
    const auto open_times = candles.open_times();
    for (auto i : keep) {
        ts.push_back(open_times[i]);
        y.push_back(labels.values[i] == labeling::Signal::Buy ? 1 : 0);
    }
    for (std::size_t j = 0; j < cols.size(); ++j) {
        names.push_back(cols[j].name);
        data[j].reserve(keep.size());
        for (auto i : keep) data[j].push_back(cols[j].values[i]);
    }
    if (info) {
        info->input_bars = n;
        info->warmup_rows = warmup;
        info->dropped_rows = n - keep.size();
        info->binding_column = binding;
    }
    return FeatureFrame(std::move(ts), std::move(names), std::move(data), std::move(y));
}

SplitIndices time_split(std::size_t m, double p) {
    if (!(p > 0.0 && p < 1.0)) fail(ErrorKind::Parameter, "split fraction p must lie in (0, 1)");
    if (m < 2) fail(ErrorKind::InsufficientData, "split needs at least 2 rows");
    const auto test_start = static_cast<std::size_t>(std::floor((1.0 - p) * static_cast<double>(m)));
    if (test_start == 0 || test_start >= m)
        fail(ErrorKind::Parameter, "split with p = " + std::to_string(p) + " on " + std::to_string(m) +
                                       " rows leaves an empty train or test set");
    return {m, p, test_start, test_start};
}

ScalerParams fit_scaler(const FeatureFrame& frame, RowRange rows) {
    if (rows.empty() || rows.end > frame.rows()) fail(ErrorKind::Parameter, "scaler needs a non-empty row range");
    ScalerParams params;
    const double count = static_cast<double>(rows.size());
    for (std::size_t j = 0; j < frame.cols(); ++j) {
        auto col = frame.column(j);
        double mean = 0.0;
        for (std::size_t i = rows.begin; i < rows.end; ++i) mean += col[i];
        mean /= count;
        double ss = 0.0;
        for (std::size_t i = rows.begin; i < rows.end; ++i) ss += (col[i] - mean) * (col[i] - mean);
        const double sd = std::sqrt(ss / count);
        if (!(sd > 0.0)) fail(ErrorKind::Validation, "zero-variance column " + std::string(frame.names()[j]));
        params.names.emplace_back(frame.names()[j]);
        params.mean.push_back(mean);
        params.stddev.push_back(sd);
    }
    return params;
}

FeatureFrame transform(const FeatureFrame& frame, const ScalerParams& params) {
    std::vector<std::vector<double>> cols(frame.cols());
    for (std::size_t j = 0; j < frame.cols(); ++j) {
        const std::string name(frame.names()[j]);
        auto it = std::find(params.names.begin(), params.names.end(), name);
        if (it == params.names.end()) fail(ErrorKind::Parameter, "no scaler parameters for column " + name);
        const auto k = static_cast<std::size_t>(it - params.names.begin());
        auto src = frame.column(j);
        cols[j].resize(src.size());
        for (std::size_t i = 0; i < src.size(); ++i) cols[j][i] = (src[i] - params.mean[k]) / params.stddev[k];
    }
    return FeatureFrame({frame.timestamps().begin(), frame.timestamps().end()},
                        {frame.names().begin(), frame.names().end()}, std::move(cols),
                        {frame.labels().begin(), frame.labels().end()});
}

std::vector<std::size_t> top_k(std::span<const double> scores, std::size_t k) {
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    order.resize(std::min(k, order.size()));
    return order;
}

SelectionResult chi2_scores(const FeatureFrame& frame, RowRange rows, std::size_t k) {
    if (rows.empty() || rows.end > frame.rows()) fail(ErrorKind::Parameter, "chi2 needs a non-empty row range");
    if (k < 1 || k > frame.cols())
        fail(ErrorKind::Parameter, "k must lie in [1, " + std::to_string(frame.cols()) + "]");
    const auto labels = frame.labels();
    double class_rows[2] = {0.0, 0.0};
    for (std::size_t i = rows.begin; i < rows.end; ++i) class_rows[labels[i]] += 1.0;
    if (class_rows[0] == 0.0 || class_rows[1] == 0.0)
        fail(ErrorKind::Validation, "chi2 needs both classes in the scoring rows");
    const double total_rows = class_rows[0] + class_rows[1];

    SelectionResult result;
    for (std::size_t j = 0; j < frame.cols(); ++j) {
        auto col = frame.column(j);
        auto [lo, hi] = std::minmax_element(col.begin() + rows.begin, col.begin() + rows.end);
        const double min = *lo, range = *hi - *lo;
        double observed[2] = {0.0, 0.0};
        if (range > 0.0)
            for (std::size_t i = rows.begin; i < rows.end; ++i) observed[labels[i]] += (col[i] - min) / range;
        const double mass = observed[0] + observed[1];
        double score = 0.0;
        for (int c = 0; c < 2; ++c) {
            const double expected = mass * class_rows[c] / total_rows;
            if (expected > 0.0) score += (observed[c] - expected) * (observed[c] - expected) / expected;
        }
        result.names.emplace_back(frame.names()[j]);
        result.scores.push_back(score);
    }
    for (auto j : top_k(result.scores, k)) result.selected.push_back(result.names[j]);
    return result;
}

FeatureFrame select(const FeatureFrame& frame, const SelectionResult& result) {
    return frame.select_columns(result.selected);
}

}  // namespace trendforge
