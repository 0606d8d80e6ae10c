#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "trendforge/market_data.hpp"

namespace trendforge {

/// Half-open row interval [begin, end).
struct RowRange {
    std::size_t begin = 0;
    std::size_t end = 0;

    std::size_t size() const noexcept { return end - begin; }
    bool empty() const noexcept { return end <= begin; }
    bool contains(std::size_t i) const noexcept { return i >= begin && i < end; }
    friend bool operator==(const RowRange&, const RowRange&) = default;
};

/// Time-indexed, column-major feature matrix with a binary label per row
/// (1 = Buy, 0 = Sell). Holds no undefined cells.
class FeatureFrame {
public:
    FeatureFrame() = default;
    /// Throws Validation on ragged columns, duplicate names or non-finite cells.
    FeatureFrame(std::vector<EpochMs> timestamps, std::vector<std::string> names,
                 std::vector<std::vector<double>> columns, std::vector<std::uint8_t> labels);

    std::size_t rows() const noexcept { return labels_.size(); }
    std::size_t cols() const noexcept { return names_.size(); }

    std::span<const EpochMs> timestamps() const noexcept { return timestamps_; }
    std::span<const std::string> names() const noexcept { return names_; }
    std::span<const std::uint8_t> labels() const noexcept { return labels_; }
    std::span<const double> column(std::size_t j) const { return columns_[j]; }
    std::span<const double> column(const std::string& name) const;
    std::optional<std::size_t> index_of(const std::string& name) const;
    std::vector<double> row(std::size_t i) const;

    FeatureFrame select_columns(std::span<const std::string> names) const;

    friend bool operator==(const FeatureFrame&, const FeatureFrame&) = default;

private:
    std::vector<EpochMs> timestamps_;
    std::vector<std::string> names_;
    std::vector<std::vector<double>> columns_;
    std::vector<std::uint8_t> labels_;
};

/// Indicator periods and label rule used to assemble a frame.
struct FeatureSpec {
    bool include_close = true;
    bool include_volume = true;
    std::vector<std::size_t> rsi{14, 30, 200};
    std::vector<std::size_t> mom{10, 30};
    bool include_macd = true;
    std::vector<std::size_t> proc{9};
    std::vector<std::size_t> ema{10, 30, 200};
    std::vector<std::size_t> stoch{10, 30, 200};  // %K and %D per period
    std::vector<std::size_t> bb{20};
    int bb_ddof = 0;
    std::vector<std::size_t> atr{14};
    std::vector<std::size_t> cci{20};
    std::vector<std::size_t> williams_r{14};
    std::vector<std::size_t> cmf{20};
    bool include_obv = true;
    bool include_adl = true;
    std::size_t label_short = 10;
    std::size_t label_long = 60;
};

struct FrameBuildInfo {
    std::size_t input_bars = 0;
    std::size_t warmup_rows = 0;     // leading rows dropped
    std::size_t dropped_rows = 0;    // total rows dropped (warm-up plus any interior undefined cell)
    std::string binding_column;      // column with the longest lookback
};

/// Features at bar i are aligned with the label at bar i.
FeatureFrame build_frame(const CandleSeries& candles, const FeatureSpec& spec = {}, FrameBuildInfo* info = nullptr);

/// Time-ordered split: test_start = floor((1 - p) * m), train = [0, train_end), test = [test_start, m).
struct SplitIndices {
    std::size_t m = 0;
    double p = 0.2;
    std::size_t train_end = 0;
    std::size_t test_start = 0;

    RowRange train() const noexcept { return {0, train_end}; }
    RowRange test() const noexcept { return {test_start, m}; }
    friend bool operator==(const SplitIndices&, const SplitIndices&) = default;
};

SplitIndices time_split(std::size_t m, double p);
inline SplitIndices time_split(const FeatureFrame& frame, double p) { return time_split(frame.rows(), p); }

struct ScalerParams {
    std::vector<std::string> names;
    std::vector<double> mean;
    std::vector<double> stddev;  // population deviation, > 0
};

/// Mean and population deviation over the given rows only. Throws Validation on a zero-variance column.
ScalerParams fit_scaler(const FeatureFrame& frame, RowRange rows);
inline ScalerParams fit_scaler(const FeatureFrame& frame, const SplitIndices& split) {
    return fit_scaler(frame, split.train());
}

/// (x - mean) / stddev for every column; throws Parameter if a frame column has no parameters.
FeatureFrame transform(const FeatureFrame& frame, const ScalerParams& params);

struct SelectionResult {
    std::vector<std::string> names;      // every scored column, frame order
    std::vector<double> scores;          // chi-squared statistic per column
    std::vector<std::string> selected;   // top k, descending score, ties to lower column index
};

/// Chi-squared relevance of each column to the binary label over `rows`, after a
/// min-max rescale of each column to [0, 1] on those rows.
SelectionResult chi2_scores(const FeatureFrame& frame, RowRange rows, std::size_t k = 8);
inline SelectionResult chi2_scores(const FeatureFrame& frame, const SplitIndices& split, std::size_t k = 8) {
    return chi2_scores(frame, split.train(), k);
}

/// Column indices of the k largest scores, descending, ties to the lower index.
std::vector<std::size_t> top_k(std::span<const double> scores, std::size_t k);

FeatureFrame select(const FeatureFrame& frame, const SelectionResult& result);

}  // namespace trendforge
