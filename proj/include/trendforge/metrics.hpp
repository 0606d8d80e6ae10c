#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace trendforge::metrics {

/// Sell = 0 is the negative class, Buy = 1 the positive class.
struct ConfusionMatrix {
    std::size_t tn = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;
    std::size_t tp = 0;

    std::size_t total() const noexcept { return tn + fp + fn + tp; }
    friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

ConfusionMatrix confusion(std::span<const std::uint8_t> labels, std::span<const std::uint8_t> predictions);

struct ScalarMetrics {
    double accuracy = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    // Set when the corresponding metric had a zero denominator and was reported as 0.
    bool precision_degenerate = false;
    bool recall_degenerate = false;
    bool f1_degenerate = false;
};

ScalarMetrics scalar_metrics(const ConfusionMatrix& matrix);

struct RocPoint {
    double fpr;
    double tpr;
    double threshold;  // +inf for the (0, 0) anchor
};

struct RocResult {
    double auc = 0.0;
    std::vector<RocPoint> points;
};

/// Thresholds at every distinct score, descending; AUC by the trapezoid rule.
RocResult roc_auc(std::span<const std::uint8_t> labels, std::span<const double> scores);

/// Mann-Whitney statistic with tied pairs counted one half.
double auc_rank_statistic(std::span<const std::uint8_t> labels, std::span<const double> scores);

double logloss(std::span<const std::uint8_t> labels, std::span<const double> probabilities);

std::vector<std::uint8_t> threshold_labels(std::span<const double> probabilities, double threshold = 0.5);

double rmse(std::span<const std::uint8_t> labels, std::span<const double> probabilities);

struct EvalReport {
    ConfusionMatrix matrix;
    ScalarMetrics scalars;
    double roc_auc = 0.0;
    double logloss = 0.0;
    std::vector<RocPoint> roc_points;
};

EvalReport evaluate(std::span<const std::uint8_t> labels, std::span<const double> probabilities);

}  // namespace trendforge::metrics
