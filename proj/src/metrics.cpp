#include "trendforge/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "trendforge/error.hpp"
#include "trendforge/gbdt.hpp"

namespace trendforge::metrics {

namespace {

void same_length(std::size_t a, std::size_t b) {
    if (a != b) fail(ErrorKind::Parameter, "length mismatch: " + std::to_string(a) + " vs " + std::to_string(b));
}

void both_classes(std::span<const std::uint8_t> labels) {
    const auto pos = std::count(labels.begin(), labels.end(), std::uint8_t{1});
    if (pos == 0 || static_cast<std::size_t>(pos) == labels.size())
        fail(ErrorKind::Validation, "ROC needs both classes");
}

}  // namespace

ConfusionMatrix confusion(std::span<const std::uint8_t> labels, std::span<const std::uint8_t> predictions) {
    same_length(labels.size(), predictions.size());
    ConfusionMatrix m;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i]) {
            (predictions[i] ? m.tp : m.fn)++;
        } else {
            (predictions[i] ? m.fp : m.tn)++;
        }
    }
    return m;
}

ScalarMetrics scalar_metrics(const ConfusionMatrix& m) {
    if (m.total() == 0) fail(ErrorKind::Parameter, "empty confusion matrix");
    ScalarMetrics s;
    s.accuracy = static_cast<double>(m.tp + m.tn) / static_cast<double>(m.total());
    if (m.tp + m.fp == 0) s.precision_degenerate = true;
    else s.precision = static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fp);
    if (m.tp + m.fn == 0) s.recall_degenerate = true;
    else s.recall = static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fn);
    if (s.precision + s.recall == 0.0) s.f1_degenerate = true;
    else s.f1 = 2.0 * s.precision * s.recall / (s.precision + s.recall);
    return s;
}

RocResult roc_auc(std::span<const std::uint8_t> labels, std::span<const double> scores) {
    same_length(labels.size(), scores.size());
    both_classes(labels);
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    const double pos = static_cast<double>(std::count(labels.begin(), labels.end(), std::uint8_t{1}));
    const double neg = static_cast<double>(labels.size()) - pos;

    RocResult result;
    result.points.push_back({0.0, 0.0, std::numeric_limits<double>::infinity()});
    std::size_t tp = 0, fp = 0;
    for (std::size_t k = 0; k < order.size();) {
        const double threshold = scores[order[k]];
        while (k < order.size() && scores[order[k]] == threshold) {
            (labels[order[k]] ? tp : fp)++;
            ++k;
        }
        result.points.push_back({static_cast<double>(fp) / neg, static_cast<double>(tp) / pos, threshold});
    }
    // Integrate on counts and normalize once so the result is insensitive to accumulated rounding.
    double area = 0.0;
    std::size_t prev_tp = 0, prev_fp = 0;
    tp = fp = 0;
    for (std::size_t k = 0; k < order.size();) {
        const double threshold = scores[order[k]];
        while (k < order.size() && scores[order[k]] == threshold) {
            (labels[order[k]] ? tp : fp)++;
            ++k;
        }
        area += static_cast<double>(fp - prev_fp) * static_cast<double>(tp + prev_tp);
        prev_tp = tp;
        prev_fp = fp;
    }
    result.auc = area / (2.0 * pos * neg);
    return result;
}

double auc_rank_statistic(std::span<const std::uint8_t> labels, std::span<const double> scores) {
    same_length(labels.size(), scores.size());
    both_classes(labels);
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
    // Sum of mid-ranks of positives, kept doubled to stay integral.
    double doubled_rank_sum = 0.0;
    for (std::size_t k = 0; k < order.size();) {
        std::size_t end = k;
        while (end < order.size() && scores[order[end]] == scores[order[k]]) ++end;
        const double doubled_mid_rank = static_cast<double>(k + 1 + end);  // 2 * average of ranks k+1..end
        for (std::size_t t = k; t < end; ++t)
            if (labels[order[t]]) doubled_rank_sum += doubled_mid_rank;
        k = end;
    }
    const double pos = static_cast<double>(std::count(labels.begin(), labels.end(), std::uint8_t{1}));
    const double neg = static_cast<double>(labels.size()) - pos;
    return (doubled_rank_sum - pos * (pos + 1.0)) / (2.0 * pos * neg);
}

double logloss(std::span<const std::uint8_t> labels, std::span<const double> probabilities) {
    same_length(labels.size(), probabilities.size());
    if (labels.empty()) fail(ErrorKind::Parameter, "logloss of an empty sample");
    double sum = 0.0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const double p = gbdt::clamp_probability(probabilities[i]);
        sum -= labels[i] ? std::log(p) : std::log(1.0 - p);
    }
    return sum / static_cast<double>(labels.size());
}

std::vector<std::uint8_t> threshold_labels(std::span<const double> probabilities, double threshold) {
    std::vector<std::uint8_t> out;
    out.reserve(probabilities.size());
    for (double p : probabilities) out.push_back(p >= threshold ? 1 : 0);
    return out;
}

double rmse(std::span<const std::uint8_t> labels, std::span<const double> probabilities) {
    same_length(labels.size(), probabilities.size());
    if (labels.empty()) fail(ErrorKind::Parameter, "rmse of an empty sample");
    double ss = 0.0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const double d = probabilities[i] - labels[i];
        ss += d * d;
    }
    return std::sqrt(ss / static_cast<double>(labels.size()));
}

EvalReport evaluate(std::span<const std::uint8_t> labels, std::span<const double> probabilities) {
    EvalReport report;
    report.matrix = confusion(labels, threshold_labels(probabilities));
    report.scalars = scalar_metrics(report.matrix);
    auto roc = roc_auc(labels, probabilities);
    report.roc_auc = roc.auc;
    report.roc_points = std::move(roc.points);
    report.logloss = logloss(labels, probabilities);
    return report;
}

}  // namespace trendforge::metrics
