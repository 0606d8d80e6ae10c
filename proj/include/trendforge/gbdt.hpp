#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "trendforge/pipeline.hpp"

namespace trendforge::gbdt {

inline constexpr double kProbEpsilon = 1e-15;
inline constexpr std::string_view kSchema = "trendforge_gbdt_v1";

struct HyperParams {
    std::size_t n_estimators = 400;    // N
    double eta = 0.1;                  // learning rate
    std::size_t max_depth = 4;         // D_max
    double min_child_weight = 3.0;     // W_min, minimum hessian sum per child
    double subsample = 0.8;            // S, row fraction per tree
    double colsample = 1.0;            // C, column fraction per tree
    double gamma = 0.1;                // per-leaf penalty
    double alpha = 0.5;                // L1 on leaf weights
    double lambda = 1.0;               // L2 on leaf weights
    std::uint64_t seed = 42;

    /// Throws Parameter when any field is out of range.
    void validate() const;

    friend bool operator==(const HyperParams&, const HyperParams&) = default;
};

HyperParams reference_params();

struct GradHess {
    double grad;
    double hess;
};

double sigmoid(double margin) noexcept;
double clamp_probability(double p) noexcept;

/// First and second derivative of the logistic loss with respect to the margin.
GradHess logistic_grad_hess(std::uint8_t label, double margin) noexcept;

/// sign(g) * max(|g| - alpha, 0)
double soft_threshold(double g, double alpha) noexcept;

/// Minimizer of G w + (H + lambda) w^2 / 2 + alpha |w|; 0 when H + lambda == 0.
double leaf_weight(double grad_sum, double hess_sum, const HyperParams& params) noexcept;

/// Structure-score improvement of splitting a node into (L, R), minus gamma.
double split_gain(double grad_left, double hess_left, double grad_right, double hess_right,
                  const HyperParams& params) noexcept;

/// Flat binary tree; node 0 is the root. Internal nodes route value < threshold to `left`.
struct TreeNode {
    std::int32_t feature = -1;  // -1 for a leaf
    double threshold = 0.0;
    std::int32_t left = -1;
    std::int32_t right = -1;
    double weight = 0.0;        // leaf output
    double gain = 0.0;          // split gain (internal nodes)
    double hess_sum = 0.0;      // hessian mass routed here while growing

    bool is_leaf() const noexcept { return feature < 0; }
    friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

struct RegressionTree {
    std::vector<TreeNode> nodes;

    double evaluate(std::span<const double> row) const;
    std::size_t leaf_count() const noexcept;
    std::size_t depth() const;
    friend bool operator==(const RegressionTree&, const RegressionTree&) = default;
};

/// Column-major read-only matrix.
struct ColumnView {
    std::vector<std::span<const double>> columns;
    std::size_t rows = 0;

    static ColumnView of(const FeatureFrame& frame);
    double at(std::size_t row, std::size_t col) const { return columns[col][row]; }
};

/// Exact greedy growth over `rows` using only `cols`. A node splits when its best
/// candidate has gain > 0, both children carry hessian >= min_child_weight and the
/// node's depth is below max_depth; thresholds sit at midpoints of adjacent distinct values.
RegressionTree build_tree(const ColumnView& x, std::span<const double> grad, std::span<const double> hess,
                          std::span<const std::size_t> rows, std::span<const std::size_t> cols,
                          const HyperParams& params);

struct BoostedModel {
    std::vector<RegressionTree> trees;
    double eta = 0.1;
    double base_margin = 0.0;
    std::vector<std::string> feature_names;
    HyperParams params;
    std::map<std::string, std::string> metadata;

    friend bool operator==(const BoostedModel&, const BoostedModel&) = default;
};

struct StageMetrics {
    double logloss = 0.0;
    double error = 0.0;
};

struct TrainResult {
    BoostedModel model;
    std::vector<StageMetrics> train_curve;  // one entry per round
};

/// Fits N rounds on frame rows `rows`. Gradients are evaluated on every training
/// row; each tree sees a seeded row/column subsample.
TrainResult train(const FeatureFrame& frame, RowRange rows, const HyperParams& params);
inline TrainResult train(const FeatureFrame& frame, const SplitIndices& split, const HyperParams& params) {
    return train(frame, split.train(), params);
}

/// base_margin + eta * sum of the first `trees` trees (all by default).
double predict_margin(const BoostedModel& model, std::span<const double> row, std::size_t trees = SIZE_MAX);
double predict_proba(const BoostedModel& model, std::span<const double> row);
std::uint8_t predict_label(const BoostedModel& model, std::span<const double> row);

std::vector<double> predict_proba(const BoostedModel& model, const FeatureFrame& frame, RowRange rows);

/// Metrics of each truncated model (1..N trees) on the given rows.
std::vector<StageMetrics> staged_metrics(const BoostedModel& model, const FeatureFrame& frame, RowRange rows);

struct FeatureImportance {
    std::vector<std::size_t> split_count;
    std::vector<double> total_gain;
};
FeatureImportance feature_importance(const BoostedModel& model);

std::string serialize(const BoostedModel& model);
/// Throws Schema on a foreign schema tag or a malformed tree.
BoostedModel deserialize(std::string_view document);

}  // namespace trendforge::gbdt
