#include "trendforge/gbdt.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "trendforge/error.hpp"
#include "trendforge/rng.hpp"

namespace trendforge::gbdt {

void HyperParams::validate() const {
    auto bad = [](const std::string& what) { fail(ErrorKind::Parameter, "hyperparameter " + what); };
    if (n_estimators < 1) bad("N must be >= 1");
    if (!(eta > 0.0 && eta <= 1.0)) bad("eta must lie in (0, 1]");
    if (max_depth < 1) bad("max_depth must be >= 1");
    if (!(min_child_weight >= 0.0)) bad("min_child_weight must be >= 0");
    if (!(subsample > 0.0 && subsample <= 1.0)) bad("subsample must lie in (0, 1]");
    if (!(colsample > 0.0 && colsample <= 1.0)) bad("colsample must lie in (0, 1]");
    if (!(gamma >= 0.0) || !(alpha >= 0.0) || !(lambda >= 0.0)) bad("regularizers must be >= 0");
}

HyperParams reference_params() {
    HyperParams p;
    p.colsample = 1.0;
    p.gamma = 0.1;
    p.eta = 0.1;
    p.max_depth = 4;
    p.min_child_weight = 3.0;
    p.n_estimators = 400;
    p.alpha = 0.5;
    p.lambda = 1.0;
    p.subsample = 0.8;
    return p;
}

double sigmoid(double margin) noexcept {
    if (margin >= 0.0) return 1.0 / (1.0 + std::exp(-margin));
    const double e = std::exp(margin);
    return e / (1.0 + e);
}

double clamp_probability(double p) noexcept { return std::clamp(p, kProbEpsilon, 1.0 - kProbEpsilon); }

GradHess logistic_grad_hess(std::uint8_t label, double margin) noexcept {
    const double p = clamp_probability(sigmoid(margin));
    return {p - static_cast<double>(label), p * (1.0 - p)};
}

double soft_threshold(double g, double alpha) noexcept {
    if (g > alpha) return g - alpha;
    if (g < -alpha) return g + alpha;
    return 0.0;
}

double leaf_weight(double grad_sum, double hess_sum, const HyperParams& params) noexcept {
    const double denom = hess_sum + params.lambda;
    if (!(denom > 0.0)) return 0.0;
    return -soft_threshold(grad_sum, params.alpha) / denom;
}

namespace {

double structure_score(double g, double h, const HyperParams& params) noexcept {
    const double denom = h + params.lambda;
    if (!(denom > 0.0)) return 0.0;
    const double t = soft_threshold(g, params.alpha);
    return t * t / denom;
}

}  // namespace

double split_gain(double grad_left, double hess_left, double grad_right, double hess_right,
                  const HyperParams& params) noexcept {
    return 0.5 * (structure_score(grad_left, hess_left, params) + structure_score(grad_right, hess_right, params) -
                  structure_score(grad_left + grad_right, hess_left + hess_right, params)) -
           params.gamma;
}

double RegressionTree::evaluate(std::span<const double> row) const {
    std::size_t i = 0;
    while (!nodes[i].is_leaf()) {
        const auto& n = nodes[i];
        i = static_cast<std::size_t>(row[static_cast<std::size_t>(n.feature)] < n.threshold ? n.left : n.right);
    }
    return nodes[i].weight;
}

std::size_t RegressionTree::leaf_count() const noexcept {
    return static_cast<std::size_t>(std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& n) { return n.is_leaf(); }));
}

std::size_t RegressionTree::depth() const {
    std::vector<std::size_t> level(nodes.size(), 0);
    std::size_t deepest = 0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        deepest = std::max(deepest, level[i]);
        if (!nodes[i].is_leaf()) {
            level[static_cast<std::size_t>(nodes[i].left)] = level[i] + 1;
            level[static_cast<std::size_t>(nodes[i].right)] = level[i] + 1;
        }
    }
    return deepest;
}

ColumnView ColumnView::of(const FeatureFrame& frame) {
    ColumnView v;
    v.rows = frame.rows();
    for (std::size_t j = 0; j < frame.cols(); ++j) v.columns.push_back(frame.column(j));
    return v;
}

namespace {

using RowList = std::vector<std::uint32_t>;

/// Grows one tree from per-column row lists already sorted by (value, row id).
class Grower {
public:
    Grower(const ColumnView& x, std::span<const double> grad, std::span<const double> hess,
           std::span<const std::size_t> cols, const HyperParams& params)
        : x_(x), grad_(grad), hess_(hess), cols_(cols), params_(params), goes_left_(x.rows, 0) {}

    RegressionTree run(RowList node_rows, std::vector<RowList> sorted) {
        grow(node_rows, sorted, 0);
        return std::move(tree_);
    }

private:
    struct Candidate {
        double gain = 0.0;
        std::size_t slot = 0;  // position in cols_
        double threshold = 0.0;
    };

    std::int32_t grow(const RowList& node_rows, std::vector<RowList>& sorted, std::size_t depth) {
        double g_sum = 0.0, h_sum = 0.0;
        for (auto r : node_rows) {
            g_sum += grad_[r];
            h_sum += hess_[r];
        }
        const auto index = static_cast<std::int32_t>(tree_.nodes.size());
        tree_.nodes.push_back({});
        tree_.nodes.back().hess_sum = h_sum;

        Candidate best;
        bool found = false;
        if (depth < params_.max_depth) {
            for (std::size_t slot = 0; slot < cols_.size(); ++slot) {
                const auto& list = sorted[slot];
                const auto column = x_.columns[cols_[slot]];
                double gl = 0.0, hl = 0.0;
                for (std::size_t t = 0; t + 1 < list.size(); ++t) {
                    const auto r = list[t];
                    gl += grad_[r];
                    hl += hess_[r];
                    const double v = column[r], next = column[list[t + 1]];
                    if (!(v < next)) continue;
                    if (hl < params_.min_child_weight) continue;
                    const double hr = h_sum - hl;
                    if (hr < params_.min_child_weight) break;
                    const double gain = split_gain(gl, hl, g_sum - gl, hr, params_);
                    if (gain > best.gain) {
                        double mid = 0.5 * (v + next);
                        if (!(mid > v)) mid = next;
                        best = {gain, slot, mid};
                        found = true;
                    }
                }
            }
        }
        if (!found) {
            tree_.nodes[static_cast<std::size_t>(index)].weight = leaf_weight(g_sum, h_sum, params_);
            return index;
        }

        const auto feature = cols_[best.slot];
        const auto column = x_.columns[feature];
        RowList left_rows, right_rows;
        for (auto r : node_rows) {
            goes_left_[r] = column[r] < best.threshold;
            (goes_left_[r] ? left_rows : right_rows).push_back(r);
        }
        std::vector<RowList> left_sorted(sorted.size()), right_sorted(sorted.size());
        for (std::size_t slot = 0; slot < sorted.size(); ++slot) {
            left_sorted[slot].reserve(left_rows.size());
            right_sorted[slot].reserve(right_rows.size());
            for (auto r : sorted[slot]) (goes_left_[r] ? left_sorted[slot] : right_sorted[slot]).push_back(r);
            RowList().swap(sorted[slot]);
        }
        const auto left = grow(left_rows, left_sorted, depth + 1);
        const auto right = grow(right_rows, right_sorted, depth + 1);
        auto& node = tree_.nodes[static_cast<std::size_t>(index)];
        node.feature = static_cast<std::int32_t>(feature);
        node.threshold = best.threshold;
        node.gain = best.gain;
        node.left = left;
        node.right = right;
        return index;
    }

    const ColumnView& x_;
    std::span<const double> grad_;
    std::span<const double> hess_;
    std::span<const std::size_t> cols_;
    const HyperParams& params_;
    std::vector<std::uint8_t> goes_left_;
    RegressionTree tree_;
};

RowList sorted_by_value(std::span<const double> column, RowList rows) {
    std::sort(rows.begin(), rows.end(), [&](std::uint32_t a, std::uint32_t b) {
        return column[a] < column[b] || (column[a] == column[b] && a < b);
    });
    return rows;
}

std::uint32_t fraction_count(double fraction, std::size_t n) {
    const auto k = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
    return static_cast<std::uint32_t>(std::clamp<std::size_t>(k, 1, n));
}

double mean_logloss(std::span<const double> margins, std::span<const std::uint8_t> labels) {
    double sum = 0.0;
    for (std::size_t i = 0; i < margins.size(); ++i) {
        const double p = clamp_probability(sigmoid(margins[i]));
        sum -= labels[i] ? std::log(p) : std::log(1.0 - p);
    }
    return sum / static_cast<double>(margins.size());
}

double error_rate(std::span<const double> margins, std::span<const std::uint8_t> labels) {
    std::size_t wrong = 0;
    for (std::size_t i = 0; i < margins.size(); ++i) wrong += (margins[i] >= 0.0 ? 1 : 0) != labels[i];
    return static_cast<double>(wrong) / static_cast<double>(margins.size());
}

}  // namespace

RegressionTree build_tree(const ColumnView& x, std::span<const double> grad, std::span<const double> hess,
                          std::span<const std::size_t> rows, std::span<const std::size_t> cols,
                          const HyperParams& params) {
    if (rows.empty()) fail(ErrorKind::Parameter, "build_tree needs at least one row");
    RowList node_rows(rows.begin(), rows.end());
    std::sort(node_rows.begin(), node_rows.end());
    std::vector<RowList> sorted;
    for (auto c : cols) sorted.push_back(sorted_by_value(x.columns[c], node_rows));
    return Grower(x, grad, hess, cols, params).run(std::move(node_rows), std::move(sorted));
}

TrainResult train(const FeatureFrame& frame, RowRange rows, const HyperParams& params) {
    params.validate();
    if (rows.empty() || rows.end > frame.rows()) fail(ErrorKind::Parameter, "training rows out of range");
    if (frame.cols() == 0) fail(ErrorKind::Training, "frame has no feature columns");
    const std::size_t n = rows.size();
    const auto all_labels = frame.labels();
    std::span<const std::uint8_t> labels = all_labels.subspan(rows.begin, n);
    const auto positives = std::count(labels.begin(), labels.end(), std::uint8_t{1});
    if (positives == 0 || static_cast<std::size_t>(positives) == n)
        fail(ErrorKind::Training, "training rows contain a single class");

    // Local view over the training rows only.
    ColumnView x;
    x.rows = n;
    for (std::size_t j = 0; j < frame.cols(); ++j) x.columns.push_back(frame.column(j).subspan(rows.begin, n));

    RowList all_rows(n);
    std::iota(all_rows.begin(), all_rows.end(), 0u);
    std::vector<RowList> presorted;
    presorted.reserve(frame.cols());
    for (std::size_t j = 0; j < frame.cols(); ++j) presorted.push_back(sorted_by_value(x.columns[j], all_rows));

    TrainResult result;
    auto& model = result.model;
    model.eta = params.eta;
    model.base_margin = 0.0;
    model.params = params;
    model.feature_names.assign(frame.names().begin(), frame.names().end());

    std::vector<double> margins(n, model.base_margin), grad(n), hess(n);
    std::vector<std::uint8_t> in_sample(n);
    const auto row_count = fraction_count(params.subsample, n);
    const auto col_count = fraction_count(params.colsample, frame.cols());

    for (std::size_t round = 0; round < params.n_estimators; ++round) {
        for (std::size_t i = 0; i < n; ++i) {
            const auto gh = logistic_grad_hess(labels[i], margins[i]);
            grad[i] = gh.grad;
            hess[i] = gh.hess;
        }
        CounterRng rng(params.seed, round);
        RowList sample_rows;
        if (row_count == n) {
            sample_rows = all_rows;
            std::fill(in_sample.begin(), in_sample.end(), 1);
        } else {
            sample_rows = rng.sample_without_replacement(static_cast<std::uint32_t>(n), row_count);
            std::sort(sample_rows.begin(), sample_rows.end());
            std::fill(in_sample.begin(), in_sample.end(), 0);
            for (auto r : sample_rows) in_sample[r] = 1;
        }
        std::vector<std::size_t> cols;
        if (col_count == frame.cols()) {
            cols.resize(frame.cols());
            std::iota(cols.begin(), cols.end(), std::size_t{0});
        } else {
            for (auto c : rng.sample_without_replacement(static_cast<std::uint32_t>(frame.cols()), col_count))
                cols.push_back(c);
            std::sort(cols.begin(), cols.end());
        }
        std::vector<RowList> sorted;
        sorted.reserve(cols.size());
        for (auto c : cols) {
            RowList list;
            list.reserve(sample_rows.size());
            for (auto r : presorted[c])
                if (in_sample[r]) list.push_back(r);
            sorted.push_back(std::move(list));
        }
        auto tree = Grower(x, grad, hess, cols, params).run(std::move(sample_rows), std::move(sorted));

        std::vector<double> row(frame.cols());
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < frame.cols(); ++j) row[j] = x.columns[j][i];
            margins[i] += params.eta * tree.evaluate(row);
        }
        model.trees.push_back(std::move(tree));
        result.train_curve.push_back({mean_logloss(margins, labels), error_rate(margins, labels)});
    }
    return result;
}

double predict_margin(const BoostedModel& model, std::span<const double> row, std::size_t trees) {
    if (row.size() != model.feature_names.size())
        fail(ErrorKind::Parameter, "row has " + std::to_string(row.size()) + " values, model expects " +
                                       std::to_string(model.feature_names.size()));
    double sum = 0.0;
    const auto count = std::min(trees, model.trees.size());
    for (std::size_t k = 0; k < count; ++k) sum += model.trees[k].evaluate(row);
    return model.base_margin + model.eta * sum;
}

double predict_proba(const BoostedModel& model, std::span<const double> row) {
    return sigmoid(predict_margin(model, row));
}

std::uint8_t predict_label(const BoostedModel& model, std::span<const double> row) {
    return predict_proba(model, row) >= 0.5 ? 1 : 0;
}

std::vector<double> predict_proba(const BoostedModel& model, const FeatureFrame& frame, RowRange rows) {
    std::vector<double> out;
    out.reserve(rows.size());
    for (std::size_t i = rows.begin; i < rows.end; ++i) out.push_back(predict_proba(model, frame.row(i)));
    return out;
}

std::vector<StageMetrics> staged_metrics(const BoostedModel& model, const FeatureFrame& frame, RowRange rows) {
    if (frame.cols() != model.feature_names.size())
        fail(ErrorKind::Parameter, "frame column count does not match the model");
    std::vector<StageMetrics> curve;
    if (rows.empty()) return curve;
    std::vector<std::vector<double>> x;
    x.reserve(rows.size());
    for (std::size_t i = rows.begin; i < rows.end; ++i) x.push_back(frame.row(i));
    const auto labels = frame.labels().subspan(rows.begin, rows.size());
    std::vector<double> sums(rows.size(), 0.0), margins(rows.size());
    for (const auto& tree : model.trees) {
        for (std::size_t i = 0; i < x.size(); ++i) {
            sums[i] += tree.evaluate(x[i]);
            margins[i] = model.base_margin + model.eta * sums[i];
        }
        curve.push_back({mean_logloss(margins, labels), error_rate(margins, labels)});
    }
    return curve;
}

FeatureImportance feature_importance(const BoostedModel& model) {
    FeatureImportance imp{std::vector<std::size_t>(model.feature_names.size(), 0),
                          std::vector<double>(model.feature_names.size(), 0.0)};
    for (const auto& tree : model.trees)
        for (const auto& node : tree.nodes)
            if (!node.is_leaf()) {
                ++imp.split_count[static_cast<std::size_t>(node.feature)];
                imp.total_gain[static_cast<std::size_t>(node.feature)] += node.gain;
            }
    return imp;
}

}  // namespace trendforge::gbdt
