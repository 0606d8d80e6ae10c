#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "trendforge/gbdt.hpp"
#include "trendforge/logreg.hpp"
#include "trendforge/pipeline.hpp"

namespace trendforge::tuning {

using ParamValue = std::variant<double, std::string>;

std::string to_string(const ParamValue& value);

struct GridAxis {
    std::string name;
    std::vector<ParamValue> values;
};

/// Cartesian product; the first axis varies slowest, so cell order is
/// lexicographic in the axes' listed order.
struct GridSpec {
    std::vector<GridAxis> axes;

    void validate() const;
    std::size_t size() const;
    std::vector<ParamValue> cell(std::size_t index) const;
    std::vector<std::string> names() const;
};

/// N, eta, D_max, W_min, S, C, gamma, alpha, lambda (768 cells).
GridSpec reference_gbdt_grid();
/// penalty, C, solver, max_iter (120 cells).
GridSpec reference_logreg_grid();

enum class Learner { Gbdt, Logreg };

gbdt::HyperParams apply(gbdt::HyperParams base, std::span<const std::string> names, std::span<const ParamValue> values);
logreg::Config apply(logreg::Config base, std::span<const std::string> names, std::span<const ParamValue> values);

struct TuneRecord {
    std::size_t cell = 0;
    std::vector<ParamValue> values;
    double rmse = 0.0;
    double accuracy = 0.0;
    double wall_time_ms = 0.0;
    bool ok = false;
    std::string message;
};

struct TuneResult {
    std::vector<std::string> names;
    std::vector<TuneRecord> records;  // ordered by cell index
    std::size_t best = 0;             // index into records
};

/// Lowest RMSE among successful cells; equal RMSE goes to the lower cell index.
/// Throws Training when every cell failed.
std::size_t select_best(std::span<const TuneRecord> records);

/// Returns validation-block probabilities for one grid cell.
using CellEvaluator = std::function<std::vector<double>(std::size_t cell, const std::vector<ParamValue>& values)>;

/// Evaluates every cell (in parallel when threads > 1) and merges by cell index.
TuneResult grid_search(const GridSpec& grid, std::span<const std::uint8_t> validation_labels,
                       const CellEvaluator& evaluate, std::size_t threads = 1);

/// Inner train block and validation block: the validation block is the final
/// 20% of the training rows, in time order.
struct ValidationSplit {
    RowRange fit;
    RowRange validation;
};
ValidationSplit validation_split(RowRange train_rows);

struct LearnerDefaults {
    gbdt::HyperParams gbdt = gbdt::reference_params();
    logreg::Config logreg = logreg::reference_config();
};

/// Serialized model of one cell trained on the inner block. The frame is raw
/// (unscaled); standardization is fitted on the inner block only.
std::string train_cell(const FeatureFrame& raw_frame, RowRange fit_rows, Learner learner,
                       const LearnerDefaults& defaults, std::span<const std::string> names,
                       std::span<const ParamValue> values);

TuneResult grid_search(const FeatureFrame& raw_frame, const SplitIndices& split, const GridSpec& grid,
                       Learner learner, const LearnerDefaults& defaults = {}, std::size_t threads = 1);

/// One CSV row per cell: parameters, rmse, accuracy, wall_time_ms, status.
void write_tune_log(std::ostream& out, const TuneResult& result);

}  // namespace trendforge::tuning
