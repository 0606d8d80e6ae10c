#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "trendforge/gbdt.hpp"
#include "trendforge/metrics.hpp"
#include "trendforge/pipeline.hpp"

namespace trendforge::artifacts {

namespace fs = std::filesystem;

std::string read_text(const fs::path& path);
/// Writes via a temporary file and rename.
void write_text(const fs::path& path, const std::string& text);

/// Header `open_time,<feature names...>,Signal`; Signal holds 1 (Buy) / -1 (Sell).
std::string features_csv(const FeatureFrame& frame);
FeatureFrame parse_features_csv(const std::string& text);

/// (feature, chi2_score, selected_flag), descending score.
std::string selection_csv(const SelectionResult& result);
SelectionResult parse_selection_csv(const std::string& text);

/// {m, p, train_end, test_start} plus the build hash.
std::string split_json(const SplitIndices& split, const std::string& build_hash);
SplitIndices parse_split_json(const std::string& text, std::string* build_hash = nullptr);

std::string scaler_json(const ScalerParams& params, const std::string& build_hash);
ScalerParams parse_scaler_json(const std::string& text, std::string* build_hash = nullptr);

/// (threshold, fpr, tpr)
std::string roc_csv(const std::vector<metrics::RocPoint>& points);

/// (iteration, train_logloss, test_logloss, train_error, test_error)
std::string curves_csv(const std::vector<gbdt::StageMetrics>& train, const std::vector<gbdt::StageMetrics>& test);

}  // namespace trendforge::artifacts
