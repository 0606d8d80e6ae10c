#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "trendforge/pipeline.hpp"

namespace trendforge::logreg {

inline constexpr std::string_view kSchema = "trendforge_logreg_v1";

enum class Penalty { L1, L2, ElasticNet, None };

Penalty penalty_from_string(std::string_view name);
std::string to_string(Penalty penalty);

struct Config {
    Penalty penalty = Penalty::L1;
    double C = 0.1;              // inverse regularization strength
    std::size_t max_iter = 100;
    double l1_ratio = 0.5;       // elastic-net mixing
    double tol = 1e-8;           // stop when the objective decrease falls below this
    std::string solver = "saga"; // recorded only; every penalty is fitted by proximal gradient

    void validate() const;
    friend bool operator==(const Config&, const Config&) = default;
};

Config reference_config();

struct LinearModel {
    std::vector<double> weights;
    double intercept = 0.0;
    Config config;
    std::vector<std::string> feature_names;

    friend bool operator==(const LinearModel&, const LinearModel&) = default;
};

struct FitResult {
    LinearModel model;
    std::vector<double> objective;  // value after each accepted step, starting with the initial point
    std::size_t iterations = 0;
};

/// Proximal gradient with backtracking on
///   (1 / m) sum logistic loss + R(w) / (C m),  intercept unpenalized.
FitResult fit_logreg(const FeatureFrame& frame, RowRange rows, const Config& config);
inline FitResult fit_logreg(const FeatureFrame& frame, const SplitIndices& split, const Config& config) {
    return fit_logreg(frame, split.train(), config);
}

/// Smooth part of the objective and its gradient; gradient has one entry per weight plus the intercept last.
double smooth_loss(const FeatureFrame& frame, RowRange rows, std::span<const double> weights, double intercept,
                   std::vector<double>* gradient = nullptr);
/// Full objective including the penalty term.
double objective(const FeatureFrame& frame, RowRange rows, std::span<const double> weights, double intercept,
                 const Config& config);

double predict_margin(const LinearModel& model, std::span<const double> row);
/// Sigmoid of the margin, clamped to [1e-15, 1 - 1e-15].
double predict_logreg(const LinearModel& model, std::span<const double> row);
std::vector<double> predict_logreg(const LinearModel& model, const FeatureFrame& frame, RowRange rows);

std::string serialize(const LinearModel& model);
LinearModel deserialize(std::string_view document);

}  // namespace trendforge::logreg
