#include "trendforge/logreg.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>

#include "trendforge/error.hpp"
#include "trendforge/gbdt.hpp"
#include "trendforge/numfmt.hpp"

namespace trendforge::logreg {

Penalty penalty_from_string(std::string_view name) {
    if (name == "l1") return Penalty::L1;
    if (name == "l2") return Penalty::L2;
    if (name == "elasticnet") return Penalty::ElasticNet;
    if (name == "none") return Penalty::None;
    fail(ErrorKind::Parameter, "unknown penalty '" + std::string(name) + "'");
}

std::string to_string(Penalty penalty) {
    switch (penalty) {
        case Penalty::L1: return "l1";
        case Penalty::L2: return "l2";
        case Penalty::ElasticNet: return "elasticnet";
        case Penalty::None: return "none";
    }
    return "none";
}

void Config::validate() const {
    if (!(C > 0.0)) fail(ErrorKind::Parameter, "logreg C must be > 0");
    if (max_iter < 1) fail(ErrorKind::Parameter, "logreg max_iter must be >= 1");
    if (!(l1_ratio >= 0.0 && l1_ratio <= 1.0)) fail(ErrorKind::Parameter, "logreg l1_ratio must lie in [0, 1]");
    if (!(tol >= 0.0)) fail(ErrorKind::Parameter, "logreg tol must be >= 0");
}

Config reference_config() { return Config{Penalty::L1, 0.1, 100, 0.5, 1e-8, "saga"}; }

namespace {

struct PenaltyWeights {
    double l1 = 0.0;
    double l2 = 0.0;
};

PenaltyWeights penalty_weights(const Config& config, std::size_t m) {
    const double scale = 1.0 / (config.C * static_cast<double>(m));
    switch (config.penalty) {
        case Penalty::L1: return {scale, 0.0};
        case Penalty::L2: return {0.0, scale};
        case Penalty::ElasticNet: return {config.l1_ratio * scale, (1.0 - config.l1_ratio) * scale};
        case Penalty::None: return {};
    }
    return {};
}

double penalty_value(std::span<const double> w, PenaltyWeights pw) {
    double l1 = 0.0, l2 = 0.0;
    for (double v : w) {
        l1 += std::abs(v);
        l2 += v * v;
    }
    return pw.l1 * l1 + 0.5 * pw.l2 * l2;
}

double log1p_exp(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

void check_dims(const FeatureFrame& frame, RowRange rows, std::size_t n_weights) {
    if (rows.empty() || rows.end > frame.rows()) fail(ErrorKind::Parameter, "logreg rows out of range");
    if (n_weights != frame.cols()) fail(ErrorKind::Parameter, "weight count differs from frame column count");
}

}  // namespace

double smooth_loss(const FeatureFrame& frame, RowRange rows, std::span<const double> weights, double intercept,
                   std::vector<double>* gradient) {
    check_dims(frame, rows, weights.size());
    const std::size_t d = weights.size();
    std::vector<double> z(rows.size(), intercept);
    for (std::size_t j = 0; j < d; ++j) {
        auto col = frame.column(j);
        for (std::size_t i = 0; i < rows.size(); ++i) z[i] += weights[j] * col[rows.begin + i];
    }
    const auto labels = frame.labels();
    const double m = static_cast<double>(rows.size());
    double loss = 0.0;
    std::vector<double> residual(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const double y = labels[rows.begin + i];
        // -[y log p + (1-y) log(1-p)] = log(1 + e^z) - y z
        loss += log1p_exp(z[i]) - y * z[i];
        residual[i] = gbdt::sigmoid(z[i]) - y;
    }
    if (gradient) {
        gradient->assign(d + 1, 0.0);
        for (std::size_t j = 0; j < d; ++j) {
            auto col = frame.column(j);
            double g = 0.0;
            for (std::size_t i = 0; i < rows.size(); ++i) g += residual[i] * col[rows.begin + i];
            (*gradient)[j] = g / m;
        }
        double gb = 0.0;
        for (double r : residual) gb += r;
        (*gradient)[d] = gb / m;
    }
    return loss / m;
}

double objective(const FeatureFrame& frame, RowRange rows, std::span<const double> weights, double intercept,
                 const Config& config) {
    return smooth_loss(frame, rows, weights, intercept) + penalty_value(weights, penalty_weights(config, rows.size()));
}

FitResult fit_logreg(const FeatureFrame& frame, RowRange rows, const Config& config) {
    config.validate();
    if (rows.empty() || rows.end > frame.rows()) fail(ErrorKind::Parameter, "logreg rows out of range");
    const auto labels = frame.labels();
    const auto positives = std::count(labels.begin() + rows.begin, labels.begin() + rows.end, std::uint8_t{1});
    if (positives == 0 || static_cast<std::size_t>(positives) == rows.size())
        fail(ErrorKind::Training, "logreg training rows contain a single class");

    const std::size_t d = frame.cols();
    const auto pw = penalty_weights(config, rows.size());
    const double base_rate = static_cast<double>(positives) / static_cast<double>(rows.size());

    std::vector<double> w(d, 0.0), grad, w_next(d);
    double b = std::log(base_rate / (1.0 - base_rate));
    double f = smooth_loss(frame, rows, w, b, &grad);
    double total = f + penalty_value(w, pw);

    FitResult result;
    result.objective.push_back(total);
    double step = 1.0;
    for (std::size_t iter = 0; iter < config.max_iter; ++iter) {
        double b_next = 0.0, f_next = 0.0;
        while (true) {
            for (std::size_t j = 0; j < d; ++j) {
                const double v = w[j] - step * grad[j];
                w_next[j] = gbdt::soft_threshold(v, step * pw.l1) / (1.0 + step * pw.l2);
            }
            b_next = b - step * grad[d];
            f_next = smooth_loss(frame, rows, w_next, b_next);
            double linear = grad[d] * (b_next - b), quad = (b_next - b) * (b_next - b);
            for (std::size_t j = 0; j < d; ++j) {
                linear += grad[j] * (w_next[j] - w[j]);
                quad += (w_next[j] - w[j]) * (w_next[j] - w[j]);
            }
            if (f_next <= f + linear + quad / (2.0 * step) || step < 1e-12) break;
            step *= 0.5;
        }
        const double total_next = f_next + penalty_value(w_next, pw);
        ++result.iterations;
        if (total_next > total) break;  // only reachable once the step has collapsed
        w.swap(w_next);
        b = b_next;
        const double decrease = total - total_next;
        total = total_next;
        result.objective.push_back(total);
        if (decrease < config.tol) break;
        f = smooth_loss(frame, rows, w, b, &grad);
    }
    result.model = LinearModel{std::move(w), b, config, {frame.names().begin(), frame.names().end()}};
    return result;
}

double predict_margin(const LinearModel& model, std::span<const double> row) {
    if (row.size() != model.weights.size())
        fail(ErrorKind::Parameter, "row has " + std::to_string(row.size()) + " values, model expects " +
                                       std::to_string(model.weights.size()));
    double z = model.intercept;
    for (std::size_t j = 0; j < row.size(); ++j) z += model.weights[j] * row[j];
    return z;
}

double predict_logreg(const LinearModel& model, std::span<const double> row) {
    return gbdt::clamp_probability(gbdt::sigmoid(predict_margin(model, row)));
}

std::vector<double> predict_logreg(const LinearModel& model, const FeatureFrame& frame, RowRange rows) {
    std::vector<double> out;
    out.reserve(rows.size());
    for (std::size_t i = rows.begin; i < rows.end; ++i) out.push_back(predict_logreg(model, frame.row(i)));
    return out;
}

using nlohmann::json;

std::string serialize(const LinearModel& model) {
    json doc;
    doc["schema"] = kSchema;
    json weights = json::array();
    for (double v : model.weights) weights.push_back(format_real(v));
    doc["weights"] = std::move(weights);
    doc["intercept"] = format_real(model.intercept);
    doc["feature_names"] = model.feature_names;
    const auto& c = model.config;
    doc["config"] = {{"penalty", to_string(c.penalty)}, {"C", format_real(c.C)},
                     {"max_iter", c.max_iter},          {"l1_ratio", format_real(c.l1_ratio)},
                     {"tol", format_real(c.tol)},       {"solver", c.solver}};
    return doc.dump(1) + "\n";
}

namespace {

double real_of(const json& v) {
    if (v.is_number()) return v.get<double>();
    if (v.is_string())
        if (auto r = parse_real(v.get_ref<const std::string&>())) return *r;
    fail(ErrorKind::Schema, "logreg document holds a malformed real");
}

}  // namespace

LinearModel deserialize(std::string_view document) {
    auto doc = json::parse(document, nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) fail(ErrorKind::Schema, "logreg document is not a JSON object");
    if (doc.value("schema", std::string{}) != kSchema)
        fail(ErrorKind::Schema, "unsupported logreg schema '" + doc.value("schema", std::string{}) + "'");
    try {
        LinearModel model;
        for (const auto& v : doc.at("weights")) model.weights.push_back(real_of(v));
        model.intercept = real_of(doc.at("intercept"));
        model.feature_names = doc.at("feature_names").get<std::vector<std::string>>();
        const auto& c = doc.at("config");
        model.config.penalty = penalty_from_string(c.at("penalty").get<std::string>());
        model.config.C = real_of(c.at("C"));
        model.config.max_iter = c.at("max_iter").get<std::size_t>();
        model.config.l1_ratio = real_of(c.at("l1_ratio"));
        model.config.tol = real_of(c.at("tol"));
        model.config.solver = c.value("solver", std::string("saga"));
        if (model.feature_names.size() != model.weights.size())
            fail(ErrorKind::Schema, "logreg feature_names and weights differ in length");
        return model;
    } catch (const json::exception& e) {
        fail(ErrorKind::Schema, std::string("malformed logreg document: ") + e.what());
    }
}

}  // namespace trendforge::logreg
