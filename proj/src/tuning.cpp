#include "trendforge/tuning.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <mutex>
#include <ostream>
#include <thread>

#include "trendforge/error.hpp"
#include "trendforge/metrics.hpp"
#include "trendforge/numfmt.hpp"

namespace trendforge::tuning {

std::string to_string(const ParamValue& value) {
    if (const auto* s = std::get_if<std::string>(&value)) return *s;
    return format_shortest(std::get<double>(value));
}

void GridSpec::validate() const {
    if (axes.empty()) fail(ErrorKind::Parameter, "grid has no axes");
    for (const auto& a : axes)
        if (a.values.empty()) fail(ErrorKind::Parameter, "grid axis " + a.name + " has no values");
}

std::size_t GridSpec::size() const {
    if (axes.empty()) return 0;
    std::size_t n = 1;
    for (const auto& a : axes) n *= a.values.size();
    return n;
}

std::vector<ParamValue> GridSpec::cell(std::size_t index) const {
    std::vector<ParamValue> values(axes.size());
    for (std::size_t k = axes.size(); k-- > 0;) {
        const auto& a = axes[k];
        values[k] = a.values[index % a.values.size()];
        index /= a.values.size();
    }
    return values;
}

std::vector<std::string> GridSpec::names() const {
    std::vector<std::string> out;
    for (const auto& a : axes) out.push_back(a.name);
    return out;
}

namespace {

std::vector<ParamValue> reals(std::initializer_list<double> v) { return {v.begin(), v.end()}; }
std::vector<ParamValue> words(std::initializer_list<const char*> v) {
    std::vector<ParamValue> out;
    for (auto* s : v) out.emplace_back(std::string(s));
    return out;
}

double as_real(const std::string& name, const ParamValue& v) {
    if (const auto* d = std::get_if<double>(&v)) return *d;
    fail(ErrorKind::Parameter, "grid value for " + name + " must be numeric");
}

std::size_t as_count(const std::string& name, const ParamValue& v) {
    const double d = as_real(name, v);
    if (!(d >= 0.0) || std::floor(d) != d) fail(ErrorKind::Parameter, "grid value for " + name + " must be a count");
    return static_cast<std::size_t>(d);
}

std::string as_word(const std::string& name, const ParamValue& v) {
    if (const auto* s = std::get_if<std::string>(&v)) return *s;
    fail(ErrorKind::Parameter, "grid value for " + name + " must be a string");
}

}  // namespace

GridSpec reference_gbdt_grid() {
    return {{{"n_estimators", reals({300, 400})},
             {"eta", reals({0.01, 0.1, 0.2})},
             {"max_depth", reals({3, 4})},
             {"min_child_weight", reals({1, 3})},
             {"subsample", reals({0.8, 1.0})},
             {"colsample", reals({0.8, 1.0})},
             {"gamma", reals({0, 0.1})},
             {"alpha", reals({0.5, 1})},
             {"lambda", reals({0.5, 1})}}};
}

GridSpec reference_logreg_grid() {
    return {{{"penalty", words({"l1", "l2", "elasticnet", "none"})},
             {"C", reals({0.01, 0.1, 1, 10, 100})},
             {"solver", words({"liblinear", "saga"})},
             {"max_iter", reals({100, 200, 300})}}};
}

gbdt::HyperParams apply(gbdt::HyperParams p, std::span<const std::string> names, std::span<const ParamValue> values) {
    for (std::size_t k = 0; k < names.size(); ++k) {
        const auto& n = names[k];
        const auto& v = values[k];
        if (n == "n_estimators") p.n_estimators = as_count(n, v);
        else if (n == "eta") p.eta = as_real(n, v);
        else if (n == "max_depth") p.max_depth = as_count(n, v);
        else if (n == "min_child_weight") p.min_child_weight = as_real(n, v);
        else if (n == "subsample") p.subsample = as_real(n, v);
        else if (n == "colsample") p.colsample = as_real(n, v);
        else if (n == "gamma") p.gamma = as_real(n, v);
        else if (n == "alpha") p.alpha = as_real(n, v);
        else if (n == "lambda") p.lambda = as_real(n, v);
        else if (n == "seed") p.seed = as_count(n, v);
        else fail(ErrorKind::Parameter, "unknown gbdt grid parameter " + n);
    }
    return p;
}

logreg::Config apply(logreg::Config c, std::span<const std::string> names, std::span<const ParamValue> values) {
    for (std::size_t k = 0; k < names.size(); ++k) {
        const auto& n = names[k];
        const auto& v = values[k];
        if (n == "penalty") c.penalty = logreg::penalty_from_string(as_word(n, v));
        else if (n == "C") c.C = as_real(n, v);
        else if (n == "solver") c.solver = as_word(n, v);
        else if (n == "max_iter") c.max_iter = as_count(n, v);
        else if (n == "l1_ratio") c.l1_ratio = as_real(n, v);
        else fail(ErrorKind::Parameter, "unknown logreg grid parameter " + n);
    }
    return c;
}

std::size_t select_best(std::span<const TuneRecord> records) {
    std::size_t best = records.size();
    for (std::size_t i = 0; i < records.size(); ++i) {
        if (!records[i].ok) continue;
        if (best == records.size() || records[i].rmse < records[best].rmse ||
            (records[i].rmse == records[best].rmse && records[i].cell < records[best].cell))
            best = i;
    }
    if (best == records.size()) fail(ErrorKind::Training, "every grid cell failed");
    return best;
}

TuneResult grid_search(const GridSpec& grid, std::span<const std::uint8_t> validation_labels,
                       const CellEvaluator& evaluate, std::size_t threads) {
    grid.validate();
    const std::size_t cells = grid.size();
    TuneResult result;
    result.names = grid.names();
    result.records.resize(cells);

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t cell; (cell = next.fetch_add(1)) < cells;) {
            auto& rec = result.records[cell];
            rec.cell = cell;
            rec.values = grid.cell(cell);
            const auto start = std::chrono::steady_clock::now();
            try {
                const auto probs = evaluate(cell, rec.values);
                rec.rmse = metrics::rmse(validation_labels, probs);
                const auto cm = metrics::confusion(validation_labels, metrics::threshold_labels(probs));
                rec.accuracy = metrics::scalar_metrics(cm).accuracy;
                rec.ok = std::isfinite(rec.rmse);
                if (!rec.ok) rec.message = "non-finite rmse";
            } catch (const std::exception& e) {
                rec.ok = false;
                rec.message = e.what();
            }
            rec.wall_time_ms =
                std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
        }
    };
    threads = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(cells, 1));
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    result.best = select_best(result.records);
    return result;
}

ValidationSplit validation_split(RowRange train_rows) {
    const auto inner = time_split(train_rows.size(), 0.2);
    return {{train_rows.begin, train_rows.begin + inner.train_end}, {train_rows.begin + inner.test_start, train_rows.end}};
}

namespace {

struct CellFit {
    std::string serialized;
    std::vector<double> validation_probs;
};

CellFit fit_cell(const FeatureFrame& raw, RowRange fit_rows, RowRange validation, Learner learner,
                 const LearnerDefaults& defaults, std::span<const std::string> names,
                 std::span<const ParamValue> values, bool want_model) {
    const auto scaled = transform(raw, fit_scaler(raw, fit_rows));
    CellFit out;
    if (learner == Learner::Gbdt) {
        auto params = apply(defaults.gbdt, names, values);
        auto trained = gbdt::train(scaled, fit_rows, params);
        if (want_model) out.serialized = gbdt::serialize(trained.model);
        if (!validation.empty()) out.validation_probs = gbdt::predict_proba(trained.model, scaled, validation);
    } else {
        auto config = apply(defaults.logreg, names, values);
        auto fit = logreg::fit_logreg(scaled, fit_rows, config);
        if (want_model) out.serialized = logreg::serialize(fit.model);
        if (!validation.empty()) out.validation_probs = logreg::predict_logreg(fit.model, scaled, validation);
    }
    return out;
}

}  // namespace

std::string train_cell(const FeatureFrame& raw_frame, RowRange fit_rows, Learner learner,
                       const LearnerDefaults& defaults, std::span<const std::string> names,
                       std::span<const ParamValue> values) {
    return fit_cell(raw_frame, fit_rows, {}, learner, defaults, names, values, true).serialized;
}

TuneResult grid_search(const FeatureFrame& raw_frame, const SplitIndices& split, const GridSpec& grid,
                       Learner learner, const LearnerDefaults& defaults, std::size_t threads) {
    const auto blocks = validation_split(split.train());
    const auto labels = raw_frame.labels().subspan(blocks.validation.begin, blocks.validation.size());
    const auto names = grid.names();
    return grid_search(
        grid, labels,
        [&](std::size_t, const std::vector<ParamValue>& values) {
            return fit_cell(raw_frame, blocks.fit, blocks.validation, learner, defaults, names, values, false)
                .validation_probs;
        },
        threads);
}

void write_tune_log(std::ostream& out, const TuneResult& result) {
    out << "cell";
    for (const auto& n : result.names) out << ',' << n;
    out << ",rmse,accuracy,wall_time_ms,status\n";
    for (const auto& r : result.records) {
        out << r.cell;
        for (const auto& v : r.values) out << ',' << to_string(v);
        std::string status = r.ok ? "ok" : "failed: " + r.message;
        std::replace(status.begin(), status.end(), ',', ';');
        std::replace(status.begin(), status.end(), '\n', ' ');
        out << ',' << (r.ok ? format_real(r.rmse) : "") << ',' << (r.ok ? format_real(r.accuracy) : "") << ','
            << static_cast<long long>(std::llround(r.wall_time_ms)) << ',' << status << '\n';
    }
}

}  // namespace trendforge::tuning
