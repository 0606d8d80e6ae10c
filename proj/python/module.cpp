#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "trendforge/cli.hpp"
#include "trendforge/error.hpp"
#include "trendforge/gbdt.hpp"
#include "trendforge/indicators.hpp"
#include "trendforge/labeling.hpp"
#include "trendforge/logreg.hpp"
#include "trendforge/market_data.hpp"
#include "trendforge/metrics.hpp"
#include "trendforge/pipeline.hpp"

namespace py = pybind11;
using namespace trendforge;

namespace {

using Matrix = py::array_t<double, py::array::c_style | py::array::forcecast>;
using Vector = py::array_t<double, py::array::c_style | py::array::forcecast>;
using Labels = py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>;

template <typename T>
py::array_t<T> to_numpy(const std::vector<T>& v) {
    py::array_t<T> out(static_cast<py::ssize_t>(v.size()));
    std::copy(v.begin(), v.end(), out.mutable_data());
    return out;
}

std::span<const double> view(const Vector& v) {
    if (v.ndim() != 1) throw py::value_error("expected a 1-D array");
    return {v.data(), static_cast<std::size_t>(v.shape(0))};
}

std::span<const std::uint8_t> view(const Labels& v) {
    if (v.ndim() != 1) throw py::value_error("expected a 1-D label array");
    return {v.data(), static_cast<std::size_t>(v.shape(0))};
}

/// Row-major (n, d) matrix plus 0/1 labels as a column-major frame.
FeatureFrame frame_of(const Matrix& x, std::optional<Labels> y, std::optional<std::vector<std::string>> names) {
    if (x.ndim() != 2) throw py::value_error("X must be 2-D");
    const auto n = static_cast<std::size_t>(x.shape(0)), d = static_cast<std::size_t>(x.shape(1));
    std::vector<std::vector<double>> cols(d, std::vector<double>(n));
    const double* p = x.data();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) cols[j][i] = p[i * d + j];
    std::vector<std::string> cn;
    if (names) {
        if (names->size() != d) throw py::value_error("names length differs from the column count");
        cn = *names;
    } else {
        for (std::size_t j = 0; j < d; ++j) cn.push_back("x" + std::to_string(j));
    }
    std::vector<std::uint8_t> labels(n, 0);
    if (y) {
        const auto s = view(*y);
        if (s.size() != n) throw py::value_error("y length differs from the row count");
        labels.assign(s.begin(), s.end());
    }
    std::vector<EpochMs> t(n);
    for (std::size_t i = 0; i < n; ++i) t[i] = static_cast<EpochMs>(i);
    return FeatureFrame(std::move(t), std::move(cn), std::move(cols), std::move(labels));
}

Matrix matrix_of(const FeatureFrame& f) {
    Matrix out({static_cast<py::ssize_t>(f.rows()), static_cast<py::ssize_t>(f.cols())});
    double* p = out.mutable_data();
    for (std::size_t j = 0; j < f.cols(); ++j) {
        const auto c = f.column(j);
        for (std::size_t i = 0; i < f.rows(); ++i) p[i * f.cols() + j] = c[i];
    }
    return out;
}

gbdt::HyperParams gbdt_params(const py::kwargs& kw) {
    auto p = gbdt::reference_params();
    for (auto [key, value] : kw) {
        const auto k = key.cast<std::string>();
        if (k == "n_estimators") p.n_estimators = value.cast<std::size_t>();
        else if (k == "eta") p.eta = value.cast<double>();
        else if (k == "max_depth") p.max_depth = value.cast<std::size_t>();
        else if (k == "min_child_weight") p.min_child_weight = value.cast<double>();
        else if (k == "subsample") p.subsample = value.cast<double>();
        else if (k == "colsample") p.colsample = value.cast<double>();
        else if (k == "gamma") p.gamma = value.cast<double>();
        else if (k == "alpha") p.alpha = value.cast<double>();
        else if (k == "lambda_") p.lambda = value.cast<double>();
        else if (k == "seed") p.seed = value.cast<std::uint64_t>();
        else throw py::type_error("unknown GBDT parameter '" + k + "'");
    }
    p.validate();
    return p;
}

logreg::Config logreg_config(const py::kwargs& kw) {
    auto c = logreg::reference_config();
    for (auto [key, value] : kw) {
        const auto k = key.cast<std::string>();
        if (k == "penalty") c.penalty = logreg::penalty_from_string(value.cast<std::string>());
        else if (k == "C") c.C = value.cast<double>();
        else if (k == "max_iter") c.max_iter = value.cast<std::size_t>();
        else if (k == "l1_ratio") c.l1_ratio = value.cast<double>();
        else if (k == "tol") c.tol = value.cast<double>();
        else if (k == "solver") c.solver = value.cast<std::string>();
        else throw py::type_error("unknown logistic regression parameter '" + k + "'");
    }
    c.validate();
    return c;
}

std::vector<double> row_probs(const Matrix& x, const std::function<double(std::span<const double>)>& f) {
    if (x.ndim() != 2) throw py::value_error("X must be 2-D");
    const auto n = static_cast<std::size_t>(x.shape(0)), d = static_cast<std::size_t>(x.shape(1));
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = f({x.data() + i * d, d});
    return out;
}

struct PyGbdt {
    gbdt::BoostedModel model;
    std::vector<gbdt::StageMetrics> train_curve;
};

struct PyLogreg {
    logreg::LinearModel model;
    std::vector<double> objective;
};

py::dict report_dict(const metrics::EvalReport& r) {
    py::dict d;
    d["tn"] = r.matrix.tn;
    d["fp"] = r.matrix.fp;
    d["fn"] = r.matrix.fn;
    d["tp"] = r.matrix.tp;
    d["accuracy"] = r.scalars.accuracy;
    d["precision"] = r.scalars.precision;
    d["recall"] = r.scalars.recall;
    d["f1"] = r.scalars.f1;
    d["roc_auc"] = r.roc_auc;
    d["logloss"] = r.logloss;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Trend-signal features, gradient boosted trees and evaluation";

    // Library errors surface as TrendforgeError with a `kind` attribute such as "config error".
    m.attr("TrendforgeError") = py::reinterpret_steal<py::object>(
        PyErr_NewException("trendforge._core.TrendforgeError", PyExc_RuntimeError, nullptr));
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            const auto type = py::module_::import("trendforge._core").attr("TrendforgeError");
            py::object inst = type(e.what());
            inst.attr("kind") = to_string(e.kind());
            PyErr_SetObject(type.ptr(), inst.ptr());
        }
    });

    // ------------------------------------------------------------ data
    m.def(
        "read_klines",
        [](const std::string& path, const std::string& interval) {
            const auto r = parse_klines_csv(path, interval_from_string(interval));
            std::vector<double> o, h, l, c, v;
            std::vector<std::int64_t> t;
            for (const auto& k : r.series.candles()) {
                t.push_back(k.open_time);
                o.push_back(k.open);
                h.push_back(k.high);
                l.push_back(k.low);
                c.push_back(k.close);
                v.push_back(k.volume);
            }
            py::dict d;
            d["open_time"] = to_numpy(t);
            d["open"] = to_numpy(o);
            d["high"] = to_numpy(h);
            d["low"] = to_numpy(l);
            d["close"] = to_numpy(c);
            d["volume"] = to_numpy(v);
            d["duplicates_dropped"] = r.duplicates_dropped;
            d["missing"] = r.missing.size();
            return d;
        },
        py::arg("path"), py::arg("interval") = "15m", "Parse a 12-column klines CSV into numpy columns.");

    m.def(
        "build_features",
        [](const std::string& path, const std::string& interval, int bb_ddof) {
            const auto series = parse_klines_csv(path, interval_from_string(interval)).series;
            FeatureSpec spec;
            spec.bb_ddof = bb_ddof;
            FrameBuildInfo info;
            const auto f = build_frame(series, spec, &info);
            py::dict d;
            d["names"] = std::vector<std::string>(f.names().begin(), f.names().end());
            d["X"] = matrix_of(f);
            d["y"] = to_numpy(std::vector<std::uint8_t>(f.labels().begin(), f.labels().end()));
            d["open_time"] = to_numpy(std::vector<std::int64_t>(f.timestamps().begin(), f.timestamps().end()));
            d["warmup_rows"] = info.warmup_rows;
            d["binding_column"] = info.binding_column;
            return d;
        },
        py::arg("path"), py::arg("interval") = "15m", py::arg("bb_ddof") = 0,
        "Indicator matrix and MA-crossover labels (1 = Buy) after warm-up trimming.");

    // ------------------------------------------------------------ indicators and labels
    namespace ind = indicators;
    m.def("sma", [](const Vector& s, std::size_t n) { return to_numpy(ind::sma(view(s), n).values); });
    m.def("ema", [](const Vector& s, std::size_t n) { return to_numpy(ind::ema(view(s), n).values); });
    m.def("rsi", [](const Vector& s, std::size_t n) { return to_numpy(ind::rsi(view(s), n).values); });
    m.def("macd", [](const Vector& s) { return to_numpy(ind::macd(view(s)).values); });
    m.def("momentum", [](const Vector& s, std::size_t n) { return to_numpy(ind::momentum(view(s), n).values); });
    m.def("proc", [](const Vector& s, std::size_t n) { return to_numpy(ind::proc(view(s), n).values); });
    m.def(
        "bollinger",
        [](const Vector& s, std::size_t n, int ddof) {
            const auto b = ind::bollinger(view(s), n, ddof);
            return py::make_tuple(to_numpy(b.dn.values), to_numpy(b.ma.values), to_numpy(b.up.values));
        },
        py::arg("series"), py::arg("period"), py::arg("ddof") = 0, "(lower, middle, upper) bands.");
    m.def(
        "ma_labels",
        [](const Vector& closes, std::size_t short_len, std::size_t long_len) {
            const auto y = labeling::ma_crossover_labels(view(closes), short_len, long_len);
            std::vector<std::int8_t> out(y.values.size());
            for (std::size_t i = 0; i < out.size(); ++i) out[i] = static_cast<std::int8_t>(y.values[i]);
            return to_numpy(out);
        },
        py::arg("closes"), py::arg("short") = 10, py::arg("long") = 60, "1 Buy, -1 Sell, 0 during warm-up.");

    // ------------------------------------------------------------ pipeline
    m.def(
        "time_split",
        [](std::size_t rows, double p) {
            const auto s = time_split(rows, p);
            return py::make_tuple(s.train_end, s.test_start);
        },
        py::arg("rows"), py::arg("p") = 0.2, "(train_end, test_start) of a chronological split.");
    m.def(
        "chi2_scores",
        [](const Matrix& x, const Labels& y, std::size_t k) {
            const auto f = frame_of(x, y, std::nullopt);
            const auto r = chi2_scores(f, RowRange{0, f.rows()}, k);
            std::vector<std::size_t> chosen;
            for (const auto& n : r.selected) chosen.push_back(*f.index_of(n));
            return py::make_tuple(to_numpy(r.scores), chosen);
        },
        py::arg("X"), py::arg("y"), py::arg("k") = 8, "(scores, top-k column indices).");

    // ------------------------------------------------------------ learners
    py::class_<PyGbdt>(m, "GBDT")
        .def(py::init([](const Matrix& x, const Labels& y, std::optional<std::vector<std::string>> names,
                         const py::kwargs& kw) {
                 const auto f = frame_of(x, y, names);
                 auto r = gbdt::train(f, RowRange{0, f.rows()}, gbdt_params(kw));
                 return PyGbdt{std::move(r.model), std::move(r.train_curve)};
             }),
             py::arg("X"), py::arg("y"), py::arg("names") = py::none(),
             "Fit on (X, y). Keyword parameters: n_estimators, eta, max_depth, min_child_weight, subsample, "
             "colsample, gamma, alpha, lambda_, seed.")
        .def("predict_proba",
             [](const PyGbdt& g, const Matrix& x) {
                 return to_numpy(row_probs(x, [&](std::span<const double> r) { return gbdt::predict_proba(g.model, r); }));
             })
        .def("predict_margin",
             [](const PyGbdt& g, const Matrix& x) {
                 return to_numpy(row_probs(x, [&](std::span<const double> r) { return gbdt::predict_margin(g.model, r); }));
             })
        .def("staged_logloss",
             [](const PyGbdt& g, const Matrix& x, const Labels& y) {
                 const auto f = frame_of(x, y, g.model.feature_names);
                 std::vector<double> out;
                 for (const auto& s : gbdt::staged_metrics(g.model, f, RowRange{0, f.rows()})) out.push_back(s.logloss);
                 return to_numpy(out);
             })
        .def_property_readonly("train_logloss",
                               [](const PyGbdt& g) {
                                   std::vector<double> out;
                                   for (const auto& s : g.train_curve) out.push_back(s.logloss);
                                   return to_numpy(out);
                               })
        .def_property_readonly("n_trees", [](const PyGbdt& g) { return g.model.trees.size(); })
        .def("feature_importance",
             [](const PyGbdt& g) {
                 const auto imp = gbdt::feature_importance(g.model);
                 return py::make_tuple(imp.split_count, imp.total_gain);
             })
        .def("to_json", [](const PyGbdt& g) { return gbdt::serialize(g.model); })
        .def_static("from_json", [](const std::string& s) { return PyGbdt{gbdt::deserialize(s), {}}; });

    py::class_<PyLogreg>(m, "LogisticRegression")
        .def(py::init([](const Matrix& x, const Labels& y, std::optional<std::vector<std::string>> names,
                         const py::kwargs& kw) {
                 const auto f = frame_of(x, y, names);
                 auto r = logreg::fit_logreg(f, RowRange{0, f.rows()}, logreg_config(kw));
                 return PyLogreg{std::move(r.model), std::move(r.objective)};
             }),
             py::arg("X"), py::arg("y"), py::arg("names") = py::none(),
             "Fit on (X, y). Keyword parameters: penalty, C, max_iter, l1_ratio, tol, solver.")
        .def("predict_proba",
             [](const PyLogreg& l, const Matrix& x) {
                 return to_numpy(row_probs(x, [&](std::span<const double> r) { return logreg::predict_logreg(l.model, r); }));
             })
        .def_property_readonly("coef", [](const PyLogreg& l) { return to_numpy(l.model.weights); })
        .def_property_readonly("intercept", [](const PyLogreg& l) { return l.model.intercept; })
        .def_property_readonly("objective", [](const PyLogreg& l) { return to_numpy(l.objective); })
        .def("to_json", [](const PyLogreg& l) { return logreg::serialize(l.model); })
        .def_static("from_json", [](const std::string& s) { return PyLogreg{logreg::deserialize(s), {}}; });

    // ------------------------------------------------------------ metrics and CLI
    m.def(
        "evaluate",
        [](const Labels& y, const Vector& p) { return report_dict(metrics::evaluate(view(y), view(p))); },
        py::arg("y"), py::arg("proba"), "Confusion counts, scalar metrics, ROC AUC and log loss at threshold 0.5.");
    m.def("roc_auc", [](const Labels& y, const Vector& s) { return metrics::roc_auc(view(y), view(s)).auc; });
    m.def(
        "run_cli",
        [](const std::vector<std::string>& args) {
            std::ostringstream out, err;
            int code;
            {
                py::gil_scoped_release release;
                code = cli::run_cli(args, out, err);
            }
            return py::make_tuple(code, out.str(), err.str());
        },
        py::arg("args"), "Run a trendforge subcommand in-process; returns (exit_code, stdout, stderr).");
}
