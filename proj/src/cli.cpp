#include "trendforge/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <iomanip>
#include <json.hpp>
#include <optional>
#include <ostream>
#include <sstream>
#include <thread>

#include "trendforge/artifacts.hpp"
#include "trendforge/config.hpp"
#include "trendforge/gbdt.hpp"
#include "trendforge/logreg.hpp"
#include "trendforge/market_data.hpp"
#include "trendforge/metrics.hpp"
#include "trendforge/numfmt.hpp"
#include "trendforge/pipeline.hpp"
#include "trendforge/tuning.hpp"

namespace trendforge::cli {

int exit_code(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::Parse:
        case ErrorKind::Validation:
        case ErrorKind::EmptyInput:
        case ErrorKind::InsufficientData:
        case ErrorKind::Network:
            return kExitData;
        case ErrorKind::Training:
            return kExitTraining;
        case ErrorKind::Parameter:
        case ErrorKind::Schema:
        case ErrorKind::Config:
        case ErrorKind::MissingArtifact:
            return kExitConfig;
    }
    return kExitConfig;
}

namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

// File names inside the output directory.
constexpr const char* kCandles = "candles.csv";
constexpr const char* kFeatures = "features.csv";
constexpr const char* kSelection = "selection.csv";
constexpr const char* kSplit = "split.json";
constexpr const char* kScaler = "scaler.json";
constexpr const char* kBuild = "build.json";
constexpr const char* kModel = "model.json";
constexpr const char* kTuneLog = "tune.csv";
constexpr const char* kTuneBest = "tune_best.json";
constexpr const char* kReport = "report.json";
constexpr const char* kRoc = "roc.csv";
constexpr const char* kCurves = "curves.csv";
constexpr const char* kImportance = "importance.csv";
constexpr const char* kSummary = "summary.txt";

struct Context {
    RunConfig config;
    fs::path out_dir;
    std::ostream& out;
    std::ostream& err;
    bool use_tuned = false;

    fs::path at(const char* name) const { return out_dir / name; }
};

std::string learner_name(tuning::Learner learner) {
    return learner == tuning::Learner::Gbdt ? "gbdt" : "logreg";
}

/// Reads an upstream artifact, naming the command that produces it when absent.
std::string require(const Context& ctx, const char* name, const char* producer) {
    const auto path = ctx.at(name);
    if (!fs::exists(path))
        fail(ErrorKind::MissingArtifact,
             path.string() + " not found; run `trendforge " + producer + "` first");
    return artifacts::read_text(path);
}

json parse_json(const std::string& text, const std::string& what) {
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        fail(ErrorKind::Schema, what + ": " + e.what());
    }
}

std::string build_hash(const RunConfig& config) { return fnv1a_hex(build_section_json(config)); }

// ---------------------------------------------------------------- fetch

int cmd_fetch(Context& ctx) {
    const auto& d = ctx.config.data;
    const auto interval = interval_from_string(d.interval);
    ctx.err << "fetching " << d.symbol << " " << d.interval << " [" << d.start << ", " << d.end << ")\n";
    auto result = fetch_klines(d.symbol, interval, d.start, d.end);
    std::ostringstream csv;
    write_klines(csv, result.series);
    artifacts::write_text(ctx.at(kCandles), csv.str());

    const auto missing = missing_open_times(result.series, d.start, d.end);
    ctx.out << "fetch: " << result.series.size() << " bars in " << result.requests << " requests, "
            << result.duplicates_dropped << " duplicates dropped, " << missing.size() << " missing\n";
    if (!result.complete) {
        ctx.err << "error: fetch incomplete (" << result.error << "); partial data written to "
                << ctx.at(kCandles).string() << "\n";
        return kExitData;
    }
    return kExitOk;
}

// ---------------------------------------------------------------- build

CandleSeries load_candles(const Context& ctx) {
    const auto interval = interval_from_string(ctx.config.data.interval);
    fs::path source = ctx.config.data.csv.empty() ? ctx.at(kCandles) : fs::path(ctx.config.data.csv);
    if (!fs::exists(source)) {
        if (ctx.config.data.csv.empty())
            fail(ErrorKind::MissingArtifact, source.string() + " not found; run `trendforge fetch` first");
        fail(ErrorKind::Config, "data.csv: file not found: " + source.string());
    }
    auto parsed = parse_klines_csv(source, interval);
    if (parsed.duplicates_dropped)
        ctx.err << "warning: dropped " << parsed.duplicates_dropped << " duplicate bars\n";
    if (!parsed.missing.empty())
        ctx.err << "warning: " << parsed.missing.size() << " bars missing inside the series\n";
    return std::move(parsed.series);
}

int cmd_build(Context& ctx) {
    const auto& cfg = ctx.config;
    const auto candles = load_candles(ctx);
    FrameBuildInfo info;
    const auto frame = build_frame(candles, cfg.features, &info);
    if (cfg.select_k > frame.cols())
        fail(ErrorKind::Config, "selection.k: " + std::to_string(cfg.select_k) + " exceeds the feature count " +
                                    std::to_string(frame.cols()));
    const auto split = time_split(frame, cfg.split_p);
    const auto scaler = fit_scaler(frame, split);
    const auto selection = chi2_scores(frame, split, cfg.select_k);

    const auto hash = build_hash(cfg);
    const auto features_text = artifacts::features_csv(frame);
    artifacts::write_text(ctx.at(kFeatures), features_text);
    artifacts::write_text(ctx.at(kSelection), artifacts::selection_csv(selection));
    artifacts::write_text(ctx.at(kSplit), artifacts::split_json(split, hash));
    artifacts::write_text(ctx.at(kScaler), artifacts::scaler_json(scaler, hash));

    json manifest = {{"build_hash", hash},
                     {"features_digest", fnv1a_hex(features_text)},
                     {"config_hash", config_hash(cfg)},
                     {"input_bars", info.input_bars},
                     {"warmup_rows", info.warmup_rows},
                     {"dropped_rows", info.dropped_rows},
                     {"rows", frame.rows()},
                     {"columns", frame.cols()}};
    artifacts::write_text(ctx.at(kBuild), manifest.dump(1) + "\n");

    ctx.out << "build: " << info.input_bars << " bars -> " << frame.rows() << " rows x " << frame.cols()
            << " features (warm-up " << info.warmup_rows << "), train " << split.train_end << ", test "
            << (split.m - split.test_start) << "\n";
    ctx.out << "selected:";
    for (const auto& n : selection.selected) ctx.out << " " << n;
    ctx.out << "\n";
    return kExitOk;
}

// ---------------------------------------------------------------- shared loading

struct BuildArtifacts {
    FeatureFrame raw;          // unscaled, every column
    SelectionResult selection;
    SplitIndices split;
    ScalerParams scaler;
    std::string build_hash;
    std::string features_digest;
};

BuildArtifacts load_build(const Context& ctx) {
    BuildArtifacts b;
    const auto features_text = require(ctx, kFeatures, "build");
    const auto manifest = parse_json(require(ctx, kBuild, "build"), kBuild);
    b.raw = artifacts::parse_features_csv(features_text);
    b.selection = artifacts::parse_selection_csv(require(ctx, kSelection, "build"));
    std::string split_hash, scaler_hash;
    b.split = artifacts::parse_split_json(require(ctx, kSplit, "build"), &split_hash);
    b.scaler = artifacts::parse_scaler_json(require(ctx, kScaler, "build"), &scaler_hash);
    b.features_digest = fnv1a_hex(features_text);
    try {
        b.build_hash = manifest.at("build_hash").get<std::string>();
        if (manifest.at("features_digest").get<std::string>() != b.features_digest)
            fail(ErrorKind::Validation, std::string(kFeatures) + " changed since `trendforge build`; rebuild");
    } catch (const json::exception& e) {
        fail(ErrorKind::Schema, std::string(kBuild) + ": " + e.what());
    }
    if (split_hash != b.build_hash || scaler_hash != b.build_hash)
        fail(ErrorKind::Validation, "build artifacts come from different builds; rerun `trendforge build`");
    if (b.split.m != b.raw.rows())
        fail(ErrorKind::Validation, "split.json row count does not match features.csv; rerun `trendforge build`");
    return b;
}

std::vector<std::string> model_columns(const Context& ctx, const BuildArtifacts& b) {
    if (ctx.config.learner == tuning::Learner::Logreg && ctx.config.logreg_all_features)
        return {b.raw.names().begin(), b.raw.names().end()};
    return b.selection.selected;
}

// ---------------------------------------------------------------- tune

tuning::GridSpec grid_for(const RunConfig& cfg) {
    if (cfg.learner == tuning::Learner::Gbdt) return cfg.tune.gbdt_grid.value_or(tuning::reference_gbdt_grid());
    return cfg.tune.logreg_grid.value_or(tuning::reference_logreg_grid());
}

json param_json(const tuning::ParamValue& v) {
    if (const auto* d = std::get_if<double>(&v)) return *d;
    return std::get<std::string>(v);
}

int cmd_tune(Context& ctx) {
    const auto& cfg = ctx.config;
    const auto b = load_build(ctx);
    const auto columns = model_columns(ctx, b);
    const auto raw = b.raw.select_columns(columns);
    const auto grid = grid_for(cfg);
    grid.validate();
    auto threads = cfg.tune.threads ? cfg.tune.threads : std::max(1u, std::thread::hardware_concurrency());

    ctx.err << "tune: " << grid.size() << " cells, " << learner_name(cfg.learner) << ", " << threads
            << " threads\n";
    const tuning::LearnerDefaults defaults{cfg.gbdt, cfg.logreg};
    const auto result = tuning::grid_search(raw, b.split, grid, cfg.learner, defaults, threads);

    std::ostringstream log;
    tuning::write_tune_log(log, result);
    artifacts::write_text(ctx.at(kTuneLog), log.str());

    const auto& best = result.records[result.best];
    json values = json::object();
    for (std::size_t i = 0; i < result.names.size(); ++i) values[result.names[i]] = param_json(best.values[i]);
    json doc = {{"learner", learner_name(cfg.learner)}, {"cell", best.cell},       {"params", values},
                {"rmse", best.rmse},                    {"accuracy", best.accuracy}, {"build_hash", b.build_hash}};
    artifacts::write_text(ctx.at(kTuneBest), doc.dump(1) + "\n");

    std::size_t failed = 0;
    for (const auto& r : result.records) failed += r.ok ? 0 : 1;
    ctx.out << "tune: best cell " << best.cell << " rmse " << format_shortest(best.rmse) << " accuracy "
            << format_shortest(best.accuracy) << " (" << failed << " failed cells)\n";
    for (const auto& [k, v] : values.items()) ctx.out << "  " << k << " = " << v.dump() << "\n";
    return kExitOk;
}

/// Applies tune_best.json on top of the configured hyper-parameters.
void apply_tuned(Context& ctx, const std::string& build) {
    const auto doc = parse_json(require(ctx, kTuneBest, "tune"), kTuneBest);
    std::vector<std::string> names;
    std::vector<tuning::ParamValue> values;
    try {
        if (doc.at("learner").get<std::string>() != learner_name(ctx.config.learner))
            fail(ErrorKind::Config, "model.learner: tune_best.json was produced for " +
                                        doc.at("learner").get<std::string>());
        if (doc.at("build_hash").get<std::string>() != build)
            fail(ErrorKind::Validation, "tune_best.json comes from a different build; rerun `trendforge tune`");
        for (const auto& [k, v] : doc.at("params").items()) {
            names.push_back(k);
            if (v.is_number()) values.emplace_back(v.get<double>());
            else values.emplace_back(v.get<std::string>());
        }
    } catch (const json::exception& e) {
        fail(ErrorKind::Schema, std::string(kTuneBest) + ": " + e.what());
    }
    if (ctx.config.learner == tuning::Learner::Gbdt) ctx.config.gbdt = tuning::apply(ctx.config.gbdt, names, values);
    else ctx.config.logreg = tuning::apply(ctx.config.logreg, names, values);
}

// ---------------------------------------------------------------- train

int cmd_train(Context& ctx) {
    const auto b = load_build(ctx);
    if (ctx.use_tuned) apply_tuned(ctx, b.build_hash);
    const auto& cfg = ctx.config;
    const auto columns = model_columns(ctx, b);
    const auto frame = transform(b.raw, b.scaler).select_columns(columns);

    json envelope = {{"learner", learner_name(cfg.learner)},
                     {"build_hash", b.build_hash},
                     {"features_digest", b.features_digest},
                     {"config_hash", config_hash(cfg)},
                     {"seed", cfg.seed}};
    if (cfg.learner == tuning::Learner::Gbdt) {
        auto result = gbdt::train(frame, b.split, cfg.gbdt);
        envelope["model"] = json::parse(gbdt::serialize(result.model));
        const auto& last = result.train_curve.back();
        ctx.out << "train: gbdt " << result.model.trees.size() << " trees, train logloss "
                << format_shortest(last.logloss) << ", train error " << format_shortest(last.error) << "\n";
    } else {
        auto result = logreg::fit_logreg(frame, b.split, cfg.logreg);
        envelope["model"] = json::parse(logreg::serialize(result.model));
        ctx.out << "train: logreg " << logreg::to_string(cfg.logreg.penalty) << " C=" << format_shortest(cfg.logreg.C)
                << ", " << result.iterations << " iterations, objective "
                << format_shortest(result.objective.back()) << "\n";
    }
    artifacts::write_text(ctx.at(kModel), envelope.dump(1) + "\n");
    return kExitOk;
}

// ---------------------------------------------------------------- eval

struct LoadedModel {
    tuning::Learner learner = tuning::Learner::Gbdt;
    std::optional<gbdt::BoostedModel> boosted;
    std::optional<logreg::LinearModel> linear;
    std::vector<std::string> feature_names;
    std::string build_hash;
    std::string features_digest;
    std::string config_hash;
};

LoadedModel load_model(const Context& ctx) {
    const auto doc = parse_json(require(ctx, kModel, "train"), kModel);
    LoadedModel m;
    try {
        const auto learner = doc.at("learner").get<std::string>();
        m.build_hash = doc.at("build_hash").get<std::string>();
        m.features_digest = doc.at("features_digest").get<std::string>();
        m.config_hash = doc.at("config_hash").get<std::string>();
        const auto body = doc.at("model").dump();
        if (learner == "gbdt") {
            m.learner = tuning::Learner::Gbdt;
            m.boosted = gbdt::deserialize(body);
            m.feature_names = m.boosted->feature_names;
        } else if (learner == "logreg") {
            m.learner = tuning::Learner::Logreg;
            m.linear = logreg::deserialize(body);
            m.feature_names = m.linear->feature_names;
        } else {
            fail(ErrorKind::Schema, std::string(kModel) + ": unknown learner \"" + learner + "\"");
        }
    } catch (const json::exception& e) {
        fail(ErrorKind::Schema, std::string(kModel) + ": " + e.what());
    }
    return m;
}

std::vector<double> predict(const LoadedModel& m, const FeatureFrame& frame, RowRange rows) {
    if (m.boosted) return gbdt::predict_proba(*m.boosted, frame, rows);
    return logreg::predict_logreg(*m.linear, frame, rows);
}

std::vector<gbdt::StageMetrics> linear_curve(const LoadedModel& m, const FeatureFrame& frame, RowRange rows) {
    const auto probs = predict(m, frame, rows);
    const auto labels = frame.labels().subspan(rows.begin, rows.end - rows.begin);
    const auto predicted = metrics::threshold_labels(probs);
    std::size_t wrong = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) wrong += predicted[i] != labels[i];
    return {{metrics::logloss(labels, probs), static_cast<double>(wrong) / static_cast<double>(labels.size())}};
}

int cmd_eval(Context& ctx) {
    const auto b = load_build(ctx);
    const auto m = load_model(ctx);
    if (m.build_hash != b.build_hash || m.features_digest != b.features_digest)
        fail(ErrorKind::Validation, "model.json was trained on a different feature build (model " + m.build_hash +
                                        "/" + m.features_digest + ", features " + b.build_hash + "/" +
                                        b.features_digest + "); rerun `trendforge train`");
    for (const auto& n : m.feature_names)
        if (!b.raw.index_of(n)) fail(ErrorKind::Validation, "model feature " + n + " is missing from features.csv");
    const auto frame = transform(b.raw, b.scaler).select_columns(m.feature_names);

    const auto test = b.split.test();
    const auto probs = predict(m, frame, test);
    const auto labels = frame.labels().subspan(test.begin, test.end - test.begin);
    const auto report = metrics::evaluate(labels, probs);

    json doc = {{"learner", learner_name(m.learner)},
                {"build_hash", b.build_hash},
                {"features_digest", b.features_digest},
                {"config_hash", m.config_hash},
                {"test_rows", labels.size()},
                {"test_start", b.split.test_start},
                {"threshold", 0.5},
                {"confusion",
                 {{"tn", report.matrix.tn}, {"fp", report.matrix.fp}, {"fn", report.matrix.fn}, {"tp", report.matrix.tp}}},
                {"accuracy", report.scalars.accuracy},
                {"precision", report.scalars.precision},
                {"recall", report.scalars.recall},
                {"f1", report.scalars.f1},
                {"degenerate",
                 {{"precision", report.scalars.precision_degenerate},
                  {"recall", report.scalars.recall_degenerate},
                  {"f1", report.scalars.f1_degenerate}}},
                {"roc_auc", report.roc_auc},
                {"logloss", report.logloss},
                {"rmse", metrics::rmse(labels, probs)},
                {"files", {{"roc", kRoc}, {"curves", kCurves}}}};
    artifacts::write_text(ctx.at(kReport), doc.dump(1) + "\n");
    artifacts::write_text(ctx.at(kRoc), artifacts::roc_csv(report.roc_points));

    std::vector<gbdt::StageMetrics> train_curve, test_curve;
    if (m.boosted) {
        train_curve = gbdt::staged_metrics(*m.boosted, frame, b.split.train());
        test_curve = gbdt::staged_metrics(*m.boosted, frame, test);
    } else {
        train_curve = linear_curve(m, frame, b.split.train());
        test_curve = linear_curve(m, frame, test);
    }
    artifacts::write_text(ctx.at(kCurves), artifacts::curves_csv(train_curve, test_curve));

    ctx.out << "eval: accuracy " << std::fixed << std::setprecision(4) << report.scalars.accuracy << ", precision "
            << report.scalars.precision << ", recall " << report.scalars.recall << ", f1 " << report.scalars.f1
            << ", roc_auc " << report.roc_auc << ", logloss " << report.logloss << "\n"
            << std::defaultfloat;
    ctx.out << "confusion: tn " << report.matrix.tn << " fp " << report.matrix.fp << " fn " << report.matrix.fn
            << " tp " << report.matrix.tp << "\n";
    return kExitOk;
}

// ---------------------------------------------------------------- report

int cmd_report(Context& ctx) {
    const auto selection = artifacts::parse_selection_csv(require(ctx, kSelection, "build"));
    const auto m = load_model(ctx);
    const auto report = parse_json(require(ctx, kReport, "eval"), kReport);
    try {
        if (report.at("build_hash").get<std::string>() != m.build_hash)
            fail(ErrorKind::Validation, "report.json does not belong to model.json; rerun `trendforge eval`");
    } catch (const json::exception& e) {
        fail(ErrorKind::Schema, std::string(kReport) + ": " + e.what());
    }

    std::optional<gbdt::FeatureImportance> importance;
    if (m.boosted) importance = gbdt::feature_importance(*m.boosted);

    // Rows follow the chi-squared ranking.
    std::vector<std::size_t> order(selection.names.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return selection.scores[a] > selection.scores[b]; });

    std::ostringstream csv;
    csv << "feature,chi2_score,selected_flag,split_count,total_gain,coefficient\n";
    for (auto i : order) {
        const auto& name = selection.names[i];
        const bool selected =
            std::find(selection.selected.begin(), selection.selected.end(), name) != selection.selected.end();
        const auto pos = std::find(m.feature_names.begin(), m.feature_names.end(), name);
        std::size_t splits = 0;
        double gain = 0.0, coef = 0.0;
        if (pos != m.feature_names.end()) {
            const auto j = static_cast<std::size_t>(pos - m.feature_names.begin());
            if (importance) {
                splits = importance->split_count[j];
                gain = importance->total_gain[j];
            } else {
                coef = m.linear->weights[j];
            }
        }
        csv << name << ',' << format_real(selection.scores[i]) << ',' << (selected ? 1 : 0) << ',' << splits << ','
            << format_real(gain) << ',' << format_real(coef) << '\n';
    }
    artifacts::write_text(ctx.at(kImportance), csv.str());

    std::ostringstream s;
    s << std::fixed << std::setprecision(4);
    s << "learner    " << learner_name(m.learner) << "\n";
    s << "test rows  " << report.value("test_rows", 0) << "\n";
    for (const char* key : {"accuracy", "precision", "recall", "f1", "roc_auc", "logloss", "rmse"})
        s << std::left << std::setw(11) << key << report.value(key, 0.0) << "\n";
    const auto& cm = report.at("confusion");
    s << "confusion  tn " << cm.value("tn", 0) << "  fp " << cm.value("fp", 0) << "  fn " << cm.value("fn", 0)
      << "  tp " << cm.value("tp", 0) << "\n";
    s << "selected  ";
    for (const auto& n : selection.selected) s << " " << n;
    s << "\n";
    artifacts::write_text(ctx.at(kSummary), s.str());
    ctx.out << s.str();
    return kExitOk;
}

int cmd_run(Context& ctx) {
    if (ctx.config.data.csv.empty() && !fs::exists(ctx.at(kCandles)))
        if (int rc = cmd_fetch(ctx)) return rc;
    for (auto* step : {cmd_build, cmd_train, cmd_eval, cmd_report})
        if (int rc = step(ctx)) return rc;
    return kExitOk;
}

std::string toml_string(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    return out + "\"";
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Trend-signal features, boosted trees and evaluation over exchange klines", "trendforge"};
    app.require_subcommand(1);

    std::string config_path, out_dir, csv, learner;
    std::optional<std::uint64_t> seed;
    std::optional<int> bb_ddof;
    std::optional<std::size_t> threads;
    std::vector<std::string> sets;
    bool use_tuned = false;

    struct Command {
        const char* name;
        const char* help;
        int (*fn)(Context&);
    };
    const Command commands[] = {
        {"fetch", "download klines into candles.csv", cmd_fetch},
        {"build", "compute features, chi-squared selection, split and scaler", cmd_build},
        {"train", "fit the configured learner and write model.json", cmd_train},
        {"tune", "grid search on the training block", cmd_tune},
        {"eval", "score the test block: report.json, roc.csv, curves.csv", cmd_eval},
        {"report", "feature importance and a text summary", cmd_report},
        {"run", "build, train, eval and report (fetching first if needed)", cmd_run},
    };
    std::vector<std::pair<CLI::App*, int (*)(Context&)>> subs;
    for (const auto& c : commands) {
        auto* sub = app.add_subcommand(c.name, c.help);
        sub->add_option("-c,--config", config_path, "TOML configuration file");
        sub->add_option("-o,--out", out_dir, "output directory (output.dir)");
        sub->add_option("--csv", csv, "cached klines CSV (data.csv)");
        sub->add_option("--learner", learner, "gbdt or logreg (model.learner)")->check(CLI::IsMember({"gbdt", "logreg"}));
        sub->add_option("--seed", seed, "random seed (model.seed)");
        sub->add_option("--bb-ddof", bb_ddof, "Bollinger deviation ddof, 0 or 1 (features.bb_ddof)");
        sub->add_option("--threads", threads, "tuning threads, 0 = all cores (tune.threads)");
        sub->add_option("--set", sets, "override any key, e.g. --set gbdt.eta=0.2");
        if (std::string(c.name) == "train" || std::string(c.name) == "run")
            sub->add_flag("--use-tuned", use_tuned, "apply tune_best.json before training");
        subs.emplace_back(sub, c.fn);
    }

    std::vector<const char*> argv{"trendforge"};
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        std::ostringstream help;
        const int rc = app.exit(e, help, help);
        if (rc == 0) {
            out << help.str();
            return kExitOk;
        }
        err << help.str();
        return kExitConfig;
    }

    std::vector<std::string> overrides = sets;
    if (!out_dir.empty()) overrides.push_back("output.dir=" + toml_string(out_dir));
    if (!csv.empty()) overrides.push_back("data.csv=" + toml_string(csv));
    if (!learner.empty()) overrides.push_back("model.learner=" + toml_string(learner));
    if (seed) overrides.push_back("model.seed=" + std::to_string(*seed));
    if (bb_ddof) overrides.push_back("features.bb_ddof=" + std::to_string(*bb_ddof));
    if (threads) overrides.push_back("tune.threads=" + std::to_string(*threads));

    try {
        Context ctx{load_config(config_path, overrides), {}, out, err, use_tuned};
        ctx.out_dir = ctx.config.out_dir;
        if (!ctx.config.data.csv.empty() && !fs::exists(ctx.config.data.csv) &&
            std::none_of(subs.begin(), subs.end(), [](auto& s) { return s.first->parsed() && s.first->get_name() == "fetch"; }))
            fail(ErrorKind::Config, "data.csv: file not found: " + ctx.config.data.csv);
        for (auto& [sub, fn] : subs)
            if (sub->parsed()) return fn(ctx);
    } catch (const Error& e) {
        err << "error [" << to_string(e.kind()) << "]: " << e.what() << "\n";
        return exit_code(e.kind());
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitTraining;
    }
    return kExitConfig;
}

}  // namespace trendforge::cli
