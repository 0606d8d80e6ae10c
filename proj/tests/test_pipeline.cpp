#include <doctest.h>

#include <random>
#include <set>

#include "support/oracles.hpp"
#include "support/synthetic.hpp"
#include "trendforge/artifacts.hpp"
#include "trendforge/error.hpp"
#include "trendforge/pipeline.hpp"

using namespace trendforge;
namespace ts = trendforge::testing;

namespace {

ErrorKind kind_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.kind();
    }
    return ErrorKind::Config;  // sentinel: nothing thrown
}

std::string message_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.what();
    }
    return {};
}

/// Random table with n_cols columns and balanced-ish labels.
FeatureFrame random_frame(std::size_t rows, std::size_t n_cols, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> z(0.0, 1.0);
    std::vector<std::vector<double>> cols(n_cols, std::vector<double>(rows));
    std::vector<std::uint8_t> y(rows);
    std::vector<EpochMs> t(rows);
    std::vector<std::string> names;
    for (std::size_t i = 0; i < rows; ++i) {
        y[i] = gen() % 2;
        t[i] = static_cast<EpochMs>(i);
    }
    for (std::size_t j = 0; j < n_cols; ++j) {
        names.push_back("f" + std::to_string(j));
        const double shift = 0.3 * static_cast<double>(j);
        for (std::size_t i = 0; i < rows; ++i) cols[j][i] = 5.0 * j + z(gen) + (y[i] ? shift : 0.0);
    }
    return FeatureFrame(t, names, cols, y);
}

}  // namespace

TEST_CASE("default feature set and column names") {
    const auto frame = build_frame(ts::random_series(600, 1));
    const std::vector<std::string> expected{"Close", "Volume", "RSI14", "RSI30", "RSI200", "MOM10", "MOM30",
                                            "MACD",  "PROC9",  "EMA10", "EMA30", "EMA200", "%K10",  "%K30",
                                            "%K200", "%D10",   "%D30",  "%D200", "MA20",   "BB_up20", "BB_dn20",
                                            "ATR14", "CCI20",  "%R14",  "CMF20", "OBV",    "ADL"};
    CHECK(std::vector<std::string>(frame.names().begin(), frame.names().end()) == expected);
}

TEST_CASE("warm-up arithmetic") {
    FrameBuildInfo info;
    const auto frame = build_frame(CandleSeries(ts::constant_bars(300), ts::k15m), {}, &info);
    // The longest lookback is %D200: %K200 needs 199 bars of history, the 3-bar mean two more.
    CHECK(info.warmup_rows == 201);
    CHECK(info.binding_column == "%D200");
    CHECK(frame.rows() == 300 - 201);
    for (auto v : frame.column("MACD")) CHECK(v == 0.0);
    CHECK(frame.timestamps()[0] == ts::kFeb2021 + 201 * ts::k15m);

    const auto series = ts::random_series(35040, 2);
    CHECK(build_frame(series).rows() == 35040 - 201);
}

TEST_CASE("too few bars names the binding lookback and RSI200") {
    const CandleSeries bars(ts::constant_bars(100), ts::k15m);
    CHECK(kind_of([&] { build_frame(bars); }) == ErrorKind::InsufficientData);
    const auto msg = message_of([&] { build_frame(bars); });
    CHECK(msg.find("%D200") != std::string::npos);
    CHECK(msg.find("RSI200") != std::string::npos);
}

TEST_CASE("no undefined cell survives and labels align with the bar") {
    const auto series = ts::random_series(800, 3);
    const auto frame = build_frame(series);
    for (std::size_t j = 0; j < frame.cols(); ++j)
        for (auto v : frame.column(j)) CHECK(std::isfinite(v));
    const auto closes = series.closes();
    const auto s = oracle::sma(closes, 10), l = oracle::sma(closes, 60);
    for (std::size_t r = 0; r < frame.rows(); ++r) {
        const auto i = static_cast<std::size_t>((frame.timestamps()[r] - ts::kFeb2021) / ts::k15m);
        CHECK(frame.column("Close")[r] == closes[i]);
        CHECK(frame.labels()[r] == (s[i] >= l[i] ? 1 : 0));
    }
}

TEST_CASE("feature spec periods are configurable") {
    FeatureSpec spec;
    spec.rsi = {7};
    spec.stoch = {5};
    spec.ema = {};
    spec.include_obv = false;
    FrameBuildInfo info;
    const auto frame = build_frame(ts::random_series(300, 4), spec, &info);
    CHECK(frame.index_of("RSI7"));
    CHECK_FALSE(frame.index_of("RSI14"));
    CHECK_FALSE(frame.index_of("OBV"));
    CHECK(info.warmup_rows == 59);  // label warm-up now binds
    CHECK(info.binding_column == "Signal");
}

TEST_CASE("time split arithmetic") {
    const auto s = time_split(10, 0.2);
    CHECK(s.test_start == 8);
    CHECK(s.train_end == 8);
    CHECK(s.train().begin == 0);
    CHECK(s.test().end == 10);
    CHECK(time_split(34840, 0.2).m - time_split(34840, 0.2).test_start == 6968);
    CHECK(time_split(34839, 0.2).m - time_split(34839, 0.2).test_start == 6968);

    std::mt19937_64 gen(5);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t m = 2 + gen() % 100000;
        const double p = 0.01 + 0.98 * static_cast<double>(gen() % 10000) / 10000.0;
        const auto expected = static_cast<std::size_t>(std::floor((1.0 - p) * static_cast<double>(m)));
        if (expected == 0 || expected >= m) {
            CHECK(kind_of([&] { time_split(m, p); }) == ErrorKind::Parameter);
            continue;
        }
        const auto sp = time_split(m, p);
        CHECK(sp.test_start == expected);
        CHECK(sp.train_end == sp.test_start);
        CHECK(sp.train().size() + sp.test().size() == m);
        CHECK(time_split(m, p) == sp);
    }
    CHECK(kind_of([] { time_split(10, 0.0); }) == ErrorKind::Parameter);
    CHECK(kind_of([] { time_split(10, 1.0); }) == ErrorKind::Parameter);
    CHECK(kind_of([] { time_split(3, 0.9); }) == ErrorKind::Parameter);
    CHECK(kind_of([] { time_split(1, 0.5); }) == ErrorKind::InsufficientData);
}

TEST_CASE("scaler fits training rows only") {
    const FeatureFrame tiny({0, 1, 2}, {"x"}, {{1.0, 3.0, 100.0}}, {0, 1, 0});
    const auto p = fit_scaler(tiny, RowRange{0, 2});
    CHECK(p.mean[0] == 2.0);
    CHECK(p.stddev[0] == 1.0);
    const auto z = transform(tiny, p);
    CHECK(z.column(0)[0] == -1.0);
    CHECK(z.column(0)[1] == 1.0);

    const auto frame = random_frame(500, 6, 6);
    const auto split = time_split(frame, 0.2);
    const auto params = fit_scaler(frame, split);
    const auto scaled = transform(frame, params);
    for (std::size_t j = 0; j < frame.cols(); ++j) {
        double mean = 0.0, ss = 0.0, test_mean = 0.0;
        const auto c = scaled.column(j);
        for (std::size_t i = 0; i < split.train_end; ++i) mean += c[i];
        mean /= static_cast<double>(split.train_end);
        for (std::size_t i = 0; i < split.train_end; ++i) ss += (c[i] - mean) * (c[i] - mean);
        CHECK(std::abs(mean) <= 1e-9);
        CHECK(std::abs(std::sqrt(ss / static_cast<double>(split.train_end)) - 1.0) <= 1e-9);
        for (std::size_t i = split.test_start; i < frame.rows(); ++i) test_mean += c[i];
        CHECK(test_mean != 0.0);
        // Invertible.
        for (std::size_t i = 0; i < frame.rows(); ++i)
            CHECK(std::abs(params.mean[j] + params.stddev[j] * c[i] - frame.column(j)[i]) <= 1e-12 * std::max(1.0, std::abs(frame.column(j)[i])));
    }
    CHECK(scaled.labels().size() == frame.labels().size());
    CHECK(std::equal(scaled.labels().begin(), scaled.labels().end(), frame.labels().begin()));

    // x = mu maps to 0 and x = mu + sigma to 1.
    ScalerParams manual{{"x"}, {5.0}, {2.0}};
    const FeatureFrame two({0, 1}, {"x"}, {{5.0, 7.0}}, {0, 1});
    CHECK(transform(two, manual).column(0)[0] == 0.0);
    CHECK(transform(two, manual).column(0)[1] == 1.0);
}

TEST_CASE("scaler errors") {
    const FeatureFrame flat({0, 1, 2}, {"c"}, {{4.0, 4.0, 9.0}}, {0, 1, 0});
    CHECK(kind_of([&] { fit_scaler(flat, RowRange{0, 2}); }) == ErrorKind::Validation);
    CHECK(message_of([&] { fit_scaler(flat, RowRange{0, 2}); }).find("c") != std::string::npos);
    ScalerParams other{{"y"}, {0.0}, {1.0}};
    CHECK(kind_of([&] { transform(flat, other); }) == ErrorKind::Parameter);
}

TEST_CASE("leakage probe: mutating test rows changes no fitted parameter") {
    const auto frame = random_frame(400, 5, 7);
    const auto split = time_split(frame, 0.2);
    const auto scaler = fit_scaler(frame, split);
    const auto chi = chi2_scores(frame, split, 3);

    std::mt19937_64 gen(8);
    std::vector<std::vector<double>> cols;
    for (std::size_t j = 0; j < frame.cols(); ++j) {
        cols.emplace_back(frame.column(j).begin(), frame.column(j).end());
        for (std::size_t i = split.test_start; i < frame.rows(); ++i) cols[j][i] = 1e6 * static_cast<double>(gen() % 1000);
    }
    std::vector<std::uint8_t> y(frame.labels().begin(), frame.labels().end());
    for (std::size_t i = split.test_start; i < y.size(); ++i) y[i] = 1 - y[i];
    const FeatureFrame mutated({frame.timestamps().begin(), frame.timestamps().end()},
                               {frame.names().begin(), frame.names().end()}, cols, y);
    const auto scaler2 = fit_scaler(mutated, split);
    CHECK(scaler2.mean == scaler.mean);
    CHECK(scaler2.stddev == scaler.stddev);
    const auto chi2 = chi2_scores(mutated, split, 3);
    CHECK(chi2.scores == chi.scores);
    CHECK(chi2.selected == chi.selected);
}

TEST_CASE("chi-squared hand cases") {
    // Feature equal to the label, n = 4 rows per class: score n.
    const FeatureFrame exact({0, 1, 2, 3, 4, 5, 6, 7}, {"y", "flat", "even"},
                             {{1, 0, 1, 0, 1, 0, 1, 0}, {3, 3, 3, 3, 3, 3, 3, 3}, {1, 1, 0, 0, 1, 1, 0, 0}},
                             {1, 0, 1, 0, 1, 0, 1, 0});
    const auto r = chi2_scores(exact, RowRange{0, 8}, 2);
    CHECK(r.scores[0] == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(r.scores[1] == 0.0);
    CHECK(r.scores[2] == 0.0);
    CHECK(r.selected == std::vector<std::string>{"y", "flat"});  // tie at 0 goes to the lower index

    const FeatureFrame single({0, 1}, {"a"}, {{1.0, 2.0}}, {1, 1});
    CHECK(kind_of([&] { chi2_scores(single, RowRange{0, 2}, 1); }) == ErrorKind::Validation);
    CHECK(kind_of([&] { chi2_scores(exact, RowRange{0, 8}, 0); }) == ErrorKind::Parameter);
    CHECK(kind_of([&] { chi2_scores(exact, RowRange{0, 8}, 4); }) == ErrorKind::Parameter);
}

TEST_CASE("chi-squared matches a direct implementation") {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const auto frame = random_frame(60 + seed * 7, 4, 100 + seed);
        const RowRange rows{0, frame.rows()};
        const auto r = chi2_scores(frame, rows, 2);
        for (std::size_t j = 0; j < frame.cols(); ++j)
            CHECK(std::abs(r.scores[j] - oracle::chi2(frame.column(j), frame.labels())) <= 1e-9);
    }
}

TEST_CASE("chi-squared is invariant under positive affine rescaling") {
    const auto frame = random_frame(300, 3, 9);
    const RowRange rows{0, 240};
    const auto base = chi2_scores(frame, rows, 1);
    std::vector<std::vector<double>> cols;
    for (std::size_t j = 0; j < frame.cols(); ++j) {
        cols.emplace_back(frame.column(j).begin(), frame.column(j).end());
        for (auto& v : cols.back()) v = 7.5 * v - 1234.0;
    }
    const FeatureFrame scaled({frame.timestamps().begin(), frame.timestamps().end()},
                              {frame.names().begin(), frame.names().end()}, cols,
                              {frame.labels().begin(), frame.labels().end()});
    const auto r = chi2_scores(scaled, rows, 1);
    for (std::size_t j = 0; j < frame.cols(); ++j)
        CHECK(r.scores[j] == doctest::Approx(base.scores[j]).epsilon(1e-9));
}

TEST_CASE("top-k and select") {
    const std::vector<double> scores{1.0, 5.0, 5.0, 0.5, 3.0};
    CHECK(top_k(scores, 3) == std::vector<std::size_t>{1, 2, 4});
    CHECK(top_k(scores, 1) == std::vector<std::size_t>{1});

    const auto frame = random_frame(100, 5, 10);
    const auto all = chi2_scores(frame, RowRange{0, 100}, 5);
    const auto same = select(frame, all);
    std::set<std::string> a(frame.names().begin(), frame.names().end()), b(same.names().begin(), same.names().end());
    CHECK(a == b);
    const auto one = chi2_scores(frame, RowRange{0, 100}, 1);
    const auto best = select(frame, one);
    CHECK(best.cols() == 1);
    const auto idx = static_cast<std::size_t>(std::max_element(one.scores.begin(), one.scores.end()) - one.scores.begin());
    CHECK(best.names()[0] == frame.names()[idx]);
    CHECK(std::equal(best.column(0).begin(), best.column(0).end(), frame.column(idx).begin()));
    for (double s : all.scores) CHECK(s >= 0.0);
}

TEST_CASE("frame validation") {
    CHECK(kind_of([] { FeatureFrame({0, 1}, {"a", "a"}, {{1, 2}, {3, 4}}, {0, 1}); }) == ErrorKind::Validation);
    CHECK(kind_of([] { FeatureFrame({0, 1}, {"a"}, {{1}}, {0, 1}); }) == ErrorKind::Validation);
    CHECK(kind_of([] { FeatureFrame({0, 1}, {"a"}, {{1, std::nan("")}}, {0, 1}); }) == ErrorKind::Validation);
}

TEST_CASE("artifact round trips") {
    const auto frame = build_frame(ts::random_series(400, 11));
    CHECK(artifacts::parse_features_csv(artifacts::features_csv(frame)) == frame);
    const auto header = artifacts::features_csv(frame).substr(0, artifacts::features_csv(frame).find('\n'));
    CHECK(header.rfind("open_time,Close,Volume,RSI14", 0) == 0);
    CHECK(header.substr(header.size() - 7) == ",Signal");

    const auto split = time_split(frame, 0.2);
    std::string hash;
    CHECK(artifacts::parse_split_json(artifacts::split_json(split, "abc"), &hash) == split);
    CHECK(hash == "abc");
    const auto scaler = fit_scaler(frame, split);
    const auto back = artifacts::parse_scaler_json(artifacts::scaler_json(scaler, "abc"));
    CHECK(back.mean == scaler.mean);
    CHECK(back.stddev == scaler.stddev);
    CHECK(back.names == scaler.names);

    const auto sel = chi2_scores(frame, split, 8);
    const auto sel_back = artifacts::parse_selection_csv(artifacts::selection_csv(sel));
    CHECK(sel_back.selected == sel.selected);
    CHECK(std::set<std::string>(sel_back.names.begin(), sel_back.names.end()) ==
          std::set<std::string>(sel.names.begin(), sel.names.end()));
    const auto csv = artifacts::selection_csv(sel);
    CHECK(csv.rfind("feature,chi2_score,selected_flag\n", 0) == 0);
}
