#include <doctest.h>

#include <random>

#include "support/oracles.hpp"
#include "trendforge/error.hpp"
#include "trendforge/metrics.hpp"

using namespace trendforge;
using namespace trendforge::metrics;

namespace {

double dp4(double v) { return std::round(v * 1e4) / 1e4; }

}  // namespace

TEST_CASE("confusion counts") {
    const std::vector<std::uint8_t> y{1, 0, 1, 1, 0, 0}, p{1, 1, 0, 1, 0, 0};
    const auto cm = confusion(y, p);
    CHECK(cm.tp == 2);
    CHECK(cm.fn == 1);
    CHECK(cm.fp == 1);
    CHECK(cm.tn == 2);
    CHECK(cm.total() == 6);
    const std::vector<std::uint8_t> shorter{1};
    CHECK_THROWS_AS(confusion(y, shorter), Error);
}

TEST_CASE("reference confusion matrix reproduces the headline metrics") {
    const ConfusionMatrix cm{3408, 366, 162, 3015};
    const auto s = scalar_metrics(cm);
    CHECK(dp4(s.accuracy) == 0.9240);
    CHECK(dp4(s.precision) == 0.8917);
    CHECK(dp4(s.recall) == 0.9490);
    CHECK(dp4(s.f1) == 0.9195);
    CHECK(s.accuracy == 6423.0 / 6951.0);
    CHECK_FALSE(s.precision_degenerate);
}

TEST_CASE("degenerate denominators report zero with a flag") {
    const auto none_predicted = scalar_metrics(ConfusionMatrix{5, 0, 3, 0});
    CHECK(none_predicted.precision == 0.0);
    CHECK(none_predicted.precision_degenerate);
    CHECK(none_predicted.recall == 0.0);
    CHECK_FALSE(none_predicted.recall_degenerate);
    CHECK(none_predicted.f1_degenerate);

    const auto no_positives = scalar_metrics(ConfusionMatrix{4, 2, 0, 0});
    CHECK(no_positives.recall_degenerate);
    CHECK(no_positives.accuracy == 4.0 / 6.0);
}

TEST_CASE("AUC limit cases") {
    const std::vector<std::uint8_t> y{0, 1, 0, 1, 1, 0};
    const std::vector<double> flat(6, 0.3);
    CHECK(roc_auc(y, flat).auc == 0.5);
    CHECK(auc_rank_statistic(y, flat) == 0.5);
    const std::vector<double> perfect{0.1, 0.9, 0.2, 0.8, 0.7, 0.3};
    CHECK(roc_auc(y, perfect).auc == 1.0);
    std::vector<double> reversed = perfect;
    for (auto& v : reversed) v = 1.0 - v;
    CHECK(roc_auc(y, reversed).auc == 0.0);
    const std::vector<std::uint8_t> one_class(6, 1);
    CHECK_THROWS_AS(roc_auc(one_class, perfect), Error);
}

TEST_CASE("trapezoid, rank statistic and pairwise counting agree") {
    std::mt19937_64 gen(1);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 20 + gen() % 300;
        std::vector<std::uint8_t> y(n);
        std::vector<double> s(n);
        const bool coarse = trial % 2 == 0;  // many ties
        for (std::size_t i = 0; i < n; ++i) {
            y[i] = gen() % 2;
            s[i] = coarse ? static_cast<double>(gen() % 7) / 6.0 : std::ldexp(static_cast<double>(gen() >> 11), -53);
        }
        y[0] = 0;
        y[1] = 1;
        const double trap = roc_auc(y, s).auc;
        CHECK(std::abs(trap - auc_rank_statistic(y, s)) <= 1e-12);
        CHECK(std::abs(trap - oracle::pairwise_auc(y, s)) <= 1e-12);

        // Any strictly increasing map leaves the AUC unchanged.
        std::vector<double> t(n);
        for (std::size_t i = 0; i < n; ++i) t[i] = std::exp(3.0 * s[i]) - 7.0;
        CHECK(std::abs(roc_auc(y, t).auc - trap) <= 1e-12);
    }
}

TEST_CASE("ROC curve shape") {
    const std::vector<std::uint8_t> y{0, 0, 1, 1, 0, 1};
    const std::vector<double> s{0.1, 0.4, 0.35, 0.8, 0.4, 0.9};
    const auto r = roc_auc(y, s);
    REQUIRE(r.points.size() == 6);  // anchor plus five distinct scores
    CHECK(r.points.front().fpr == 0.0);
    CHECK(r.points.front().tpr == 0.0);
    CHECK(std::isinf(r.points.front().threshold));
    CHECK(r.points.back().fpr == 1.0);
    CHECK(r.points.back().tpr == 1.0);
    for (std::size_t i = 1; i < r.points.size(); ++i) {
        CHECK(r.points[i].fpr >= r.points[i - 1].fpr);
        CHECK(r.points[i].tpr >= r.points[i - 1].tpr);
        CHECK(r.points[i].threshold < r.points[i - 1].threshold);
    }
}

TEST_CASE("log loss") {
    const std::vector<std::uint8_t> y{0, 1, 1, 0};
    const std::vector<double> half(4, 0.5);
    CHECK(logloss(y, half) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
    const std::vector<double> sure{0.0, 1.0, 1.0, 0.0};
    CHECK(logloss(y, sure) <= -std::log(1.0 - 1e-15) + 1e-18);
    const std::vector<double> wrong{1.0, 0.0, 0.0, 1.0};
    CHECK(logloss(y, wrong) == doctest::Approx(-std::log(1e-15)));

    std::mt19937_64 gen(2);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<std::uint8_t> yy(100);
        std::vector<double> p(100);
        for (std::size_t i = 0; i < 100; ++i) {
            yy[i] = gen() % 2;
            p[i] = std::ldexp(static_cast<double>(gen() >> 11), -53);
        }
        CHECK(std::abs(logloss(yy, p) - oracle::naive_logloss(yy, p)) <= 1e-12);
    }
    CHECK_THROWS_AS(logloss(y, std::vector<double>{0.5}), Error);
}

TEST_CASE("threshold labels and rmse") {
    const std::vector<double> p{0.2, 0.5, 0.7};
    CHECK(threshold_labels(p) == std::vector<std::uint8_t>{0, 1, 1});
    CHECK(threshold_labels(p, 0.6) == std::vector<std::uint8_t>{0, 0, 1});
    const std::vector<std::uint8_t> y{0, 1, 0};
    CHECK(rmse(y, p) == doctest::Approx(std::sqrt((0.04 + 0.25 + 0.49) / 3.0)).epsilon(1e-15));
}

TEST_CASE("evaluate bundles every metric") {
    const std::vector<std::uint8_t> y{0, 1, 1, 0, 1};
    const std::vector<double> p{0.1, 0.8, 0.4, 0.3, 0.9};
    const auto r = evaluate(y, p);
    CHECK(r.matrix == ConfusionMatrix{2, 0, 1, 2});
    CHECK(r.scalars.accuracy == 0.8);
    CHECK(r.roc_auc == 1.0);
    CHECK(r.logloss == doctest::Approx(oracle::naive_logloss(y, p)));
    CHECK(r.roc_points.size() == 6);
}
