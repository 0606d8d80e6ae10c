#pragma once

// Independent reference implementations for cross-checking library code.
// Everything here is deliberately naive: windows are rescanned from scratch
// and no rolling state is carried between indices.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "trendforge/market_data.hpp"

namespace trendforge::oracle {

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

/// |a - b| <= abs_tol, or within rel_tol of the larger magnitude. NaN matches NaN only.
inline bool near(double a, double b, double abs_tol = 1e-9, double rel_tol = 1e-6) {
    if (std::isnan(a) || std::isnan(b)) return std::isnan(a) && std::isnan(b);
    const double d = std::abs(a - b);
    return d <= abs_tol || d <= rel_tol * std::max(std::abs(a), std::abs(b));
}

inline double mean_of(std::span<const double> s, std::size_t lo, std::size_t hi) {  // [lo, hi]
    double sum = 0.0;
    for (std::size_t j = lo; j <= hi; ++j) sum += s[j];
    return sum / static_cast<double>(hi - lo + 1);
}

inline std::vector<double> sma(std::span<const double> s, std::size_t tau) {
    std::vector<double> out(s.size(), kNaN);
    for (std::size_t i = 0; i < s.size(); ++i)
        if (i + 1 >= tau) out[i] = mean_of(s, i + 1 - tau, i);
    return out;
}

inline std::vector<double> ema_raw(std::span<const double> s, std::size_t tau) {
    std::vector<double> out(s.size());
    const double a = 2.0 / (static_cast<double>(tau) + 1.0);
    for (std::size_t i = 0; i < s.size(); ++i) out[i] = i == 0 ? s[0] : a * s[i] + (1.0 - a) * out[i - 1];
    return out;
}

inline std::vector<double> ema(std::span<const double> s, std::size_t tau) {
    auto raw = ema_raw(s, tau);
    for (std::size_t i = 0; i + 1 < tau && i < raw.size(); ++i) raw[i] = kNaN;
    return raw;
}

/// Wilder RSI written as an explicit sequence of gains and losses.
inline std::vector<double> rsi(std::span<const double> s, std::size_t tau) {
    std::vector<double> out(s.size(), kNaN);
    if (s.size() <= tau) return out;
    std::vector<double> gains(s.size(), 0.0), losses(s.size(), 0.0);
    for (std::size_t i = 1; i < s.size(); ++i) {
        gains[i] = s[i] > s[i - 1] ? s[i] - s[i - 1] : 0.0;
        losses[i] = s[i] < s[i - 1] ? s[i - 1] - s[i] : 0.0;
    }
    const double n = static_cast<double>(tau);
    double ag = mean_of(gains, 1, tau), al = mean_of(losses, 1, tau);
    for (std::size_t i = tau; i < s.size(); ++i) {
        if (i > tau) {
            ag = ((n - 1.0) * ag + gains[i]) / n;
            al = ((n - 1.0) * al + losses[i]) / n;
        }
        if (ag == 0.0 && al == 0.0) out[i] = 50.0;
        else if (al == 0.0) out[i] = 100.0;
        else out[i] = 100.0 * ag / (ag + al);
    }
    return out;
}

inline std::vector<double> macd(std::span<const double> s) {
    auto fast = ema_raw(s, 12), slow = ema_raw(s, 26);
    std::vector<double> out(s.size(), kNaN);
    for (std::size_t i = 25; i < s.size(); ++i) out[i] = fast[i] - slow[i];
    return out;
}

inline std::vector<double> momentum(std::span<const double> s, std::size_t tau) {
    std::vector<double> out(s.size(), kNaN);
    for (std::size_t i = tau; i < s.size(); ++i) out[i] = s[i] - s[i - tau];
    return out;
}

inline std::vector<double> proc(std::span<const double> s, std::size_t tau) {
    std::vector<double> out(s.size(), kNaN);
    for (std::size_t i = tau; i < s.size(); ++i)
        if (s[i - tau] != 0.0) out[i] = (s[i] / s[i - tau] - 1.0) * 100.0;
    return out;
}

struct Extremes {
    double hh;
    double ll;
};

inline Extremes window_extremes(const CandleSeries& b, std::size_t lo, std::size_t hi) {
    Extremes e{b[lo].high, b[lo].low};
    for (std::size_t j = lo; j <= hi; ++j) {
        e.hh = std::max(e.hh, b[j].high);
        e.ll = std::min(e.ll, b[j].low);
    }
    return e;
}

inline std::vector<double> stochastic_k(const CandleSeries& b, std::size_t tau) {
    std::vector<double> out(b.size(), kNaN);
    for (std::size_t i = 0; i < b.size(); ++i) {
        if (i + 1 < tau) continue;
        const auto e = window_extremes(b, i + 1 - tau, i);
        out[i] = e.hh == e.ll ? 50.0 : 100.0 * (b[i].close - e.ll) / (e.hh - e.ll);
    }
    return out;
}

inline std::vector<double> stochastic_d(const CandleSeries& b, std::size_t tau) {
    const auto k = stochastic_k(b, tau);
    std::vector<double> out(b.size(), kNaN);
    for (std::size_t i = tau + 1; i < b.size(); ++i) out[i] = mean_of(k, i - 2, i);
    return out;
}

struct Bands {
    std::vector<double> ma, up, dn;
};

inline Bands bollinger(std::span<const double> s, std::size_t tau, int ddof = 0) {
    Bands out{std::vector<double>(s.size(), kNaN), std::vector<double>(s.size(), kNaN),
              std::vector<double>(s.size(), kNaN)};
    for (std::size_t i = tau - 1; i < s.size(); ++i) {
        const double m = mean_of(s, i + 1 - tau, i);
        double ss = 0.0;
        for (std::size_t j = i + 1 - tau; j <= i; ++j) ss += (s[j] - m) * (s[j] - m);
        const double sd = std::sqrt(ss / static_cast<double>(static_cast<int>(tau) - ddof));
        out.ma[i] = m;
        out.up[i] = m + 2.0 * sd;
        out.dn[i] = m - 2.0 * sd;
    }
    return out;
}

inline double true_range(const CandleSeries& b, std::size_t i) {
    const double pc = b[i - 1].close;
    return std::max(b[i].high - b[i].low, std::max(std::abs(b[i].high - pc), std::abs(b[i].low - pc)));
}

inline std::vector<double> atr(const CandleSeries& b, std::size_t tau) {
    std::vector<double> out(b.size(), kNaN);
    for (std::size_t i = tau; i < b.size(); ++i) {
        double sum = 0.0;
        for (std::size_t j = i + 1 - tau; j <= i; ++j) sum += true_range(b, j);
        out[i] = sum / static_cast<double>(tau);
    }
    return out;
}

inline std::vector<double> cci(const CandleSeries& b, std::size_t tau) {
    std::vector<double> out(b.size(), kNaN);
    auto tp = [&](std::size_t j) { return (b[j].high + b[j].low + b[j].close) / 3.0; };
    for (std::size_t i = tau - 1; i < b.size(); ++i) {
        double m = 0.0;
        for (std::size_t j = i + 1 - tau; j <= i; ++j) m += tp(j);
        m /= static_cast<double>(tau);
        double mad = 0.0;
        for (std::size_t j = i + 1 - tau; j <= i; ++j) mad += std::abs(tp(j) - m);
        mad /= static_cast<double>(tau);
        out[i] = mad == 0.0 ? 0.0 : (tp(i) - m) / (0.015 * mad);
    }
    return out;
}

inline std::vector<double> williams_r(const CandleSeries& b, std::size_t tau) {
    std::vector<double> out(b.size(), kNaN);
    for (std::size_t i = tau - 1; i < b.size(); ++i) {
        const auto e = window_extremes(b, i + 1 - tau, i);
        out[i] = e.hh == e.ll ? -50.0 : -100.0 * (e.hh - b[i].close) / (e.hh - e.ll);
    }
    return out;
}

inline double multiplier(const Candle& c) {
    return c.high == c.low ? 0.0 : (2.0 * c.close - c.low - c.high) / (c.high - c.low);
}

inline std::vector<double> cmf(const CandleSeries& b, std::size_t tau) {
    std::vector<double> out(b.size(), kNaN);
    for (std::size_t i = tau - 1; i < b.size(); ++i) {
        double flow = 0.0, vol = 0.0;
        for (std::size_t j = i + 1 - tau; j <= i; ++j) {
            flow += multiplier(b[j]) * b[j].volume;
            vol += b[j].volume;
        }
        out[i] = vol == 0.0 ? 0.0 : flow / vol;
    }
    return out;
}

/// OBV at i as an explicit sum of signed volumes over (0, i].
inline std::vector<double> obv(const CandleSeries& b) {
    std::vector<double> out(b.size());
    for (std::size_t i = 0; i < b.size(); ++i) {
        double sum = 0.0;
        for (std::size_t j = 1; j <= i; ++j) {
            if (b[j].close > b[j - 1].close) sum += b[j].volume;
            if (b[j].close < b[j - 1].close) sum -= b[j].volume;
        }
        out[i] = sum;
    }
    return out;
}

inline std::vector<double> adl(const CandleSeries& b) {
    std::vector<double> out(b.size());
    for (std::size_t i = 0; i < b.size(); ++i) {
        double sum = 0.0;
        for (std::size_t j = 0; j <= i; ++j) sum += multiplier(b[j]) * b[j].volume;
        out[i] = sum;
    }
    return out;
}

/// Sum of (O - E)^2 / E over both classes after min-max scaling the column.
inline double chi2(std::span<const double> column, std::span<const std::uint8_t> labels) {
    const double lo = *std::min_element(column.begin(), column.end());
    const double hi = *std::max_element(column.begin(), column.end());
    double observed[2] = {0.0, 0.0};
    double count[2] = {0.0, 0.0};
    for (std::size_t i = 0; i < column.size(); ++i) {
        const double v = hi > lo ? (column[i] - lo) / (hi - lo) : 0.0;
        observed[labels[i]] += v;
        count[labels[i]] += 1.0;
    }
    const double total = observed[0] + observed[1];
    const double n = count[0] + count[1];
    double score = 0.0;
    for (int c = 0; c < 2; ++c) {
        const double expected = total * count[c] / n;
        if (expected > 0.0) score += (observed[c] - expected) * (observed[c] - expected) / expected;
    }
    return score;
}

/// Fraction of (positive, negative) pairs ranked correctly, ties counted one half. O(n^2).
inline double pairwise_auc(std::span<const std::uint8_t> labels, std::span<const double> scores) {
    double good = 0.0, pairs = 0.0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (!labels[i]) continue;
        for (std::size_t j = 0; j < labels.size(); ++j) {
            if (labels[j]) continue;
            pairs += 1.0;
            if (scores[i] > scores[j]) good += 1.0;
            else if (scores[i] == scores[j]) good += 0.5;
        }
    }
    return good / pairs;
}

inline double naive_logloss(std::span<const std::uint8_t> y, std::span<const double> p) {
    double sum = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double q = std::min(std::max(p[i], 1e-15), 1.0 - 1e-15);
        sum += y[i] ? -std::log(q) : -std::log(1.0 - q);
    }
    return sum / static_cast<double>(y.size());
}

/// Per-leaf regularized objective G w + (H + lambda) w^2 / 2 + alpha |w|.
inline double leaf_objective(double w, double G, double H, double alpha, double lambda) {
    return G * w + 0.5 * (H + lambda) * w * w + alpha * std::abs(w);
}

/// Minimizes the convex leaf objective by bisection on its one-sided derivatives.
inline double minimize_leaf(double G, double H, double alpha, double lambda) {
    const double c = H + lambda;
    auto right = [&](double w) { return G + c * w + (w >= 0.0 ? alpha : -alpha); };
    auto left = [&](double w) { return G + c * w + (w > 0.0 ? alpha : -alpha); };
    double lo = -(std::abs(G) + alpha) / c - 1.0, hi = (std::abs(G) + alpha) / c + 1.0;
    for (int it = 0; it < 400; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (right(mid) < 0.0) lo = mid;
        else if (left(mid) > 0.0) hi = mid;
        else return mid;
    }
    return 0.5 * (lo + hi);
}

struct TreeProblem {
    std::vector<std::vector<double>> x;  // x[row][feature]
    std::vector<double> g, h;
    double lambda = 1.0, alpha = 0.0, gamma = 0.0, min_child_weight = 0.0;
};

/// Regularized objective of one leaf holding `rows`, with the optimal weight.
inline double leaf_cost(const TreeProblem& p, const std::vector<std::size_t>& rows) {
    double G = 0.0, H = 0.0;
    for (auto r : rows) {
        G += p.g[r];
        H += p.h[r];
    }
    const double w = minimize_leaf(G, H, p.alpha, p.lambda);
    return leaf_objective(w, G, H, p.alpha, p.lambda) + p.gamma;
}

/// Every (feature, midpoint threshold) partition of `rows` satisfying the child-weight bound.
inline std::vector<std::pair<std::vector<std::size_t>, std::vector<std::size_t>>> partitions(
    const TreeProblem& p, const std::vector<std::size_t>& rows) {
    std::vector<std::pair<std::vector<std::size_t>, std::vector<std::size_t>>> out;
    if (rows.empty()) return out;
    const std::size_t features = p.x[0].size();
    for (std::size_t f = 0; f < features; ++f) {
        std::vector<double> values;
        for (auto r : rows) values.push_back(p.x[r][f]);
        std::sort(values.begin(), values.end());
        values.erase(std::unique(values.begin(), values.end()), values.end());
        for (std::size_t t = 0; t + 1 < values.size(); ++t) {
            const double thr = 0.5 * (values[t] + values[t + 1]);
            std::vector<std::size_t> l, r;
            double hl = 0.0, hr = 0.0;
            for (auto i : rows) {
                if (p.x[i][f] < thr) {
                    l.push_back(i);
                    hl += p.h[i];
                } else {
                    r.push_back(i);
                    hr += p.h[i];
                }
            }
            if (hl >= p.min_child_weight && hr >= p.min_child_weight) out.emplace_back(std::move(l), std::move(r));
        }
    }
    return out;
}

/// Minimum regularized objective over all axis-aligned trees of depth <= depth.
inline double best_tree_objective(const TreeProblem& p, const std::vector<std::size_t>& rows, int depth) {
    double best = leaf_cost(p, rows);
    if (depth == 0) return best;
    for (const auto& [l, r] : partitions(p, rows))
        best = std::min(best, best_tree_objective(p, l, depth - 1) + best_tree_objective(p, r, depth - 1));
    return best;
}

/// Objective of the tree obtained by taking, at every node, the enumerated
/// partition with the largest objective reduction when that reduction is positive.
inline double greedy_tree_objective(const TreeProblem& p, const std::vector<std::size_t>& rows, int depth) {
    const double here = leaf_cost(p, rows);
    if (depth == 0) return here;
    double best_gain = 0.0;
    std::optional<std::pair<std::vector<std::size_t>, std::vector<std::size_t>>> chosen;
    for (auto& part : partitions(p, rows)) {
        const double gain = here - leaf_cost(p, part.first) - leaf_cost(p, part.second);
        if (gain > best_gain + 1e-12) {
            best_gain = gain;
            chosen = part;
        }
    }
    if (!chosen) return here;
    return greedy_tree_objective(p, chosen->first, depth - 1) + greedy_tree_objective(p, chosen->second, depth - 1);
}

}  // namespace trendforge::oracle
