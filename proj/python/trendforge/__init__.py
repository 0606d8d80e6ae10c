"""Trend-signal features, gradient boosted trees and evaluation over exchange klines."""

from ._core import (
    GBDT,
    LogisticRegression,
    TrendforgeError,
    bollinger,
    build_features,
    chi2_scores,
    ema,
    evaluate,
    ma_labels,
    macd,
    momentum,
    proc,
    read_klines,
    roc_auc,
    rsi,
    run_cli,
    sma,
    time_split,
)

__all__ = [
    "GBDT",
    "LogisticRegression",
    "TrendforgeError",
    "bollinger",
    "build_features",
    "chi2_scores",
    "ema",
    "evaluate",
    "ma_labels",
    "macd",
    "momentum",
    "proc",
    "read_klines",
    "roc_auc",
    "rsi",
    "run_cli",
    "sma",
    "time_split",
]
