#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "trendforge/gbdt.hpp"
#include "trendforge/logreg.hpp"
#include "trendforge/pipeline.hpp"
#include "trendforge/tuning.hpp"

namespace trendforge {

struct DataConfig {
    std::string csv;                   // cached klines file; empty means <out>/candles.csv
    std::string symbol = "BTCUSDT";
    std::string interval = "15m";
    EpochMs start = 1612137600000;     // 2021-02-01T00:00:00Z
    EpochMs end = 1643673600000;       // 2022-02-01T00:00:00Z
};

struct TuneConfig {
    std::optional<tuning::GridSpec> gbdt_grid;    // reference grid when unset
    std::optional<tuning::GridSpec> logreg_grid;
    std::size_t threads = 0;                      // 0: hardware concurrency
};

/// Everything a CLI run needs. Defaults reproduce the reference setup:
/// 15-minute bars, MA(10, 60) labels, p = 0.2, k = 8 and the chosen GBDT parameters.
struct RunConfig {
    DataConfig data;
    FeatureSpec features;
    double split_p = 0.2;
    std::size_t select_k = 8;
    tuning::Learner learner = tuning::Learner::Gbdt;
    std::uint64_t seed = 42;
    gbdt::HyperParams gbdt = gbdt::reference_params();
    logreg::Config logreg = logreg::reference_config();
    bool logreg_all_features = false;
    TuneConfig tune;
    std::string out_dir = "out";
};

/// Loads a TOML document (empty path: defaults only), then applies `key=value`
/// overrides with dotted keys (e.g. "gbdt.eta=0.2"). Throws Config naming the
/// offending field path.
RunConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides = {});
RunConfig parse_config(const std::string& toml_text, const std::vector<std::string>& overrides = {});

/// Canonical JSON of the resolved config and its sections.
std::string canonical_json(const RunConfig& config);
/// Hash of the data/feature/label/split/selection sections only.
std::string build_section_json(const RunConfig& config);

std::string config_hash(const RunConfig& config);

}  // namespace trendforge
