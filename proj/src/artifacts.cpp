#include "trendforge/artifacts.hpp"

#include <algorithm>
#include <fstream>
#include <json.hpp>
#include <numeric>
#include <sstream>

#include "trendforge/error.hpp"
#include "trendforge/numfmt.hpp"

namespace trendforge::artifacts {

using nlohmann::json;

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::MissingArtifact, "cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) fail(ErrorKind::Parameter, "cannot write " + path.string());
        out << text;
    }
    fs::rename(tmp, path);
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> lines;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty()) lines.push_back(line);
    }
    return lines;
}

json parse_json(const std::string& text, const char* what) {
    auto doc = json::parse(text, nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) fail(ErrorKind::Schema, std::string(what) + " is not a JSON object");
    return doc;
}

}  // namespace

std::string features_csv(const FeatureFrame& frame) {
    std::string out = "open_time";
    for (const auto& n : frame.names()) out += "," + n;
    out += ",Signal\n";
    for (std::size_t i = 0; i < frame.rows(); ++i) {
        out += std::to_string(frame.timestamps()[i]);
        for (std::size_t j = 0; j < frame.cols(); ++j) {
            out += ',';
            out += format_real(frame.column(j)[i]);
        }
        out += frame.labels()[i] ? ",1\n" : ",-1\n";
    }
    return out;
}

FeatureFrame parse_features_csv(const std::string& text) {
    const auto lines = lines_of(text);
    if (lines.empty()) fail(ErrorKind::EmptyInput, "features file is empty");
    const auto header = split_line(lines[0]);
    if (header.size() < 3 || header.front() != "open_time" || header.back() != "Signal")
        fail(ErrorKind::Parse, "features header must be open_time,<features...>,Signal");
    const std::vector<std::string> names(header.begin() + 1, header.end() - 1);
    std::vector<EpochMs> ts;
    std::vector<std::vector<double>> cols(names.size());
    std::vector<std::uint8_t> labels;
    for (std::size_t r = 1; r < lines.size(); ++r) {
        const auto cells = split_line(lines[r]);
        if (cells.size() != header.size())
            fail(ErrorKind::Parse, "features row " + std::to_string(r + 1) + " has " + std::to_string(cells.size()) +
                                       " fields, expected " + std::to_string(header.size()));
        auto t = parse_int(cells[0]);
        if (!t) fail(ErrorKind::Parse, "features row " + std::to_string(r + 1) + ": bad open_time");
        ts.push_back(*t);
        for (std::size_t j = 0; j < names.size(); ++j) {
            auto v = parse_real(cells[j + 1]);
            if (!v) fail(ErrorKind::Parse, "features row " + std::to_string(r + 1) + ": bad value for " + names[j]);
            cols[j].push_back(*v);
        }
        const auto& s = cells.back();
        if (s == "1") labels.push_back(1);
        else if (s == "-1") labels.push_back(0);
        else fail(ErrorKind::Parse, "features row " + std::to_string(r + 1) + ": Signal must be 1 or -1");
    }
    return FeatureFrame(std::move(ts), names, std::move(cols), std::move(labels));
}

std::string selection_csv(const SelectionResult& result) {
    std::vector<std::size_t> order(result.names.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return result.scores[a] > result.scores[b]; });
    std::string out = "feature,chi2_score,selected_flag\n";
    for (auto j : order) {
        const bool chosen =
            std::find(result.selected.begin(), result.selected.end(), result.names[j]) != result.selected.end();
        out += result.names[j] + "," + format_real(result.scores[j]) + (chosen ? ",1\n" : ",0\n");
    }
    return out;
}

SelectionResult parse_selection_csv(const std::string& text) {
    const auto lines = lines_of(text);
    if (lines.empty() || lines[0] != "feature,chi2_score,selected_flag")
        fail(ErrorKind::Parse, "selection file must start with feature,chi2_score,selected_flag");
    SelectionResult result;
    for (std::size_t r = 1; r < lines.size(); ++r) {
        const auto cells = split_line(lines[r]);
        auto score = cells.size() == 3 ? parse_real(cells[1]) : std::nullopt;
        if (!score || (cells[2] != "0" && cells[2] != "1"))
            fail(ErrorKind::Parse, "selection row " + std::to_string(r + 1) + " is malformed");
        result.names.push_back(cells[0]);
        result.scores.push_back(*score);
        if (cells[2] == "1") result.selected.push_back(cells[0]);
    }
    return result;
}

std::string split_json(const SplitIndices& split, const std::string& build_hash) {
    json doc{{"m", split.m}, {"p", split.p}, {"train_end", split.train_end},
             {"test_start", split.test_start}, {"build_hash", build_hash}};
    return doc.dump(1) + "\n";
}

SplitIndices parse_split_json(const std::string& text, std::string* build_hash) {
    auto doc = parse_json(text, "split manifest");
    try {
        SplitIndices s{doc.at("m").get<std::size_t>(), doc.at("p").get<double>(),
                       doc.at("train_end").get<std::size_t>(), doc.at("test_start").get<std::size_t>()};
        if (s.train_end > s.test_start || s.test_start > s.m) fail(ErrorKind::Schema, "split manifest is inconsistent");
        if (build_hash) *build_hash = doc.value("build_hash", std::string{});
        return s;
    } catch (const json::exception& e) {
        fail(ErrorKind::Schema, std::string("malformed split manifest: ") + e.what());
    }
}

std::string scaler_json(const ScalerParams& params, const std::string& build_hash) {
    json cols = json::array();
    for (std::size_t j = 0; j < params.names.size(); ++j)
        cols.push_back({{"name", params.names[j]},
                        {"mean", format_real(params.mean[j])},
                        {"std", format_real(params.stddev[j])}});
    json doc{{"columns", cols}, {"build_hash", build_hash}};
    return doc.dump(1) + "\n";
}

ScalerParams parse_scaler_json(const std::string& text, std::string* build_hash) {
    auto doc = parse_json(text, "scaler file");
    try {
        ScalerParams p;
        for (const auto& c : doc.at("columns")) {
            auto mean = parse_real(c.at("mean").get<std::string>());
            auto sd = parse_real(c.at("std").get<std::string>());
            if (!mean || !sd) fail(ErrorKind::Schema, "scaler column holds a malformed real");
            p.names.push_back(c.at("name").get<std::string>());
            p.mean.push_back(*mean);
            p.stddev.push_back(*sd);
        }
        if (build_hash) *build_hash = doc.value("build_hash", std::string{});
        return p;
    } catch (const json::exception& e) {
        fail(ErrorKind::Schema, std::string("malformed scaler file: ") + e.what());
    }
}

std::string roc_csv(const std::vector<metrics::RocPoint>& points) {
    std::string out = "threshold,fpr,tpr\n";
    for (const auto& p : points)
        out += format_real(p.threshold) + "," + format_real(p.fpr) + "," + format_real(p.tpr) + "\n";
    return out;
}

std::string curves_csv(const std::vector<gbdt::StageMetrics>& train, const std::vector<gbdt::StageMetrics>& test) {
    std::string out = "iteration,train_logloss,test_logloss,train_error,test_error\n";
    const auto n = std::min(train.size(), test.size());
    for (std::size_t t = 0; t < n; ++t)
        out += std::to_string(t + 1) + "," + format_real(train[t].logloss) + "," + format_real(test[t].logloss) + "," +
               format_real(train[t].error) + "," + format_real(test[t].error) + "\n";
    return out;
}

}  // namespace trendforge::artifacts
