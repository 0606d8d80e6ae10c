#include "trendforge/config.hpp"

#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>
#include <toml.hpp>

#include "trendforge/error.hpp"
#include "trendforge/numfmt.hpp"

namespace trendforge {

namespace {

[[noreturn]] void config_error(const std::string& path, const std::string& what) {
    fail(ErrorKind::Config, path + ": " + what);
}

/// Reads typed fields out of one TOML table and rejects keys nobody asked for.
class Section {
public:
    Section(const toml::table* table, std::string path) : table_(table), path_(std::move(path)) {}

    ~Section() = default;

    void finish() const {
        if (!table_) return;
        for (const auto& [key, _] : *table_)
            if (!seen_.count(std::string(key.str()))) config_error(field(std::string(key.str())), "unknown key");
    }

    const toml::node* get(const std::string& key) {
        seen_.insert(key);
        return table_ ? table_->get(key) : nullptr;
    }

    std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    void read(const std::string& key, std::string& out) {
        if (auto* n = get(key)) {
            if (!n->is_string()) config_error(field(key), "expected a string");
            out = *n->value<std::string>();
        }
    }

    void read(const std::string& key, bool& out) {
        if (auto* n = get(key)) {
            if (!n->is_boolean()) config_error(field(key), "expected a boolean");
            out = *n->value<bool>();
        }
    }

    void read(const std::string& key, double& out) {
        if (auto* n = get(key)) {
            if (!n->is_number()) config_error(field(key), "expected a number");
            out = *n->value<double>();
        }
    }

    void read(const std::string& key, std::int64_t& out) {
        if (auto* n = get(key)) {
            if (!n->is_integer()) config_error(field(key), "expected an integer");
            out = *n->value<std::int64_t>();
        }
    }

    void read_count(const std::string& key, std::size_t& out, std::size_t minimum = 0) {
        std::int64_t v = static_cast<std::int64_t>(out);
        read(key, v);
        if (v < static_cast<std::int64_t>(minimum))
            config_error(field(key), "must be >= " + std::to_string(minimum));
        out = static_cast<std::size_t>(v);
    }

    void read_u64(const std::string& key, std::uint64_t& out) {
        std::int64_t v = static_cast<std::int64_t>(out);
        read(key, v);
        if (v < 0) config_error(field(key), "must be non-negative");
        out = static_cast<std::uint64_t>(v);
    }

    void read_periods(const std::string& key, std::vector<std::size_t>& out) {
        auto* n = get(key);
        if (!n) return;
        const auto* arr = n->as_array();
        if (!arr) config_error(field(key), "expected an array of periods");
        out.clear();
        for (std::size_t i = 0; i < arr->size(); ++i) {
            auto v = arr->get(i)->value<std::int64_t>();
            if (!arr->get(i)->is_integer() || !v || *v < 1)
                config_error(field(key) + "[" + std::to_string(i) + "]", "expected a positive integer");
            out.push_back(static_cast<std::size_t>(*v));
        }
    }

    Section sub(const std::string& key) {
        auto* n = get(key);
        if (n && !n->is_table()) config_error(field(key), "expected a table");
        return Section(n ? n->as_table() : nullptr, field(key));
    }

    const toml::table* table() const { return table_; }

private:
    const toml::table* table_;
    std::string path_;
    std::set<std::string> seen_;
};

std::optional<tuning::GridSpec> read_grid(Section section, const std::vector<std::string>& order) {
    const auto* t = section.table();
    if (!t || t->empty()) return std::nullopt;
    tuning::GridSpec grid;
    for (const auto& name : order) {
        auto* n = section.get(name);
        if (!n) continue;
        const auto* arr = n->as_array();
        if (!arr || arr->empty()) config_error(section.field(name), "expected a non-empty array");
        tuning::GridAxis axis{name, {}};
        for (std::size_t i = 0; i < arr->size(); ++i) {
            const auto* v = arr->get(i);
            if (v->is_number()) axis.values.emplace_back(*v->value<double>());
            else if (v->is_string()) axis.values.emplace_back(*v->value<std::string>());
            else config_error(section.field(name) + "[" + std::to_string(i) + "]", "expected a number or string");
        }
        grid.axes.push_back(std::move(axis));
    }
    section.finish();
    return grid;
}

void insert_override(toml::table& root, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) config_error(assignment, "override must look like section.key=value");
    const std::string key = assignment.substr(0, eq);
    const std::string raw = assignment.substr(eq + 1);

    toml::table parsed;
    try {
        parsed = toml::parse("v = " + raw);
    } catch (const toml::parse_error&) {
        parsed = toml::table{{"v", raw}};  // bare word: treat as a string
    }
    std::vector<std::string> parts;
    std::stringstream ss(key);
    for (std::string part; std::getline(ss, part, '.');) parts.push_back(part);
    toml::table* cursor = &root;
    for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
        auto* next = cursor->get(parts[i]);
        if (!next) {
            cursor->insert(parts[i], toml::table{});
            next = cursor->get(parts[i]);
        }
        if (!next->is_table()) config_error(key, "path crosses a non-table value");
        cursor = next->as_table();
    }
    cursor->insert_or_assign(parts.back(), *parsed.get("v"));
}

RunConfig decode(const toml::table& root) {
    RunConfig c;
    Section top(&root, "");

    {
        auto s = top.sub("data");
        s.read("csv", c.data.csv);
        s.read("symbol", c.data.symbol);
        s.read("interval", c.data.interval);
        s.read("start", c.data.start);
        s.read("end", c.data.end);
        s.finish();
        try {
            interval_from_string(c.data.interval);
        } catch (const Error& e) {
            config_error("data.interval", e.what());
        }
        if (c.data.start > c.data.end) config_error("data.start", "must not exceed data.end");
    }
    {
        auto s = top.sub("features");
        auto& f = c.features;
        s.read("include_close", f.include_close);
        s.read("include_volume", f.include_volume);
        s.read_periods("rsi", f.rsi);
        s.read_periods("mom", f.mom);
        s.read("include_macd", f.include_macd);
        s.read_periods("proc", f.proc);
        s.read_periods("ema", f.ema);
        s.read_periods("stoch", f.stoch);
        s.read_periods("bb", f.bb);
        std::int64_t ddof = f.bb_ddof;
        s.read("bb_ddof", ddof);
        if (ddof != 0 && ddof != 1) config_error("features.bb_ddof", "must be 0 or 1");
        f.bb_ddof = static_cast<int>(ddof);
        s.read_periods("atr", f.atr);
        s.read_periods("cci", f.cci);
        s.read_periods("williams_r", f.williams_r);
        s.read_periods("cmf", f.cmf);
        s.read("include_obv", f.include_obv);
        s.read("include_adl", f.include_adl);
        s.finish();
        for (auto p : f.bb)
            if (p < 2) config_error("features.bb", "Bollinger period must be >= 2");
    }
    {
        auto s = top.sub("labels");
        s.read_count("short", c.features.label_short, 1);
        s.read_count("long", c.features.label_long, 2);
        s.finish();
        if (c.features.label_short >= c.features.label_long) config_error("labels.short", "must be below labels.long");
    }
    {
        auto s = top.sub("split");
        s.read("p", c.split_p);
        s.finish();
        if (!(c.split_p > 0.0 && c.split_p < 1.0)) config_error("split.p", "must lie in (0, 1)");
    }
    {
        auto s = top.sub("selection");
        s.read_count("k", c.select_k, 1);
        s.finish();
    }
    {
        auto s = top.sub("model");
        std::string learner = c.learner == tuning::Learner::Gbdt ? "gbdt" : "logreg";
        s.read("learner", learner);
        if (learner == "gbdt") c.learner = tuning::Learner::Gbdt;
        else if (learner == "logreg") c.learner = tuning::Learner::Logreg;
        else config_error("model.learner", "must be \"gbdt\" or \"logreg\"");
        s.read_u64("seed", c.seed);
        s.finish();
    }
    {
        auto s = top.sub("gbdt");
        auto& g = c.gbdt;
        s.read_count("n_estimators", g.n_estimators, 1);
        s.read("eta", g.eta);
        s.read_count("max_depth", g.max_depth, 1);
        s.read("min_child_weight", g.min_child_weight);
        s.read("subsample", g.subsample);
        s.read("colsample", g.colsample);
        s.read("gamma", g.gamma);
        s.read("alpha", g.alpha);
        s.read("lambda", g.lambda);
        s.finish();
        g.seed = c.seed;
        try {
            g.validate();
        } catch (const Error& e) {
            config_error("gbdt", e.what());
        }
    }
    {
        auto s = top.sub("logreg");
        auto& l = c.logreg;
        std::string penalty = logreg::to_string(l.penalty);
        s.read("penalty", penalty);
        try {
            l.penalty = logreg::penalty_from_string(penalty);
        } catch (const Error& e) {
            config_error("logreg.penalty", e.what());
        }
        s.read("C", l.C);
        s.read_count("max_iter", l.max_iter, 1);
        s.read("l1_ratio", l.l1_ratio);
        s.read("tol", l.tol);
        s.read("solver", l.solver);
        std::string which = c.logreg_all_features ? "all" : "selected";
        s.read("features", which);
        if (which != "all" && which != "selected") config_error("logreg.features", "must be \"selected\" or \"all\"");
        c.logreg_all_features = which == "all";
        s.finish();
        try {
            l.validate();
        } catch (const Error& e) {
            config_error("logreg", e.what());
        }
    }
    {
        auto s = top.sub("tune");
        s.read_count("threads", c.tune.threads);
        c.tune.gbdt_grid = read_grid(s.sub("gbdt"), tuning::reference_gbdt_grid().names());
        auto logreg_order = tuning::reference_logreg_grid().names();
        logreg_order.push_back("l1_ratio");
        c.tune.logreg_grid = read_grid(s.sub("logreg"), logreg_order);
        s.finish();
    }
    {
        auto s = top.sub("output");
        s.read("dir", c.out_dir);
        s.finish();
    }
    top.finish();
    return c;
}

}  // namespace

RunConfig parse_config(const std::string& toml_text, const std::vector<std::string>& overrides) {
    toml::table root;
    try {
        root = toml::parse(toml_text);
    } catch (const toml::parse_error& e) {
        std::ostringstream msg;
        msg << "line " << e.source().begin.line << ": " << e.description();
        fail(ErrorKind::Config, "config is not valid TOML (" + msg.str() + ")");
    }
    for (const auto& o : overrides) insert_override(root, o);
    return decode(root);
}

RunConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides) {
    std::string text;
    if (!path.empty()) {
        std::ifstream in(path);
        if (!in) fail(ErrorKind::Config, "cannot read config file " + path.string());
        std::ostringstream ss;
        ss << in.rdbuf();
        text = ss.str();
    }
    return parse_config(text, overrides);
}

namespace {

nlohmann::json grid_json(const std::optional<tuning::GridSpec>& grid) {
    if (!grid) return "reference";
    nlohmann::json out = nlohmann::json::array();
    for (const auto& a : grid->axes) {
        nlohmann::json values = nlohmann::json::array();
        for (const auto& v : a.values) values.push_back(tuning::to_string(v));
        out.push_back({{"name", a.name}, {"values", values}});
    }
    return out;
}

nlohmann::json build_section(const RunConfig& c) {
    const auto& f = c.features;
    return {{"data", {{"csv", c.data.csv}, {"symbol", c.data.symbol}, {"interval", c.data.interval},
                      {"start", c.data.start}, {"end", c.data.end}}},
            {"features", {{"include_close", f.include_close}, {"include_volume", f.include_volume},
                          {"rsi", f.rsi}, {"mom", f.mom}, {"include_macd", f.include_macd},
                          {"proc", f.proc}, {"ema", f.ema}, {"stoch", f.stoch}, {"bb", f.bb},
                          {"bb_ddof", f.bb_ddof}, {"atr", f.atr}, {"cci", f.cci},
                          {"williams_r", f.williams_r}, {"cmf", f.cmf}, {"include_obv", f.include_obv},
                          {"include_adl", f.include_adl}}},
            {"labels", {{"short", f.label_short}, {"long", f.label_long}}},
            {"split", {{"p", format_real(c.split_p)}}},
            {"selection", {{"k", c.select_k}}}};
}

}  // namespace

std::string build_section_json(const RunConfig& c) { return build_section(c).dump(); }

std::string canonical_json(const RunConfig& c) {
    auto doc = build_section(c);
    const auto& g = c.gbdt;
    const auto& l = c.logreg;
    doc["model"] = {{"learner", c.learner == tuning::Learner::Gbdt ? "gbdt" : "logreg"}, {"seed", c.seed}};
    doc["gbdt"] = {{"n_estimators", g.n_estimators}, {"eta", format_real(g.eta)}, {"max_depth", g.max_depth},
                   {"min_child_weight", format_real(g.min_child_weight)}, {"subsample", format_real(g.subsample)},
                   {"colsample", format_real(g.colsample)}, {"gamma", format_real(g.gamma)},
                   {"alpha", format_real(g.alpha)}, {"lambda", format_real(g.lambda)}};
    doc["logreg"] = {{"penalty", logreg::to_string(l.penalty)}, {"C", format_real(l.C)}, {"max_iter", l.max_iter},
                     {"l1_ratio", format_real(l.l1_ratio)}, {"tol", format_real(l.tol)}, {"solver", l.solver},
                     {"features", c.logreg_all_features ? "all" : "selected"}};
    doc["tune"] = {{"gbdt", grid_json(c.tune.gbdt_grid)}, {"logreg", grid_json(c.tune.logreg_grid)}};
    return doc.dump();
}

std::string config_hash(const RunConfig& config) { return fnv1a_hex(canonical_json(config)); }

}  // namespace trendforge
