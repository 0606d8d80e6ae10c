#include <json.hpp>

#include "trendforge/error.hpp"
#include "trendforge/gbdt.hpp"
#include "trendforge/numfmt.hpp"

namespace trendforge::gbdt {

using nlohmann::json;

namespace {

json real(double v) { return format_real(v); }

double read_real(const json& doc, const char* key) {
    if (!doc.contains(key)) fail(ErrorKind::Schema, std::string("model document lacks '") + key + "'");
    const auto& v = doc.at(key);
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) {
        if (auto r = parse_real(v.get_ref<const std::string&>())) return *r;
    }
    fail(ErrorKind::Schema, std::string("model field '") + key + "' is not a real");
}

json node_to_json(const RegressionTree& tree, std::size_t i) {
    const auto& n = tree.nodes[i];
    json out;
    out["cover"] = real(n.hess_sum);
    if (n.is_leaf()) {
        out["leaf"] = real(n.weight);
        return out;
    }
    out["split_feature"] = n.feature;
    out["threshold"] = real(n.threshold);
    out["gain"] = real(n.gain);
    out["left"] = node_to_json(tree, static_cast<std::size_t>(n.left));
    out["right"] = node_to_json(tree, static_cast<std::size_t>(n.right));
    return out;
}

std::int32_t node_from_json(const json& doc, RegressionTree& tree, std::size_t n_features, std::size_t depth) {
    if (!doc.is_object()) fail(ErrorKind::Schema, "tree node is not an object");
    if (depth > 64) fail(ErrorKind::Schema, "tree is implausibly deep");
    const auto index = static_cast<std::int32_t>(tree.nodes.size());
    tree.nodes.push_back({});
    TreeNode node;
    node.hess_sum = doc.contains("cover") ? read_real(doc, "cover") : 0.0;
    if (doc.contains("leaf")) {
        node.weight = read_real(doc, "leaf");
    } else {
        if (!doc.contains("split_feature") || !doc.at("split_feature").is_number_integer() ||
            !doc.contains("left") || !doc.contains("right"))
            fail(ErrorKind::Schema, "internal node needs split_feature, threshold, left and right");
        const auto feature = doc.at("split_feature").get<std::int64_t>();
        if (feature < 0 || static_cast<std::size_t>(feature) >= n_features)
            fail(ErrorKind::Schema, "split_feature " + std::to_string(feature) + " out of range");
        node.feature = static_cast<std::int32_t>(feature);
        node.threshold = read_real(doc, "threshold");
        node.gain = doc.contains("gain") ? read_real(doc, "gain") : 0.0;
        node.left = node_from_json(doc.at("left"), tree, n_features, depth + 1);
        node.right = node_from_json(doc.at("right"), tree, n_features, depth + 1);
    }
    tree.nodes[static_cast<std::size_t>(index)] = node;
    return index;
}

}  // namespace

std::string serialize(const BoostedModel& model) {
    json doc;
    doc["schema"] = kSchema;
    doc["eta"] = real(model.eta);
    doc["base_margin"] = real(model.base_margin);
    doc["feature_names"] = model.feature_names;
    const auto& p = model.params;
    doc["params"] = {{"n_estimators", p.n_estimators}, {"eta", real(p.eta)},
                     {"max_depth", p.max_depth},       {"min_child_weight", real(p.min_child_weight)},
                     {"subsample", real(p.subsample)}, {"colsample", real(p.colsample)},
                     {"gamma", real(p.gamma)},         {"alpha", real(p.alpha)},
                     {"lambda", real(p.lambda)},       {"seed", p.seed}};
    doc["metadata"] = model.metadata;
    json trees = json::array();
    for (const auto& t : model.trees) trees.push_back(node_to_json(t, 0));
    doc["trees"] = std::move(trees);
    return doc.dump(1) + "\n";
}

BoostedModel deserialize(std::string_view document) {
    auto doc = json::parse(document, nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) fail(ErrorKind::Schema, "model document is not a JSON object");
    if (!doc.contains("schema") || !doc.at("schema").is_string())
        fail(ErrorKind::Schema, "model document has no schema tag");
    if (doc.at("schema").get<std::string>() != kSchema)
        fail(ErrorKind::Schema, "unsupported model schema '" + doc.at("schema").get<std::string>() + "', expected '" +
                                    std::string(kSchema) + "'");
    BoostedModel model;
    model.eta = read_real(doc, "eta");
    model.base_margin = doc.contains("base_margin") ? read_real(doc, "base_margin") : 0.0;
    if (!doc.contains("feature_names") || !doc.at("feature_names").is_array())
        fail(ErrorKind::Schema, "model document lacks feature_names");
    model.feature_names = doc.at("feature_names").get<std::vector<std::string>>();
    if (!doc.contains("trees") || !doc.at("trees").is_array()) fail(ErrorKind::Schema, "model document lacks trees");
    for (const auto& t : doc.at("trees")) {
        RegressionTree tree;
        node_from_json(t, tree, model.feature_names.size(), 0);
        model.trees.push_back(std::move(tree));
    }
    if (doc.contains("params")) {
        const auto& p = doc.at("params");
        auto& hp = model.params;
        hp.n_estimators = p.value("n_estimators", model.trees.size());
        hp.eta = read_real(p, "eta");
        hp.max_depth = p.value("max_depth", hp.max_depth);
        hp.min_child_weight = read_real(p, "min_child_weight");
        hp.subsample = read_real(p, "subsample");
        hp.colsample = read_real(p, "colsample");
        hp.gamma = read_real(p, "gamma");
        hp.alpha = read_real(p, "alpha");
        hp.lambda = read_real(p, "lambda");
        hp.seed = p.value("seed", hp.seed);
    } else {
        model.params.n_estimators = model.trees.size();
        model.params.eta = model.eta;
    }
    if (doc.contains("metadata")) model.metadata = doc.at("metadata").get<std::map<std::string, std::string>>();
    return model;
}

}  // namespace trendforge::gbdt
