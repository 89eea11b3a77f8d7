#include <string>

#include "json.hpp"

#include "adscreen/error.hpp"
#include "adscreen/forest.hpp"

namespace adscreen {

namespace {

using json = nlohmann::json;

constexpr const char* kFormat = "adscreen-forest";
constexpr int kVersion = 1;

}  // namespace

// Layout: each node is the array
//   [feature, threshold, left_levels, left, right, impurity_decrease, weight, value, counts, tie_band]
// with feature = -1 marking a leaf.
std::string forest_to_json(const RandomForest& forest) {
  json doc;
  doc["format"] = kFormat;
  doc["version"] = kVersion;
  doc["task"] = forest.task == Task::Classification ? "classification" : "regression";
  json features = json::array();
  for (const auto& f : forest.features) {
    features.push_back({{"name", f.name}, {"categorical", f.categorical}, {"levels", f.levels}});
  }
  doc["features"] = std::move(features);
  doc["classes"] = forest.classes;
  const auto& c = forest.config;
  doc["config"] = {{"ntree", c.ntree},
                   {"mtry", c.mtry ? json(*c.mtry) : json(nullptr)},
                   {"min_node_size", c.min_node_size},
                   {"max_depth", c.max_depth ? json(*c.max_depth) : json(nullptr)},
                   {"seed", c.seed}};
  doc["mtry"] = forest.mtry;
  doc["n_train"] = forest.n_train;
  json trees = json::array();
  for (const auto& t : forest.trees) {
    json nodes = json::array();
    for (const auto& n : t.nodes()) {
      nodes.push_back(json::array({n.feature, n.threshold, n.left_levels, n.left, n.right,
                                   n.impurity_decrease, n.weight, n.value, n.counts, n.tie_band}));
    }
    trees.push_back(std::move(nodes));
  }
  doc["trees"] = std::move(trees);
  doc["in_bag"] = forest.in_bag;
  return doc.dump() + "\n";
}

RandomForest forest_from_json(const std::string& text) {
  RandomForest forest;
  try {
    const auto doc = json::parse(text);
    if (doc.at("format").get<std::string>() != kFormat) {
      throw Error(Errc::ConfigError, "not a forest model file");
    }
    if (doc.at("version").get<int>() != kVersion) {
      throw Error(Errc::ConfigError, "unsupported forest model version");
    }
    forest.task = doc.at("task").get<std::string>() == "classification" ? Task::Classification
                                                                        : Task::Regression;
    for (const auto& f : doc.at("features")) {
      forest.features.push_back({f.at("name").get<std::string>(), f.at("categorical").get<bool>(),
                                 f.at("levels").get<std::vector<std::string>>()});
    }
    forest.classes = doc.at("classes").get<std::vector<std::string>>();
    const auto& c = doc.at("config");
    forest.config.ntree = c.at("ntree").get<std::size_t>();
    if (!c.at("mtry").is_null()) forest.config.mtry = c["mtry"].get<std::size_t>();
    forest.config.min_node_size = c.at("min_node_size").get<std::size_t>();
    if (!c.at("max_depth").is_null()) forest.config.max_depth = c["max_depth"].get<std::size_t>();
    forest.config.seed = c.at("seed").get<std::uint64_t>();
    forest.mtry = doc.at("mtry").get<std::size_t>();
    forest.n_train = doc.at("n_train").get<std::size_t>();
    for (const auto& t : doc.at("trees")) {
      std::vector<TreeNode> nodes;
      for (const auto& a : t) {
        TreeNode n;
        n.feature = a.at(0).get<std::int32_t>();
        n.threshold = a.at(1).get<double>();
        n.left_levels = a.at(2).get<std::uint64_t>();
        n.left = a.at(3).get<std::int32_t>();
        n.right = a.at(4).get<std::int32_t>();
        n.impurity_decrease = a.at(5).get<double>();
        n.weight = a.at(6).get<double>();
        n.value = a.at(7).get<double>();
        n.counts = a.at(8).get<std::vector<double>>();
        n.tie_band = a.at(9).get<double>();
        nodes.push_back(std::move(n));
      }
      forest.trees.emplace_back(std::move(nodes));
    }
    forest.in_bag = doc.at("in_bag").get<std::vector<std::vector<std::uint32_t>>>();
  } catch (const json::exception& e) {
    throw Error(Errc::ConfigError, std::string("malformed forest model: ") + e.what());
  }
  return forest;
}

}  // namespace adscreen
