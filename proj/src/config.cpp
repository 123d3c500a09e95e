#include "nestedeg/config.hpp"

#include <string>

#include "nestedeg/errors.hpp"

namespace nestedeg {

using nlohmann::json;

namespace {

template <typename T>
T require(const json& j, const char* key) {
  if (!j.contains(key)) throw InputError(std::string("missing key '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw InputError(std::string("bad value for '") + key + "': " + e.what());
  }
}

}  // namespace

std::string_view to_string(ForecasterKind kind) {
  switch (kind) {
    case ForecasterKind::eg:
      return "eg";
    case ForecasterKind::tree:
      return "tree";
    case ForecasterKind::meta:
      return "meta";
  }
  return "unknown";
}

ForecasterKind forecaster_kind_from_string(std::string_view name) {
  if (name == "eg") return ForecasterKind::eg;
  if (name == "tree") return ForecasterKind::tree;
  if (name == "meta") return ForecasterKind::meta;
  throw InputError("unknown forecaster '" + std::string(name) + "' (expected eg, tree or meta)");
}

json loss_to_json(const LossSpec& spec) {
  json j{{"kind", std::string(to_string(spec.kind))}};
  if (spec.kind == LossKind::pinball) j["alpha"] = spec.alpha;
  return j;
}

LossSpec loss_from_json(const json& j) {
  if (!j.is_object()) throw InputError("loss must be a JSON object");
  LossSpec spec;
  spec.kind = loss_kind_from_string(require<std::string>(j, "kind"));
  if (spec.kind == LossKind::pinball) spec.alpha = require<double>(j, "alpha");
  spec.validate();
  return spec;
}

json config_to_json(const RunConfig& config) {
  json j{{"loss", loss_to_json(config.loss)},
         {"schedule", std::string(to_string(config.schedule))},
         {"effective_range", config.effective_range},
         {"forecaster", std::string(to_string(config.forecaster))},
         {"seed", config.seed}};
  if (config.max_d) j["max_d"] = *config.max_d;
  return j;
}

RunConfig config_from_json(const json& j) {
  if (!j.is_object()) throw InputError("config must be a JSON object");
  RunConfig c;
  if (j.contains("loss")) c.loss = loss_from_json(j.at("loss"));
  if (j.contains("schedule")) c.schedule = schedule_kind_from_string(require<std::string>(j, "schedule"));
  if (j.contains("effective_range")) c.effective_range = require<bool>(j, "effective_range");
  if (j.contains("max_d") && !j.at("max_d").is_null()) {
    const auto d = require<long long>(j, "max_d");
    if (d < 1) throw InputError("max_d must be >= 1");
    c.max_d = static_cast<std::size_t>(d);
  }
  if (j.contains("forecaster")) c.forecaster = forecaster_kind_from_string(require<std::string>(j, "forecaster"));
  if (j.contains("seed")) c.seed = require<std::uint64_t>(j, "seed");
  return c;
}

json process_to_json(const ProcessSpec& spec) {
  json j;
  if (const auto* iid = std::get_if<IidProcess>(&spec.model)) {
    j = {{"kind", "iid"}, {"values", iid->values}, {"probs", iid->probs}};
  } else if (const auto* chain = std::get_if<MarkovProcess>(&spec.model)) {
    j = {{"kind", "markov"}, {"emissions", chain->emissions}, {"transition", chain->transition}};
  } else {
    const auto& ar = std::get<Ar1Process>(spec.model);
    j = {{"kind", "ar1"}, {"a", ar.a}, {"sigma", ar.sigma}};
  }
  j["seed"] = spec.seed;
  return j;
}

ProcessSpec process_from_json(const json& j) {
  if (!j.is_object()) throw InputError("process spec must be a JSON object");
  ProcessSpec spec;
  const auto kind = require<std::string>(j, "kind");
  if (kind == "iid") {
    spec.model = IidProcess{require<std::vector<double>>(j, "values"), require<std::vector<double>>(j, "probs")};
  } else if (kind == "markov") {
    spec.model = MarkovProcess{require<std::vector<double>>(j, "emissions"),
                               require<std::vector<std::vector<double>>>(j, "transition")};
  } else if (kind == "ar1") {
    spec.model = Ar1Process{require<double>(j, "a"), require<double>(j, "sigma")};
  } else {
    throw InputError("unknown process kind '" + kind + "'");
  }
  if (j.contains("seed")) spec.seed = require<std::uint64_t>(j, "seed");
  spec.validate();
  return spec;
}

json tree_to_json(const NestedEgTree& tree) {
  json nodes = json::array();
  for (const auto& n : tree.nodes()) {
    json bin = json::array();
    for (const auto& a : n.bin.axes()) bin.push_back(json::array({a.lo, a.hi, a.hi_closed}));
    json node{{"h", n.id.depth},
              {"i", n.id.index},
              {"bin", std::move(bin)},
              {"count", n.count},
              {"eg", {{"t", n.eg.steps}, {"G", n.eg.cumulative_gradient}, {"M", n.eg.lipschitz}}}};
    if (!n.is_leaf()) {
      node["left"] = n.left;
      node["right"] = n.right;
      node["axis"] = n.split_axis;
      node["threshold"] = n.threshold;
    }
    if (!n.range.empty()) node["range"] = {{"lower", n.range.lower()}, {"upper", n.range.upper()}};
    nodes.push_back(std::move(node));
  }
  return json{{"dim", tree.dim()},
              {"loss", loss_to_json(tree.loss_spec())},
              {"effective_range", tree.effective_range()},
              {"steps", tree.steps()},
              {"nodes", std::move(nodes)}};
}

NestedEgTree tree_from_json(const json& j) try {
  const auto dim = require<std::size_t>(j, "dim");
  const auto loss_spec = loss_from_json(j.at("loss"));
  const auto effective = require<bool>(j, "effective_range");
  const auto steps = require<std::uint64_t>(j, "steps");
  std::vector<TreeNode> nodes;
  for (const auto& jn : require<json>(j, "nodes")) {
    TreeNode n;
    n.id = NodeId{require<std::uint32_t>(jn, "h"), require<std::uint64_t>(jn, "i")};
    std::vector<Interval> axes;
    for (const auto& a : jn.at("bin")) axes.push_back(Interval{a.at(0).get<double>(), a.at(1).get<double>(), a.at(2).get<bool>()});
    n.bin = Bin(std::move(axes));
    n.count = require<std::uint64_t>(jn, "count");
    const auto& eg = jn.at("eg");
    n.eg = EgState{require<std::uint64_t>(eg, "t"), require<double>(eg, "G"), require<double>(eg, "M")};
    if (jn.contains("left")) {
      n.left = require<std::int64_t>(jn, "left");
      n.right = require<std::int64_t>(jn, "right");
      n.split_axis = require<std::size_t>(jn, "axis");
      n.threshold = require<double>(jn, "threshold");
    }
    if (jn.contains("range")) {
      n.range = RangeTracker::from_bounds(jn.at("range").at("lower").get<std::vector<double>>(),
                                          jn.at("range").at("upper").get<std::vector<double>>());
    }
    nodes.push_back(std::move(n));
  }
  return NestedEgTree::from_nodes(dim, loss_spec, effective, std::move(nodes), steps);
} catch (const json::exception& e) {
  throw InputError(std::string("malformed tree snapshot: ") + e.what());
}

}  // namespace nestedeg
