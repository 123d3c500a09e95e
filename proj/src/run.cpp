#include <algorithm>
#include <chrono>
#include <sstream>

#include "nestedeg/eg.hpp"
#include "nestedeg/errors.hpp"
#include "nestedeg/harness.hpp"
#include "nestedeg/meta.hpp"

namespace nestedeg {

using nlohmann::json;

namespace {

std::string join(const std::vector<double>& values) {
  std::string out;
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (k) out += ';';
    out += format_double(values[k]);
  }
  return out;
}

std::vector<double> split_list(const std::string& field, std::size_t row, const char* column) {
  std::vector<double> out;
  if (field.empty()) return out;
  std::istringstream in(field);
  std::string item;
  while (std::getline(in, item, ';')) out.push_back(parse_double(item, row, column));
  return out;
}

json tree_final_state(const NestedEgTree& tree) {
  json nodes = json::array();
  for (const auto& n : tree.nodes()) {
    nodes.push_back(json::array({n.id.depth, n.id.index, n.count, n.is_leaf()}));
  }
  return json{{"nodes", tree.node_count()}, {"height", tree.height()}, {"node_list", std::move(nodes)}};
}

constexpr const char* kStepsHeader =
    "t,x,prediction,outcome,loss,leaf_h,leaf_i,nodes,height,expert_predictions,weights";

}  // namespace

std::vector<double> RunLog::outcomes() const {
  std::vector<double> y;
  y.reserve(steps.size());
  for (const auto& s : steps) y.push_back(s.outcome);
  return y;
}

std::vector<double> RunLog::covariates() const {
  std::vector<double> x;
  x.reserve(steps.size() * dim);
  for (const auto& s : steps) x.insert(x.end(), s.x.begin(), s.x.end());
  return x;
}

RunLog run_forecaster(const RunConfig& config, const SeriesData& data, std::optional<NestedEgTree> initial_tree) {
  config.loss.validate();
  if (data.outcomes.empty()) throw InputError("input series is empty");
  if (data.covariates.size() != data.outcomes.size() * data.dim) throw InputError("covariate/outcome size mismatch");
  const auto started = std::chrono::steady_clock::now();

  RunLog log;
  log.config = config;
  log.dim = data.dim;
  log.data_digest = data.digest();
  // The sidecar records L* for one loss; it only applies to runs with that loss.
  if (data.metadata && data.metadata->contains("l_star") && !data.metadata->at("l_star").is_null() &&
      data.metadata->contains("l_star_loss") && loss_from_json(data.metadata->at("l_star_loss")) == config.loss) {
    log.l_star = data.metadata->at("l_star").get<double>();
  }
  log.steps.reserve(data.size());

  const std::size_t dim = data.dim;
  auto x_at = [&](std::size_t t) {
    return std::span<const double>(data.covariates).subspan(t * dim, dim);
  };

  switch (config.forecaster) {
    case ForecasterKind::eg: {
      EgForecaster eg(config.loss);
      for (std::size_t t = 0; t < data.size(); ++t) {
        StepRecord rec;
        rec.t = t + 1;
        rec.x.assign(x_at(t).begin(), x_at(t).end());
        rec.prediction = eg.predict();
        rec.outcome = data.outcomes[t];
        eg.update(rec.outcome);
        rec.loss = loss(config.loss, rec.prediction, rec.outcome);
        log.cumulative_loss += rec.loss;
        log.steps.push_back(std::move(rec));
      }
      log.final_state = json{{"eg", {{"t", eg.state().steps}, {"G", eg.state().cumulative_gradient}}}};
      break;
    }
    case ForecasterKind::tree: {
      if (dim == 0) throw InputError("tree forecaster needs covariate columns x1..xd in the input");
      NestedEgTree tree = initial_tree ? std::move(*initial_tree) : NestedEgTree(dim, config.loss, config.effective_range);
      if (tree.dim() != dim) throw InputError("snapshot dimension does not match the input covariates");
      if (!(tree.loss_spec() == config.loss)) throw InputError("snapshot loss does not match the configured loss");
      for (std::size_t t = 0; t < data.size(); ++t) {
        StepRecord rec;
        rec.t = t + 1;
        rec.x.assign(x_at(t).begin(), x_at(t).end());
        const auto pred = tree.predict(rec.x);
        rec.prediction = pred.value;
        rec.leaf = pred.leaf.id;
        rec.outcome = data.outcomes[t];
        tree.update(pred.leaf, pred.value, rec.outcome);
        rec.loss = loss(config.loss, rec.prediction, rec.outcome);
        rec.nodes = tree.node_count();
        rec.height = tree.height();
        log.cumulative_loss += rec.loss;
        log.steps.push_back(std::move(rec));
      }
      log.final_state = tree_final_state(tree);
      log.final_state["snapshot"] = tree_to_json(tree);
      break;
    }
    case ForecasterKind::meta: {
      MetaForecaster meta(config.loss, config.start_schedule(), config.effective_range);
      for (std::size_t t = 0; t < data.size(); ++t) {
        StepRecord rec;
        rec.t = t + 1;
        rec.x.assign(x_at(t).begin(), x_at(t).end());
        rec.prediction = meta.predict();
        rec.expert_predictions.assign(meta.expert_predictions().begin(), meta.expert_predictions().end());
        rec.weights = meta.weights();
        rec.outcome = data.outcomes[t];
        meta.update(rec.outcome);
        rec.loss = loss(config.loss, rec.prediction, rec.outcome);
        rec.nodes = 0;
        rec.height = 0;
        for (std::size_t d = 1; d <= meta.active(); ++d) {
          rec.nodes += meta.expert(d).tree().node_count();
          rec.height = std::max(rec.height, meta.expert(d).tree().height());
        }
        log.cumulative_loss += rec.loss;
        log.steps.push_back(std::move(rec));
      }
      json experts = json::array();
      for (std::size_t d = 1; d <= meta.active(); ++d) {
        const auto& e = meta.expert(d);
        experts.push_back({{"d", d}, {"start", e.start()}, {"nodes", e.tree().node_count()}, {"height", e.tree().height()}});
      }
      log.final_state = json{{"experts", std::move(experts)}, {"weights", meta.weights()}};
      break;
    }
  }

  log.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return log;
}

void write_run(const RunLog& log, const std::filesystem::path& dir) {
  std::string csv = kStepsHeader;
  csv += '\n';
  for (const auto& s : log.steps) {
    csv += std::to_string(s.t) + ',' + join(s.x) + ',' + format_double(s.prediction) + ',' +
           format_double(s.outcome) + ',' + format_double(s.loss) + ',';
    if (s.leaf) csv += std::to_string(s.leaf->depth) + ',' + std::to_string(s.leaf->index);
    else csv += ',';
    csv += ',' + std::to_string(s.nodes) + ',' + std::to_string(s.height) + ',' + join(s.expert_predictions) +
           ',' + join(s.weights) + '\n';
  }
  write_text_file(dir / "steps.csv", csv);

  json summary{{"config", config_to_json(log.config)},
               {"forecaster", std::string(to_string(log.config.forecaster))},
               {"T", log.steps.size()},
               {"dim", log.dim},
               {"cumulative_loss", log.cumulative_loss},
               {"average_loss", log.steps.empty() ? 0.0 : log.cumulative_loss / static_cast<double>(log.steps.size())},
               {"data_digest", log.data_digest},
               {"seed", log.config.seed},
               {"l_star", log.l_star ? json(*log.l_star) : json(nullptr)}};
  json final_state = log.final_state;
  if (final_state.is_object() && final_state.contains("snapshot")) {
    write_text_file(dir / "tree.json", final_state["snapshot"].dump(1) + "\n");
    final_state.erase("snapshot");
  }
  summary["final"] = std::move(final_state);
  write_text_file(dir / "summary.json", summary.dump(2) + "\n");
  write_text_file(dir / "timing.json", json{{"wall_clock_seconds", log.wall_clock_seconds}}.dump(2) + "\n");
}

RunLog read_run(const std::filesystem::path& dir) {
  json summary;
  try {
    summary = json::parse(read_text_file(dir / "summary.json"));
  } catch (const json::exception& e) {
    throw IoError("cannot parse summary.json: " + std::string(e.what()));
  }
  RunLog log;
  log.config = config_from_json(summary.at("config"));
  log.dim = summary.at("dim").get<std::size_t>();
  log.data_digest = summary.at("data_digest").get<std::string>();
  log.cumulative_loss = summary.at("cumulative_loss").get<double>();
  if (!summary.at("l_star").is_null()) log.l_star = summary.at("l_star").get<double>();
  log.final_state = summary.at("final");
  const auto timing = dir / "timing.json";
  if (std::filesystem::exists(timing)) {
    log.wall_clock_seconds = json::parse(read_text_file(timing)).value("wall_clock_seconds", 0.0);
  }

  std::istringstream in(read_text_file(dir / "steps.csv"));
  std::string line;
  if (!std::getline(in, line) || line != kStepsHeader) throw InputError("steps.csv has an unexpected header");
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::size_t start = 0;
    while (true) {
      const auto comma = line.find(',', start);
      f.push_back(line.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (f.size() != 11) throw InputError("steps.csv row " + std::to_string(row) + ": expected 11 fields");
    StepRecord s;
    s.t = std::stoull(f[0]);
    s.x = split_list(f[1], row, "x");
    s.prediction = parse_double(f[2], row, "prediction");
    s.outcome = parse_double(f[3], row, "outcome");
    s.loss = parse_double(f[4], row, "loss");
    if (!f[5].empty()) {
      s.leaf = NodeId{static_cast<std::uint32_t>(std::stoul(f[5])), std::stoull(f[6])};
    }
    s.nodes = std::stoull(f[7]);
    s.height = static_cast<std::uint32_t>(std::stoul(f[8]));
    s.expert_predictions = split_list(f[9], row, "expert_predictions");
    s.weights = split_list(f[10], row, "weights");
    if (s.x.size() != log.dim) throw InputError("steps.csv row " + std::to_string(row) + ": covariate arity");
    log.steps.push_back(std::move(s));
  }
  return log;
}

}  // namespace nestedeg
