#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>

#include "nestedeg/errors.hpp"
#include "nestedeg/harness.hpp"
#include "nestedeg/meta.hpp"
#include "nestedeg/oracles.hpp"

namespace nestedeg {

using nlohmann::json;

namespace {

// M(3+L)(sqrt T + 2 (3d)^{d/(2(d+2))} T^{(d+1)/(d+2)})
double lipschitz_regret_bound(double m, double lipschitz, double d, double t) {
  return m * (3.0 + lipschitz) *
         (std::sqrt(t) + 2.0 * std::pow(3.0 * d, d / (2.0 * (d + 2.0))) * std::pow(t, (d + 1.0) / (d + 2.0)));
}

BoundCheck make_check(std::string name, double bound, double achieved) {
  return BoundCheck{std::move(name), bound, achieved, bound - achieved, achieved <= bound};
}

// Lag-1 pairs (y_{t-1}, y_t), t = 2..T.
void lag_pairs(const std::vector<double>& y, std::vector<double>& x_out, std::vector<double>& y_out) {
  for (std::size_t t = 1; t < y.size(); ++t) {
    x_out.push_back(y[t - 1]);
    y_out.push_back(y[t]);
  }
}

std::string format_param(double v) { return format_double(v); }

}  // namespace

OracleResult evaluate_oracle(const SeriesData& data, const OracleRequest& request) {
  OracleResult r;
  r.kind = request.kind;
  r.data_digest = data.digest();
  r.params = json{{"loss", loss_to_json(request.loss)}};

  std::vector<double> x;
  std::vector<double> y;
  std::size_t dim = data.dim;
  if (dim == 0) {
    lag_pairs(data.outcomes, x, y);
    dim = 1;
  } else {
    x = data.covariates;
    y = data.outcomes;
  }

  if (request.kind == "constant") {
    const auto fit = best_constant(data.outcomes, request.loss);
    r.loss = fit.loss;
    r.argmin = fit.argmin;
  } else if (request.kind == "histogram") {
    if (y.empty()) throw InputError("histogram oracle needs at least two observations for a plain series");
    r.params["bins"] = request.bins;
    r.params["dim"] = dim;
    r.loss = best_histogram(x, y, dim, request.bins, request.loss);
  } else if (request.kind == "lipschitz") {
    if (dim != 1) throw UnsupportedError("the Lipschitz oracle is implemented for d = 1 only");
    if (y.empty()) throw InputError("Lipschitz oracle needs at least two observations for a plain series");
    r.params["L"] = request.lipschitz;
    const auto fit = best_lipschitz_1d(x, y, request.lipschitz, request.loss);
    r.loss = fit.loss;
    r.argmin = json{{"knots", fit.knots}, {"values", fit.values}};
  } else {
    throw InputError("unknown oracle kind '" + request.kind + "'");
  }
  return r;
}

json oracle_to_json(const OracleResult& result) {
  json j{{"kind", result.kind}, {"params", result.params}, {"loss", result.loss}, {"data_digest", result.data_digest}};
  if (!result.argmin.is_null()) j["argmin"] = result.argmin;
  return j;
}

OracleResult oracle_from_json(const json& j) {
  OracleResult r;
  try {
    r.kind = j.at("kind").get<std::string>();
    r.params = j.at("params");
    r.loss = j.at("loss").get<double>();
    r.data_digest = j.at("data_digest").get<std::string>();
    if (j.contains("argmin")) r.argmin = j.at("argmin");
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed oracle result: ") + e.what());
  }
  return r;
}

double meta_regret_vs_expert(const RunLog& log, std::size_t d) {
  if (log.config.forecaster != ForecasterKind::meta) throw InputError("not a meta run");
  const auto start = log.config.start_schedule().start(d);
  if (d == 0 || !start || log.steps.empty() || *start > log.steps.back().t) {
    throw InputError("expert " + std::to_string(d) + " was never active in this run");
  }
  double regret = 0.0;
  for (const auto& s : log.steps) {
    if (s.t < *start) continue;
    if (s.expert_predictions.size() < d) throw InputError("log lacks expert predictions for d=" + std::to_string(d));
    regret += s.loss - loss(log.config.loss, s.expert_predictions[d - 1], s.outcome);
  }
  return regret;
}

std::vector<BoundCheck> verify_bounds(const RunLog& log, std::span<const OracleResult> oracles,
                                      const VerifyOptions& options) {
  if (log.steps.empty()) throw InputError("run log is empty; nothing to verify");
  const auto y = log.outcomes();
  const auto xs = log.covariates();
  if (fnv1a_digest(xs, y) != log.data_digest) {
    throw InputError("run log data does not match its recorded digest");
  }
  for (const auto& o : oracles) {
    if (o.data_digest != log.data_digest) {
      throw InputError("oracle '" + o.kind + "' was computed on different data (digest " + o.data_digest +
                       " vs " + log.data_digest + ")");
    }
    if (o.params.contains("loss") && !(loss_from_json(o.params.at("loss")) == log.config.loss)) {
      throw InputError("oracle '" + o.kind + "' uses a different loss than the run");
    }
  }

  const LossSpec& spec = log.config.loss;
  const double m = lipschitz_constant(spec);
  const double t_total = static_cast<double>(log.steps.size());
  std::vector<BoundCheck> checks;

  // Bookkeeping invariants.
  double resum = 0.0;
  double worst_loss_gap = 0.0;
  bool monotone = true;
  for (std::size_t k = 0; k < log.steps.size(); ++k) {
    const auto& s = log.steps[k];
    resum += s.loss;
    worst_loss_gap = std::max(worst_loss_gap, std::abs(s.loss - loss(spec, s.prediction, s.outcome)));
    if (k > 0 && (s.nodes < log.steps[k - 1].nodes || s.height < log.steps[k - 1].height)) monotone = false;
  }
  checks.push_back(make_check("cumulative_loss_resummation", 0.0, std::abs(resum - log.cumulative_loss)));
  checks.push_back(make_check("per_step_loss_recomputed", 0.0, worst_loss_gap));
  checks.push_back(make_check("nodes_height_nondecreasing", 0.0, monotone ? 0.0 : 1.0));

  // Comparator values: external oracle results take precedence.
  std::map<double, double> lipschitz_values;
  std::optional<double> constant_value;
  for (const auto& o : oracles) {
    if (o.kind == "constant") constant_value = o.loss;
    if (o.kind == "lipschitz") lipschitz_values[o.params.at("L").get<double>()] = o.loss;
  }
  std::vector<double> lip_x;
  std::vector<double> lip_y;
  if (log.dim == 0 || log.config.forecaster == ForecasterKind::meta) {
    lag_pairs(y, lip_x, lip_y);
  } else if (log.dim == 1) {
    lip_x = xs;
    lip_y = y;
  }
  const bool lipschitz_applies = log.config.forecaster == ForecasterKind::meta ||
                                 (log.config.forecaster == ForecasterKind::tree && log.dim == 1);
  if (!lipschitz_applies && (!options.lipschitz.empty() || !lipschitz_values.empty())) {
    throw UnsupportedError("Lipschitz comparators apply to meta runs and d = 1 tree runs only");
  }
  for (double lv : options.lipschitz) {
    if (lipschitz_values.contains(lv)) continue;
    if (lip_y.empty()) throw UnsupportedError("Lipschitz comparator needs d = 1 covariates or a series of length >= 2");
    lipschitz_values[lv] = best_lipschitz_1d(lip_x, lip_y, lv, spec).loss;
  }

  switch (log.config.forecaster) {
    case ForecasterKind::eg: {
      const double best = constant_value ? *constant_value : best_constant(y, spec).loss;
      checks.push_back(make_check("eg_regret", 2.0 * m * std::sqrt(t_total * std::numbers::ln2),
                                  log.cumulative_loss - best));
      break;
    }
    case ForecasterKind::tree: {
      const double d = static_cast<double>(log.dim);
      // Size and height after every step.
      double worst_nodes = -std::numeric_limits<double>::infinity();
      double worst_height = -std::numeric_limits<double>::infinity();
      BoundCheck nodes_check{"node_count", 0, 0, 0, true};
      BoundCheck height_check{"tree_height", 0, 0, 0, true};
      for (const auto& s : log.steps) {
        const double t = static_cast<double>(s.t);
        const double nb = 1.0 + 8.0 * std::pow(d * t, d / (d + 2.0));
        const double hb = 1.0 + 0.5 * d * std::log2(4.0 * d * t);
        const double n_over = static_cast<double>(s.nodes) - nb;
        const double h_over = static_cast<double>(s.height) - hb;
        if (n_over > worst_nodes) {
          worst_nodes = n_over;
          nodes_check = make_check("node_count", nb, static_cast<double>(s.nodes));
        }
        if (h_over > worst_height) {
          worst_height = h_over;
          height_check = make_check("tree_height", hb, static_cast<double>(s.height));
        }
      }
      checks.push_back(nodes_check);
      checks.push_back(height_check);

      const double n_total = static_cast<double>(log.steps.back().nodes);
      // Binary-tree structure of the final tree. Skipped when the log is a
      // prefix whose final state describes a later tree.
      if (log.final_state.contains("node_list") && log.final_state.at("node_list").size() == log.steps.back().nodes) {
        double inner = 0.0;
        double depth_sum = 0.0;
        for (const auto& n : log.final_state.at("node_list")) {
          if (!n.at(3).get<bool>()) {
            inner += 1.0;
            depth_sum += n.at(0).get<double>();
          }
        }
        checks.push_back(make_check("inner_node_count", 0.0, std::abs(inner - (n_total - 1.0) / 2.0)));
        if (n_total >= 3.0) {
          // avg inner depth >= log2((N-1)/8), written as bound - achieved >= 0
          checks.push_back(
              make_check("average_inner_depth", depth_sum / inner, std::log2((n_total - 1.0) / 8.0)));
        }
      }

      // Per-node decomposition against per-node best constants.
      std::map<NodeId, std::vector<double>> per_node;
      for (const auto& s : log.steps) per_node[*s.leaf].push_back(s.outcome);
      double comparator = 0.0;
      double sqrt_sum = 0.0;
      for (const auto& [id, ys] : per_node) {
        comparator += best_constant(ys, spec).loss;
        sqrt_sum += std::sqrt(static_cast<double>(ys.size()));
      }
      checks.push_back(make_check("node_decomposition", 3.0 * m * sqrt_sum, log.cumulative_loss - comparator));
      checks.push_back(make_check("node_decomposition_sqrtNT", 3.0 * m * std::sqrt(n_total * t_total), 3.0 * m * sqrt_sum));

      if (log.dim == 1) {
        for (const auto& [lv, value] : lipschitz_values) {
          const double regret = log.cumulative_loss - value;
          checks.push_back(make_check("lipschitz_regret_sqrtNT_L=" + format_param(lv),
                                      m * (3.0 + lv) * std::sqrt(n_total * t_total), regret));
          checks.push_back(make_check("lipschitz_regret_L=" + format_param(lv),
                                      lipschitz_regret_bound(m, lv, 1.0, t_total), regret));
        }
      }
      break;
    }
    case ForecasterKind::meta: {
      const auto schedule = log.config.start_schedule();
      const auto total_steps = static_cast<std::uint64_t>(log.steps.size());
      const std::size_t d_final = schedule.active_at(total_steps);
      const std::size_t d_next = schedule.active_at(total_steps + 1);

      double worst_sum = 0.0;
      double min_weight = 0.0;
      for (const auto& s : log.steps) {
        if (s.weights.empty()) continue;
        double sum = 0.0;
        for (double w : s.weights) {
          sum += w;
          min_weight = std::min(min_weight, w);
        }
        worst_sum = std::max(worst_sum, std::abs(sum - 1.0));
      }
      checks.push_back(make_check("weights_sum_to_one", 1e-12, worst_sum));
      checks.push_back(make_check("weights_nonnegative", 0.0, 0.0 - min_weight));

      const double eta_next = meta_learning_rate(total_steps + 1);
      for (std::size_t d = 1; d <= d_final; ++d) {
        const double regret = meta_regret_vs_expert(log, d);
        double eta_sum = 0.0;
        for (const auto& s : log.steps) {
          if (s.t >= *schedule.start(d)) eta_sum += meta_learning_rate(s.t);
        }
        const double log_d = std::log(static_cast<double>(d_next));
        const double bound = d_next >= 2 ? std::sqrt(t_total + 1.0) * log_d : log_d / eta_next + eta_sum / 8.0;
        checks.push_back(make_check("expert_regret_d=" + std::to_string(d), bound, regret));
      }

      for (const auto& [lv, value] : lipschitz_values) {
        const double t1 = static_cast<double>(*schedule.start(1));
        const double composite = t1 + std::sqrt(t_total + 1.0) * std::log(static_cast<double>(d_next)) +
                                 lipschitz_regret_bound(m, lv, 1.0, t_total);
        checks.push_back(make_check("meta_lipschitz_regret_d=1_L=" + format_param(lv), composite, log.cumulative_loss - value));
        if (d_final >= 1) {
          double expert_loss = 0.0;
          for (const auto& s : log.steps) {
            if (s.t >= *schedule.start(1)) expert_loss += loss(spec, s.expert_predictions[0], s.outcome);
          }
          checks.push_back(make_check("expert1_lipschitz_regret_L=" + format_param(lv), lipschitz_regret_bound(m, lv, 1.0, t_total),
                                      expert_loss - value));
        }
      }
      break;
    }
  }
  return checks;
}

json checks_to_json(std::span<const BoundCheck> checks) {
  json arr = json::array();
  for (const auto& c : checks) {
    arr.push_back({{"name", c.name}, {"bound", c.bound}, {"achieved", c.achieved}, {"slack", c.slack}, {"pass", c.pass}});
  }
  return json{{"checks", std::move(arr)}, {"all_passed", all_passed(checks)}};
}

bool all_passed(std::span<const BoundCheck> checks) {
  return std::all_of(checks.begin(), checks.end(), [](const BoundCheck& c) { return c.pass; });
}

}  // namespace nestedeg
