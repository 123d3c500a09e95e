#include <algorithm>
#include <map>
#include <numeric>

#include "nestedeg/errors.hpp"
#include "nestedeg/harness.hpp"

namespace nestedeg {

namespace {

struct Stat {
  double sum = 0.0;
  double min = 0.0;
  double max = 0.0;
  std::size_t n = 0;

  void add(double v) {
    min = n == 0 ? v : std::min(min, v);
    max = n == 0 ? v : std::max(max, v);
    sum += v;
    ++n;
  }
  double mean() const { return n ? sum / static_cast<double>(n) : 0.0; }
};

// 1, 2, 5, 10, 20, 50, ... up to T, plus T itself.
std::vector<std::size_t> checkpoints(std::size_t t_total) {
  std::vector<std::size_t> out;
  for (std::size_t scale = 1; scale <= t_total; scale *= 10) {
    for (std::size_t m : {1, 2, 5}) {
      if (m * scale <= t_total) out.push_back(m * scale);
    }
    if (scale > t_total / 10) break;
  }
  if (out.empty() || out.back() != t_total) out.push_back(t_total);
  return out;
}

RunLog prefix_of(const RunLog& log, std::size_t t) {
  RunLog p;
  p.config = log.config;
  p.dim = log.dim;
  p.l_star = log.l_star;
  p.steps.assign(log.steps.begin(), log.steps.begin() + static_cast<std::ptrdiff_t>(t));
  for (const auto& s : p.steps) p.cumulative_loss += s.loss;
  p.data_digest = fnv1a_digest(p.covariates(), p.outcomes());
  p.final_state = t == log.steps.size() ? log.final_state : nlohmann::json::object();
  return p;
}

std::string loss_label(const LossSpec& spec) {
  std::string out(to_string(spec.kind));
  if (spec.kind == LossKind::pinball) out += "@" + format_double(spec.alpha);
  return out;
}

std::string group_key(const RunLog& log) {
  return std::string(to_string(log.config.forecaster)) + "/" + loss_label(log.config.loss) + "/d" +
         std::to_string(log.dim) + "/T" + std::to_string(log.steps.size());
}

std::string opt(const std::optional<double>& v) { return v ? format_double(*v) : ""; }

}  // namespace

void write_report(std::span<const RunLog> runs, std::span<const std::string> names,
                  const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  auto name_of = [&](std::size_t k) { return k < names.size() ? names[k] : "run" + std::to_string(k + 1); };

  std::string summary = "run,forecaster,loss,dim,T,seed,cumulative_loss,average_loss,l_star,nodes,height\n";
  std::string curve = "run,T,average_loss,l_star\n";
  std::string regret = "run,T,check,bound,achieved,slack\n";
  std::string growth = "run,t,nodes,height\n";
  std::string weights = "run,t,d,weight\n";

  struct Group {
    Stat avg_loss;
    Stat cumulative;
    Stat nodes;
    std::map<std::size_t, Stat> curve;
    std::optional<double> l_star;
  };
  std::map<std::string, Group> groups;

  for (std::size_t k = 0; k < runs.size(); ++k) {
    const RunLog& log = runs[k];
    const std::string name = name_of(k);
    if (log.steps.empty()) continue;
    const std::size_t t_total = log.steps.size();
    const double avg = log.cumulative_loss / static_cast<double>(t_total);
    const auto& last = log.steps.back();

    summary += name + ',' + std::string(to_string(log.config.forecaster)) + ',' + loss_label(log.config.loss) + ',' +
               std::to_string(log.dim) + ',' + std::to_string(t_total) + ',' + std::to_string(log.config.seed) + ',' +
               format_double(log.cumulative_loss) + ',' + format_double(avg) + ',' + opt(log.l_star) + ',' +
               std::to_string(last.nodes) + ',' + std::to_string(last.height) + '\n';

    Group& g = groups[group_key(log)];
    g.avg_loss.add(avg);
    g.cumulative.add(log.cumulative_loss);
    g.nodes.add(static_cast<double>(last.nodes));
    g.l_star = log.l_star;

    double running = 0.0;
    std::size_t next = 0;
    const auto marks = checkpoints(t_total);
    for (std::size_t t = 0; t < t_total; ++t) {
      running += log.steps[t].loss;
      if (next < marks.size() && marks[next] == t + 1) {
        const double a = running / static_cast<double>(t + 1);
        curve += name + ',' + std::to_string(t + 1) + ',' + format_double(a) + ',' + opt(log.l_star) + '\n';
        g.curve[t + 1].add(a);
        growth += name + ',' + std::to_string(t + 1) + ',' + std::to_string(log.steps[t].nodes) + ',' +
                  std::to_string(log.steps[t].height) + '\n';
        for (std::size_t d = 0; d < log.steps[t].weights.size(); ++d) {
          weights += name + ',' + std::to_string(t + 1) + ',' + std::to_string(d + 1) + ',' +
                     format_double(log.steps[t].weights[d]) + '\n';
        }
        ++next;
      }
    }

    for (std::size_t t : marks) {
      const RunLog p = prefix_of(log, t);
      for (const auto& c : verify_bounds(p, {})) {
        regret += name + ',' + std::to_string(t) + ',' + c.name + ',' + format_double(c.bound) + ',' +
                  format_double(c.achieved) + ',' + format_double(c.slack) + '\n';
      }
    }
  }

  std::string aggregate =
      "group,replicates,avg_loss_mean,avg_loss_min,avg_loss_max,cumulative_mean,cumulative_min,cumulative_max,"
      "nodes_mean,nodes_min,nodes_max\n";
  std::string consistency = "group,T,avg_loss_mean,avg_loss_min,avg_loss_max,l_star\n";
  for (const auto& [key, g] : groups) {
    aggregate += key + ',' + std::to_string(g.avg_loss.n) + ',' + format_double(g.avg_loss.mean()) + ',' +
                 format_double(g.avg_loss.min) + ',' + format_double(g.avg_loss.max) + ',' +
                 format_double(g.cumulative.mean()) + ',' + format_double(g.cumulative.min) + ',' +
                 format_double(g.cumulative.max) + ',' + format_double(g.nodes.mean()) + ',' +
                 format_double(g.nodes.min) + ',' + format_double(g.nodes.max) + '\n';
    for (const auto& [t, s] : g.curve) {
      consistency += key + ',' + std::to_string(t) + ',' + format_double(s.mean()) + ',' + format_double(s.min) + ',' +
                     format_double(s.max) + ',' + opt(g.l_star) + '\n';
    }
  }

  write_text_file(out_dir / "summary.csv", summary);
  write_text_file(out_dir / "aggregate.csv", aggregate);
  write_text_file(out_dir / "avg_loss_vs_T.csv", curve);
  write_text_file(out_dir / "consistency.csv", consistency);
  write_text_file(out_dir / "regret_vs_bound.csv", regret);
  write_text_file(out_dir / "nodes_growth.csv", growth);
  write_text_file(out_dir / "weights.csv", weights);
}

}  // namespace nestedeg
