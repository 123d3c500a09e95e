// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "../common/reference.hpp"
#include "nestedeg/eg.hpp"
#include "nestedeg/loss.hpp"
#include "nestedeg/meta.hpp"
#include "nestedeg/oracles.hpp"
#include "nestedeg/processes.hpp"
#include "nestedeg/tree.hpp"

using namespace nestedeg;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
  bool pass = true;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

const std::vector<LossSpec> kLosses = {LossSpec::absolute(), LossSpec::square(), LossSpec::pinball(0.3)};

std::string name_of(const LossSpec& s) {
  return s.kind == LossKind::pinball ? fmt("pinball@%g", s.alpha) : std::string(to_string(s.kind));
}

// Random finite-support i.i.d. and Markov processes.
ProcessSpec random_iid(std::uint64_t seed) {
  Rng rng(seed * 7919 + 1);
  IidProcess p;
  const std::size_t k = 2 + static_cast<std::size_t>(rng.uniform() * 4);
  double total = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    p.values.push_back(rng.uniform());
    p.probs.push_back(0.1 + rng.uniform());
    total += p.probs.back();
  }
  for (double& q : p.probs) q /= total;
  return {p, seed};
}

ProcessSpec random_markov(std::uint64_t seed) {
  Rng rng(seed * 104729 + 3);
  MarkovProcess p;
  const std::size_t k = 2 + static_cast<std::size_t>(rng.uniform() * 3);
  for (std::size_t i = 0; i < k; ++i) p.emissions.push_back((static_cast<double>(i) + rng.uniform()) / k);
  for (std::size_t i = 0; i < k; ++i) {
    std::vector<double> row(k);
    double total = 0.0;
    for (double& v : row) total += (v = 0.05 + rng.uniform());
    for (double& v : row) v /= total;
    p.transition.push_back(row);
  }
  return {p, seed};
}

// Runs EG for T steps. When `fixed` is empty the outcome is chosen against the
// prediction: 1 if it is below 1/2, 0 if above, a coin flip on ties.
struct EgRun {
  std::vector<double> outcomes;
  double loss = 0.0;
};

EgRun run_eg(const LossSpec& spec, const std::vector<double>& fixed, std::size_t T, std::uint64_t seed) {
  EgForecaster eg(spec);
  Rng coin(seed);
  EgRun r;
  r.outcomes.reserve(T);
  for (std::size_t t = 0; t < T; ++t) {
    const double p = eg.predict();
    double y;
    if (!fixed.empty()) {
      y = fixed[t];
    } else if (p != 0.5) {
      y = p < 0.5 ? 1.0 : 0.0;
    } else {
      y = coin.uniform() < 0.5 ? 1.0 : 0.0;
    }
    r.loss += ref::loss(spec, p, y);
    r.outcomes.push_back(y);
    eg.update(y);
  }
  return r;
}

// Best constant, cross-checked against a coarse grid: the exact minimum can
// never exceed a grid value.
double checked_best_constant(const std::vector<double>& ys, const LossSpec& spec, bool& ok) {
  const auto fit = best_constant(ys, spec);
  const double recomputed = ref::cumulative(spec, ys, fit.argmin);
  const auto grid = ref::grid_best_constant(spec, ys, 1e-3);
  if (std::abs(recomputed - fit.loss) > 1e-9 * std::max(1.0, fit.loss) || fit.loss > grid.loss + 1e-9) ok = false;
  return fit.loss;
}

// ---------------------------------------------------------------------------

Outcome eg_regret() {
  const std::size_t T = 10000;
  Outcome out;
  double worst_ratio = 0.0;
  double worst_time = 0.0;
  int sequences = 0;
  bool oracle_ok = true;
  for (const auto& spec : kLosses) {
    const double bound = 2.0 * lipschitz_constant(spec) * std::sqrt(static_cast<double>(T) * std::numbers::ln2);
    for (std::uint64_t s = 0; s < 20; ++s) {
      const auto t0 = Clock::now();
      std::vector<double> ys;
      if (s < 7) {
        ys = generate(random_iid(s + 1), T).values;
      } else if (s < 14) {
        ys = generate(random_markov(s + 1), T).values;
      }
      const auto r = run_eg(spec, ys, T, s + 1);
      const double regret = r.loss - checked_best_constant(r.outcomes, spec, oracle_ok);
      const double elapsed = seconds_since(t0);
      ++sequences;
      worst_ratio = std::max(worst_ratio, regret / bound);
      worst_time = std::max(worst_time, elapsed);
      if (!(regret < bound) || elapsed >= 1.0) {
        out.pass = false;
        out.detail += fmt(" [%s seq %d regret %.6g bound %.6g %.3fs]", name_of(spec).c_str(), static_cast<int>(s),
                          regret, bound, elapsed);
      }
    }
  }
  if (!oracle_ok) {
    out.pass = false;
    out.detail += " [best_constant disagrees with reference]";
  }
  out.detail = fmt("%d sequences, max regret/bound %.4f, max %.3fs per sequence", sequences, worst_ratio, worst_time) +
               out.detail;
  return out;
}

// ---------------------------------------------------------------------------

enum class Stream { uniform, constant, two_cluster };

const char* name_of(Stream s) {
  switch (s) {
    case Stream::uniform:
      return "uniform";
    case Stream::constant:
      return "constant";
    case Stream::two_cluster:
      return "two-cluster";
  }
  return "?";
}

void draw(Stream s, Rng& rng, std::vector<double>& x) {
  switch (s) {
    case Stream::uniform:
      for (double& v : x) v = rng.uniform();
      break;
    case Stream::constant:
      for (std::size_t j = 0; j < x.size(); ++j) x[j] = 0.3 + 0.1 * static_cast<double>(j);
      break;
    case Stream::two_cluster: {
      const double centre = rng.uniform() < 0.5 ? 0.2 : 0.8;
      for (double& v : x) v = centre + 0.02 * (rng.uniform() - 0.5);
      break;
    }
  }
}

struct GrownTree {
  Stream stream;
  std::size_t dim;
  NestedEgTree tree;
  double seconds;
  bool growth_ok;
  std::string growth_detail;
  // Structural checks at intermediate sizes.
  std::vector<std::string> structure_failures;
};

// Per-axis ranges, diameter bound.
std::string check_ranges(const NestedEgTree& tree) {
  const std::size_t d = tree.dim();
  for (const auto& node : tree.nodes()) {
    const std::size_t h = node.id.depth;
    const int k = static_cast<int>(h / d);
    const std::size_t r = h % d;
    double sq = 0.0;
    for (std::size_t j = 1; j <= d; ++j) {
      const double expected = std::ldexp(1.0, j <= r ? -(k + 1) : -k);
      const double len = node.bin.axis(j - 1).hi - node.bin.axis(j - 1).lo;
      if (len != expected) return fmt("node (%zu,%llu) axis %zu has length %.17g, expected %.17g", h,
                                      static_cast<unsigned long long>(node.id.index), j, len, expected);
      sq += len * len;
    }
    const double bound = std::sqrt(2.0 * static_cast<double>(d)) * std::exp2(-static_cast<double>(h) / d);
    if (std::sqrt(sq) > bound + 1e-12) return fmt("node at depth %zu has diameter %.17g > %.17g", h, std::sqrt(sq), bound);
  }
  return {};
}

// Inner-node count and average inner depth.
std::string check_inner(const NestedEgTree& tree) {
  const double n = static_cast<double>(tree.node_count());
  double inner = 0.0;
  double depth_sum = 0.0;
  for (const auto& node : tree.nodes()) {
    if (node.left != TreeNode::kNone) {
      inner += 1.0;
      depth_sum += node.id.depth;
    }
  }
  if (inner != (n - 1.0) / 2.0) return fmt("N=%g but %g inner nodes", n, inner);
  if (n >= 3.0 && depth_sum / inner < std::log2((n - 1.0) / 8.0)) {
    return fmt("N=%g average inner depth %.6g < %.6g", n, depth_sum / inner, std::log2((n - 1.0) / 8.0));
  }
  return {};
}

GrownTree grow(Stream stream, std::size_t d, std::size_t T, std::uint64_t seed) {
  GrownTree g{stream, d, NestedEgTree(d, LossSpec::absolute()), 0.0, true, {}, {}};
  Rng rng(seed);
  std::vector<double> x(d);
  const auto t0 = Clock::now();
  double worst_n = 0.0;
  double worst_h = 0.0;
  for (std::size_t t = 1; t <= T; ++t) {
    draw(stream, rng, x);
    const double y = rng.uniform();
    const auto p = g.tree.predict(x);
    g.tree.update(p.leaf, p.value, y);
    const double dt = static_cast<double>(d * t);
    const double n_bound = 1.0 + 8.0 * std::pow(dt, static_cast<double>(d) / (d + 2.0));
    const double h_bound = 1.0 + 0.5 * static_cast<double>(d) * std::log2(4.0 * dt);
    const double n = static_cast<double>(g.tree.node_count());
    const double h = g.tree.height();
    worst_n = std::max(worst_n, n / n_bound);
    worst_h = std::max(worst_h, h / h_bound);
    if (g.growth_ok && (n > n_bound || h > h_bound)) {
      g.growth_ok = false;
      g.growth_detail = fmt("t=%zu N=%g (bound %.6g) H=%g (bound %.6g)", t, n, n_bound, h, h_bound);
    }
    if (t == 1000 || t == 10000) {
      for (auto* check : {&check_ranges, &check_inner}) {
        if (auto msg = (*check)(g.tree); !msg.empty()) g.structure_failures.push_back(fmt("t=%zu ", t) + msg);
      }
    }
  }
  g.seconds = seconds_since(t0);
  if (g.growth_ok) g.growth_detail = fmt("max N/bound %.3f, max H/bound %.3f", worst_n, worst_h);
  return g;
}

std::vector<GrownTree> grow_all() {
  std::vector<GrownTree> trees;
  for (auto stream : {Stream::uniform, Stream::constant, Stream::two_cluster}) {
    for (std::size_t d = 1; d <= 3; ++d) trees.push_back(grow(stream, d, 100000, 17 + d));
  }
  return trees;
}

std::string describe(const GrownTree& g) { return fmt("%s d=%zu", name_of(g.stream), g.dim); }

Outcome partition_geometry(const std::vector<GrownTree>& trees) {
  Outcome out;
  std::size_t nodes = 0;
  for (const auto& g : trees) {
    nodes += g.tree.node_count();
    if (auto msg = check_ranges(g.tree); !msg.empty()) {
      out.pass = false;
      out.detail += " [" + describe(g) + ": " + msg + "]";
    }
    for (const auto& f : g.structure_failures) {
      if (f.find("axis") != std::string::npos || f.find("diameter") != std::string::npos) {
        out.pass = false;
        out.detail += " [" + describe(g) + ": " + f + "]";
      }
    }
  }
  out.detail = fmt("%zu trees at T=1e5, %zu nodes checked", trees.size(), nodes) + out.detail;
  return out;
}

Outcome growth_bounds(const std::vector<GrownTree>& trees) {
  Outcome out;
  double slowest = 0.0;
  for (const auto& g : trees) {
    slowest = std::max(slowest, g.seconds);
    if (!g.growth_ok || g.seconds >= 10.0) out.pass = false;
    if (!g.growth_ok) out.detail += " [" + describe(g) + ": " + g.growth_detail + "]";
    if (g.seconds >= 10.0) out.detail += fmt(" [%s took %.2fs]", describe(g).c_str(), g.seconds);
  }
  std::string summary;
  for (const auto& g : trees) {
    if (g.growth_ok) summary += " " + describe(g) + ": " + g.growth_detail + ";";
  }
  out.detail = fmt("every step t<=1e5, slowest configuration %.2fs;", slowest) + summary + out.detail;
  return out;
}

Outcome inner_structure(const std::vector<GrownTree>& trees) {
  Outcome out;
  std::size_t checked = 0;
  for (const auto& g : trees) {
    checked += 3;
    if (auto msg = check_inner(g.tree); !msg.empty()) {
      out.pass = false;
      out.detail += " [" + describe(g) + ": " + msg + "]";
    }
    for (const auto& f : g.structure_failures) {
      if (f.find("inner") != std::string::npos) {
        out.pass = false;
        out.detail += " [" + describe(g) + ": " + f + "]";
      }
    }
  }
  out.detail = fmt("%zu trees checked at t=1e3, 1e4, 1e5", checked) + out.detail;
  return out;
}

// ---------------------------------------------------------------------------

double target(const std::vector<double>& x) {
  double s = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) s += std::sin(6.0 * x[j] + static_cast<double>(j));
  return 0.5 + 0.35 * s / static_cast<double>(x.size());
}

struct TreeRun {
  std::vector<double> x;  // row-major
  std::vector<double> y;
  std::vector<double> losses;
  std::vector<std::vector<double>> per_node;  // outcomes predicted by each node, by arena index
  std::vector<double> per_node_loss;
  std::size_t nodes = 0;
};

TreeRun run_tree(std::size_t d, std::size_t T, const LossSpec& spec, std::uint64_t seed) {
  Rng rng(seed);
  NestedEgTree tree(d, spec);
  TreeRun r;
  std::vector<double> x(d);
  for (std::size_t t = 0; t < T; ++t) {
    for (double& v : x) v = rng.uniform();
    const double y = std::clamp(target(x) + 0.3 * (rng.uniform() - 0.5), 0.0, 1.0);
    const auto p = tree.predict(x);
    const double l = ref::loss(spec, p.value, y);
    if (p.leaf.node >= r.per_node.size()) {
      r.per_node.resize(p.leaf.node + 1);
      r.per_node_loss.resize(p.leaf.node + 1, 0.0);
    }
    r.per_node[p.leaf.node].push_back(y);
    r.per_node_loss[p.leaf.node] += l;
    tree.update(p.leaf, p.value, y);
    r.x.insert(r.x.end(), x.begin(), x.end());
    r.y.push_back(y);
    r.losses.push_back(l);
  }
  r.nodes = tree.node_count();
  return r;
}

Outcome lipschitz_regret() {
  const std::size_t T = 10000;
  Outcome out;
  double worst_ratio = 0.0;
  double worst_decomp = 0.0;
  int runs = 0;
  int decomp_runs = 0;
  for (const auto& spec : kLosses) {
    const double m = lipschitz_constant(spec);
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      const auto r = run_tree(1, T, spec, 1000 + seed);
      double total = 0.0;
      for (double l : r.losses) total += l;
      const double constant = best_constant(r.y, spec).loss;
      for (double lip : {0.5, 1.0, 5.0}) {
        const auto fit = best_lipschitz_1d(r.x, r.y, lip, spec);
        // The fit must be feasible, its loss must match a direct recomputation,
        // and it may not be worse than the best constant, which is feasible.
        bool feasible = true;
        for (std::size_t i = 0; i + 1 < fit.knots.size(); ++i) {
          if (std::abs(fit.values[i + 1] - fit.values[i]) > lip * (fit.knots[i + 1] - fit.knots[i]) + 1e-12) {
            feasible = false;
          }
        }
        double recomputed = 0.0;
        for (std::size_t t = 0; t < T; ++t) {
          const auto it = std::lower_bound(fit.knots.begin(), fit.knots.end(), r.x[t]);
          recomputed += ref::loss(spec, fit.values[it - fit.knots.begin()], r.y[t]);
        }
        if (!feasible || std::abs(recomputed - fit.loss) > 1e-8 || fit.loss > constant + 1e-9) {
          out.pass = false;
          out.detail += fmt(" [%s seed %d L=%g: comparator inconsistent]", name_of(spec).c_str(),
                            static_cast<int>(seed), lip);
        }
        const double Td = static_cast<double>(T);
        const double bound = m * (3.0 + lip) * (std::sqrt(Td) + 2.0 * std::pow(3.0, 1.0 / 6.0) * std::pow(Td, 2.0 / 3.0));
        const double regret = total - fit.loss;
        worst_ratio = std::max(worst_ratio, regret / bound);
        ++runs;
        if (!(regret <= bound)) {
          out.pass = false;
          out.detail += fmt(" [%s seed %d L=%g regret %.6g > %.6g]", name_of(spec).c_str(), static_cast<int>(seed),
                            lip, regret, bound);
        }
      }
    }
  }

  // Per-node decomposition for every dimension.
  for (std::size_t d = 1; d <= 3; ++d) {
    for (const auto& spec : kLosses) {
      const double m = lipschitz_constant(spec);
      for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const auto r = run_tree(d, T, spec, 5000 + 100 * d + seed);
        double total = 0.0;
        for (double l : r.losses) total += l;
        double comparator = 0.0;
        bool oracle_ok = true;
        for (std::size_t k = 0; k < r.per_node.size(); ++k) {
          if (r.per_node[k].empty()) continue;
          const double best = checked_best_constant(r.per_node[k], spec, oracle_ok);
          comparator += best;
          const double node_bound =
              2.0 * m * std::sqrt(static_cast<double>(r.per_node[k].size()) * std::numbers::ln2);
          if (!(r.per_node_loss[k] - best < node_bound)) {
            out.pass = false;
            out.detail += fmt(" [d=%zu %s seed %d node %zu regret above its own bound]", d, name_of(spec).c_str(),
                              static_cast<int>(seed), k);
          }
        }
        const double bound = 3.0 * m * std::sqrt(static_cast<double>(r.nodes) * static_cast<double>(T));
        const double regret = total - comparator;
        worst_decomp = std::max(worst_decomp, regret / bound);
        ++decomp_runs;
        if (!oracle_ok || !(regret <= bound)) {
          out.pass = false;
          out.detail += fmt(" [d=%zu %s seed %d regret %.6g bound %.6g%s]", d, name_of(spec).c_str(),
                            static_cast<int>(seed), regret, bound, oracle_ok ? "" : ", oracle mismatch");
        }
      }
    }
  }
  out.detail = fmt("d=1: %d runs, max regret/bound %.4f; per-node: %d runs d=1..3, "
                   "max regret/bound %.4f",
                   runs, worst_ratio, decomp_runs, worst_decomp) +
               out.detail;
  return out;
}

// ---------------------------------------------------------------------------

struct MetaTrace {
  std::vector<double> prefix_avg;  // at the requested checkpoints
  std::vector<double> expert_regret;
  std::size_t d_next = 0;
  double worst_sum_error = 0.0;
  bool nonnegative = true;
  bool sizes_ok = true;
};

MetaTrace run_meta(const std::vector<double>& ys, const LossSpec& spec, const std::vector<std::size_t>& checkpoints) {
  MetaForecaster meta(spec, StartSchedule(ScheduleKind::powers_of_two));
  MetaTrace tr;
  std::vector<double> expert_loss;  // per expert, from its start
  std::vector<double> meta_loss;    // meta loss accumulated from each expert's start
  double cumulative = 0.0;
  std::size_t next_cp = 0;
  for (std::size_t i = 0; i < ys.size(); ++i) {
    const std::uint64_t t = i + 1;
    const double p = meta.predict();
    const double y = ys[i];
    const double l = ref::loss(spec, p, y);
    cumulative += l;
    // Experts active at t: those with 2^d <= t.
    std::size_t active = 0;
    while ((std::uint64_t{2} << active) <= t) ++active;
    const auto preds = meta.expert_predictions();
    if (preds.size() != active) tr.sizes_ok = false;
    if (active > 0) {
      const auto w = meta.weights();
      if (w.size() != active) tr.sizes_ok = false;
      double sum = 0.0;
      for (double v : w) {
        sum += v;
        if (!(v >= 0.0)) tr.nonnegative = false;
      }
      tr.worst_sum_error = std::max(tr.worst_sum_error, std::abs(sum - 1.0));
    }
    expert_loss.resize(std::max(expert_loss.size(), preds.size()), 0.0);
    meta_loss.resize(expert_loss.size(), 0.0);
    for (std::size_t d = 0; d < preds.size(); ++d) {
      expert_loss[d] += ref::loss(spec, preds[d], y);
      meta_loss[d] += l;
    }
    meta.update(y);
    if (next_cp < checkpoints.size() && t == checkpoints[next_cp]) {
      tr.prefix_avg.push_back(cumulative / static_cast<double>(t));
      ++next_cp;
    }
  }
  for (std::size_t d = 0; d < expert_loss.size(); ++d) tr.expert_regret.push_back(meta_loss[d] - expert_loss[d]);
  tr.d_next = meta.schedule().active_at(ys.size() + 1);
  return tr;
}

Outcome meta_regret() {
  const std::size_t T = 100000;
  Outcome out;
  std::size_t d_ref = 0;
  while ((std::uint64_t{2} << d_ref) <= T + 1) ++d_ref;
  const std::vector<std::pair<std::string, ProcessSpec>> sources = {
      {"markov", ProcessSpec{MarkovProcess{{0.25, 0.75}, {{0.9, 0.1}, {0.1, 0.9}}}, 11}},
      {"ar1", ProcessSpec{Ar1Process{0.8, 0.15}, 12}},
      {"iid", random_iid(13)},
  };
  double worst_ratio = -1e300;
  double worst_sum = 0.0;
  for (const auto& [label, process] : sources) {
    for (const auto& spec : {LossSpec::absolute(), LossSpec::square()}) {
      const auto ys = generate(process, T).values;
      const auto tr = run_meta(ys, spec, {});
      const std::string tag = label + "/" + name_of(spec);
      if (tr.d_next != d_ref) {
        out.pass = false;
        out.detail += fmt(" [%s: D_{T+1}=%zu, expected %zu]", tag.c_str(), tr.d_next, d_ref);
      }
      const double bound = std::sqrt(static_cast<double>(T) + 1.0) * std::log(static_cast<double>(tr.d_next));
      for (std::size_t d = 0; d < tr.expert_regret.size(); ++d) {
        worst_ratio = std::max(worst_ratio, tr.expert_regret[d] / bound);
        if (!(tr.expert_regret[d] <= bound)) {
          out.pass = false;
          out.detail += fmt(" [%s expert %zu regret %.6g > %.6g]", tag.c_str(), d + 1, tr.expert_regret[d], bound);
        }
      }
      worst_sum = std::max(worst_sum, tr.worst_sum_error);
      if (tr.worst_sum_error > 1e-12 || !tr.nonnegative || !tr.sizes_ok || tr.expert_regret.size() != d_ref) {
        out.pass = false;
        out.detail += fmt(" [%s: simplex error %.3g, nonnegative %d, pool sizes %d]", tag.c_str(), tr.worst_sum_error,
                          tr.nonnegative, tr.sizes_ok);
      }
    }
  }
  out.detail = fmt("T=1e5, D_{T+1}=%zu, 6 runs, max regret/bound %.4f, max |sum w - 1| %.3g", d_ref, worst_ratio,
                   worst_sum) +
               out.detail;
  return out;
}

// ---------------------------------------------------------------------------

// Two-state chain, absolute loss: from state s the best guess is the emission
// with conditional probability >= 1/2, and the expected loss is the smaller
// transition probability times the emission gap.
double two_state_l_star(double e0, double e1, double p01, double p10) {
  const double pi0 = p10 / (p01 + p10);
  const double gap = std::abs(e1 - e0);
  return pi0 * std::min(p01, 1.0 - p01) * gap + (1.0 - pi0) * std::min(p10, 1.0 - p10) * gap;
}

Outcome consistency() {
  const ProcessSpec base{MarkovProcess{{0.25, 0.75}, {{0.9, 0.1}, {0.1, 0.9}}}, 0};
  const double analytic = two_state_l_star(0.25, 0.75, 0.1, 0.1);
  const double lstar = l_star(base, LossSpec::absolute());
  Outcome out;
  if (std::abs(lstar - analytic) > 1e-12 || std::abs(analytic - 0.05) > 1e-15) {
    out.pass = false;
    out.detail += fmt(" [L* %.17g vs analytic %.17g]", lstar, analytic);
  }
  const std::vector<std::size_t> checkpoints = {1000, 10000, 100000};
  std::vector<double> mean(3, 0.0);
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    ProcessSpec p = base;
    p.seed = seed;
    const auto tr = run_meta(generate(p, 100000).values, LossSpec::absolute(), checkpoints);
    for (std::size_t k = 0; k < 3; ++k) mean[k] += tr.prefix_avg[k] / 10.0;
  }
  if (!(mean[1] <= mean[0] && mean[2] <= mean[1])) {
    out.pass = false;
    out.detail += " [average loss increases]";
  }
  if (!(std::abs(mean[2] - analytic) <= 0.05)) {
    out.pass = false;
    out.detail += " [T=1e5 average too far from L*]";
  }
  out.detail = fmt("L*=%.6g; mean average loss %.6f (1e3) %.6f (1e4) %.6f (1e5)", lstar, mean[0], mean[1], mean[2]) +
               out.detail;
  return out;
}

// ---------------------------------------------------------------------------

Outcome effective_range() {
  const std::size_t T = 10000;
  Outcome out;
  double worst_ratio = 0.0;
  int runs = 0;
  for (std::size_t d = 1; d <= 3; ++d) {
    for (const auto& spec : kLosses) {
      const double bound = 2.0 * lipschitz_constant(spec) * std::sqrt(static_cast<double>(T) * std::numbers::ln2);
      for (int source = 0; source < 3; ++source) {
        NestedEgTree tree(d, spec, true);
        std::vector<double> x(d);
        for (std::size_t j = 0; j < d; ++j) x[j] = 0.15 + 0.3 * static_cast<double>(j);
        const std::uint64_t seed = 300 + 10 * d + source;
        std::vector<double> fixed;
        if (source == 0) fixed = generate(random_iid(seed), T).values;
        if (source == 1) fixed = generate(random_markov(seed), T).values;
        Rng coin(seed);
        std::vector<double> ys;
        double total = 0.0;
        bool single = true;
        for (std::size_t t = 0; t < T; ++t) {
          const auto p = tree.predict(x);
          double y;
          if (!fixed.empty()) {
            y = fixed[t];
          } else if (p.value != 0.5) {
            y = p.value < 0.5 ? 1.0 : 0.0;
          } else {
            y = coin.uniform() < 0.5 ? 1.0 : 0.0;
          }
          total += ref::loss(spec, p.value, y);
          ys.push_back(y);
          tree.update(p.leaf, p.value, y);
          if (tree.node_count() != 1) single = false;
        }
        bool oracle_ok = true;
        const double regret = total - checked_best_constant(ys, spec, oracle_ok);
        worst_ratio = std::max(worst_ratio, regret / bound);
        ++runs;
        if (!single || !oracle_ok || !(regret < bound)) {
          out.pass = false;
          out.detail += fmt(" [d=%zu %s source %d: N=%zu regret %.6g bound %.6g]", d, name_of(spec).c_str(), source,
                            tree.node_count(), regret, bound);
        }
      }
    }
  }
  out.detail = fmt("%d runs at T=1e4, N=1 throughout, max regret/bound %.4f", runs, worst_ratio) + out.detail;
  return out;
}

// ---------------------------------------------------------------------------

Outcome oracle_consistency() {
  Outcome out;
  Rng rng(4242);

  // Constant oracle vs a 1e-4 grid.
  double worst_avg_gap = 0.0;
  int constant_failures = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto& base = kLosses[i % 3];
    const LossSpec spec = base.kind == LossKind::pinball ? LossSpec::pinball(0.05 + 0.9 * rng.uniform()) : base;
    const std::size_t n = 1 + static_cast<std::size_t>(rng.uniform() * 40);
    std::vector<double> ys(n);
    for (double& y : ys) y = rng.uniform() < 0.2 ? std::round(rng.uniform() * 4.0) / 4.0 : rng.uniform();
    const auto fit = best_constant(ys, spec);
    const auto grid = ref::grid_best_constant(spec, ys, 1e-4);
    const double gap = std::abs(grid.loss - fit.loss) / static_cast<double>(n);
    worst_avg_gap = std::max(worst_avg_gap, gap);
    bool ok = gap <= 1e-4 && fit.loss <= grid.loss + 1e-9;
    if (spec.kind == LossKind::square) ok = ok && std::abs(fit.argmin - grid.argmin) <= 1e-4;
    if (!ok) ++constant_failures;
  }
  if (constant_failures > 0) {
    out.pass = false;
    out.detail += fmt(" [%d constant-oracle mismatches]", constant_failures);
  }

  // Subgradients vs central differences away from the kink.
  double worst_fd = 0.0;
  for (int i = 0; i < 3000; ++i) {
    const auto& base = kLosses[i % 3];
    const LossSpec spec = base.kind == LossKind::pinball ? LossSpec::pinball(0.05 + 0.9 * rng.uniform()) : base;
    const double y = rng.uniform();
    double p = rng.uniform();
    if (std::abs(p - y) < 1e-3) continue;
    p = std::clamp(p, 1e-6, 1.0 - 1e-6);
    const double h = 1e-7;
    const double fd = (ref::loss(spec, p + h, y) - ref::loss(spec, p - h, y)) / (2.0 * h);
    worst_fd = std::max(worst_fd, std::abs(fd - subgradient(spec, p, y)));
  }
  if (worst_fd > 1e-6) {
    out.pass = false;
    out.detail += fmt(" [subgradient error %.3g]", worst_fd);
  }

  // Lipschitz chain vs grid dynamic programs on small instances. Aligned
  // instances have covariates on 0.1 steps, outcomes on 0.02 steps and window
  // radii that are multiples of 0.02, so a 0.02 grid contains an optimum
  // of the piecewise-linear losses. Arbitrary instances use a 0.002 grid.
  double worst_lip_gap = 0.0;
  int lip_failures = 0;
  const double aligned_l[] = {0.2, 0.4, 1.0, 2.0, 5.0};
  for (int i = 0; i < 300; ++i) {
    const bool aligned = i < 200;
    const auto& base = kLosses[i % 3];
    const LossSpec spec =
        base.kind == LossKind::pinball ? LossSpec::pinball(aligned ? 0.25 : 0.05 + 0.9 * rng.uniform()) : base;
    const std::size_t n = 1 + static_cast<std::size_t>(rng.uniform() * 6);
    std::vector<double> x(n), y(n);
    for (std::size_t k = 0; k < n; ++k) {
      x[k] = aligned ? std::floor(rng.uniform() * 11.0) / 10.0 : rng.uniform();
      y[k] = aligned ? std::floor(rng.uniform() * 51.0) / 50.0 : rng.uniform();
    }
    const double lip = aligned ? aligned_l[(i / 3) % 5] : 0.1 + 5.0 * rng.uniform();
    const double exact = best_lipschitz_1d(x, y, lip, spec).loss;
    const double step = aligned ? 0.02 : 0.002;
    const double grid = ref::grid_lipschitz(spec, x, y, lip, step);
    double gap = std::abs(grid - exact);
    bool ok = gap <= 2e-2 && exact <= grid + 1e-9;
    if (aligned && ref::group_by_x(x, y).size() <= 3) {
      const double enumerated = ref::enumerate_lipschitz(spec, x, y, lip, step);
      ok = ok && std::abs(enumerated - grid) <= 1e-9;
    }
    worst_lip_gap = std::max(worst_lip_gap, gap);
    if (!ok) ++lip_failures;
  }
  if (lip_failures > 0) {
    out.pass = false;
    out.detail += fmt(" [%d Lipschitz-oracle mismatches]", lip_failures);
  }
  out.detail = fmt("constant: 1000 instances, max average-loss gap %.3g; subgradient max error %.3g; "
                   "Lipschitz: 300 instances, max objective gap %.3g",
                   worst_avg_gap, worst_fd, worst_lip_gap) +
               out.detail;
  return out;
}

}  // namespace

int main() {
  int failures = 0;
  auto report = [&failures](int id, const char* title, const std::function<Outcome()>& fn) {
    const auto t0 = Clock::now();
    const Outcome o = fn();
    if (!o.pass) ++failures;
    std::printf("%s [%d] %s (%.1fs): %s\n", o.pass ? "PASS" : "FAIL", id, title, seconds_since(t0), o.detail.c_str());
    std::fflush(stdout);
  };

  report(1, "EG regret against the best constant", eg_regret);
  const auto t0 = Clock::now();
  const auto trees = grow_all();
  std::printf("(grew %zu trees to T=1e5 in %.1fs)\n", trees.size(), seconds_since(t0));
  report(2, "exact bin ranges and diameter bound", [&] { return partition_geometry(trees); });
  report(3, "node count and height growth at every step", [&] { return growth_bounds(trees); });
  report(4, "inner-node count and average inner depth", [&] { return inner_structure(trees); });
  report(5, "tree regret against Lipschitz and per-node comparators", lipschitz_regret);
  report(6, "meta regret against every active expert, weight simplex", meta_regret);
  report(7, "average loss approaches L* on a sticky Markov chain", consistency);
  report(8, "effective range on constant covariates", effective_range);
  report(9, "oracle self-consistency", oracle_consistency);
  std::printf("%d of 9 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
