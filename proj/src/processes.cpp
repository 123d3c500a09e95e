#include "nestedeg/processes.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "nestedeg/errors.hpp"

namespace nestedeg {
namespace {

constexpr double kStochasticTol = 1e-12;

void check_distribution(const std::vector<double>& probs, const char* what) {
  double sum = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0)) throw InputError(std::string(what) + " has a negative probability");
    sum += p;
  }
  if (std::abs(sum - 1.0) > kStochasticTol) {
    throw InputError(std::string(what) + " does not sum to 1 (sum = " + std::to_string(sum) + ")");
  }
}

void check_unit_values(const std::vector<double>& values, const char* what) {
  if (values.empty()) throw InputError(std::string(what) + " must be nonempty");
  for (double v : values) {
    if (!(v >= 0.0 && v <= 1.0)) throw InputError(std::string(what) + " must lie in [0,1]");
  }
}

std::vector<double> cumulative(const std::vector<double>& probs) {
  std::vector<double> c(probs.size());
  double acc = 0.0;
  for (std::size_t k = 0; k < probs.size(); ++k) {
    acc += probs[k];
    c[k] = acc;
  }
  return c;
}

struct Validator {
  void operator()(const IidProcess& p) const {
    check_unit_values(p.values, "iid support");
    if (p.values.size() != p.probs.size()) throw InputError("iid values and probs differ in length");
    check_distribution(p.probs, "iid probs");
  }
  void operator()(const MarkovProcess& p) const {
    check_unit_values(p.emissions, "markov emissions");
    if (p.transition.size() != p.emissions.size()) throw InputError("transition matrix size mismatch");
    for (const auto& row : p.transition) {
      if (row.size() != p.emissions.size()) throw InputError("transition matrix must be square");
      check_distribution(row, "transition row");
    }
    if (!is_ergodic(p.transition)) throw InputError("transition matrix is not irreducible and aperiodic");
  }
  void operator()(const Ar1Process& p) const {
    if (!(p.a >= 0.0 && p.a < 1.0)) throw InputError("ar1 coefficient must lie in [0,1)");
    if (!(p.sigma >= 0.0)) throw InputError("ar1 sigma must be >= 0");
  }
};

}  // namespace

double Rng::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

double Rng::normal() {
  // 1 - u lies in (0,1], so the log is finite.
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::size_t Rng::discrete(const std::vector<double>& cum) {
  const double u = uniform() * cum.back();
  const auto it = std::upper_bound(cum.begin(), cum.end(), u);
  return std::min(static_cast<std::size_t>(it - cum.begin()), cum.size() - 1);
}

void ProcessSpec::validate() const { std::visit(Validator{}, model); }

bool is_ergodic(const std::vector<std::vector<double>>& transition) {
  // Primitive iff P^k > 0 entrywise for k = (n-1)^2 + 1 (Wielandt).
  const std::size_t n = transition.size();
  if (n == 0) return false;
  std::vector<std::vector<char>> support(n, std::vector<char>(n, 0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) support[i][j] = transition[i][j] > 0.0;
  }
  auto power = support;
  const std::size_t k = (n - 1) * (n - 1) + 1;
  for (std::size_t step = 1; step < k; ++step) {
    std::vector<std::vector<char>> next(n, std::vector<char>(n, 0));
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t m = 0; m < n; ++m) {
        if (!power[i][m]) continue;
        for (std::size_t j = 0; j < n; ++j) next[i][j] |= support[m][j];
      }
    }
    power = std::move(next);
  }
  for (const auto& row : power) {
    for (char c : row) {
      if (!c) return false;
    }
  }
  return true;
}

std::vector<double> stationary_distribution(const MarkovProcess& chain) {
  const auto n = static_cast<Eigen::Index>(chain.emissions.size());
  // Solve (P^T - I) pi = 0 with the last equation replaced by sum(pi) = 1.
  Eigen::MatrixXd a(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      a(i, j) = chain.transition[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)] - (i == j ? 1.0 : 0.0);
    }
  }
  a.row(n - 1).setOnes();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  rhs(n - 1) = 1.0;
  Eigen::VectorXd pi = a.fullPivLu().solve(rhs);
  // One polishing sweep of pi <- pi P.
  std::vector<double> out(static_cast<std::size_t>(n), 0.0);
  for (std::size_t i = 0; i < out.size(); ++i) {
    for (std::size_t j = 0; j < out.size(); ++j) out[j] += pi(static_cast<Eigen::Index>(i)) * chain.transition[i][j];
  }
  double sum = 0.0;
  for (double& p : out) {
    p = std::max(p, 0.0);
    sum += p;
  }
  for (double& p : out) p /= sum;
  return out;
}

GeneratedSeries generate(const ProcessSpec& spec, std::size_t length) {
  if (length == 0) throw InputError("series length must be >= 1");
  spec.validate();
  Rng rng(spec.seed);
  GeneratedSeries out;
  out.values.reserve(length);

  if (const auto* iid = std::get_if<IidProcess>(&spec.model)) {
    const auto cum = cumulative(iid->probs);
    for (std::size_t t = 0; t < length; ++t) out.values.push_back(iid->values[rng.discrete(cum)]);
  } else if (const auto* chain = std::get_if<MarkovProcess>(&spec.model)) {
    std::vector<std::vector<double>> rows;
    rows.reserve(chain->transition.size());
    for (const auto& row : chain->transition) rows.push_back(cumulative(row));
    std::size_t state = rng.discrete(cumulative(stationary_distribution(*chain)));
    for (std::size_t t = 0; t < length; ++t) {
      if (t > 0) state = rng.discrete(rows[state]);
      out.values.push_back(chain->emissions[state]);
    }
  } else {
    const auto& ar = std::get<Ar1Process>(spec.model);
    std::size_t clipped = 0;
    auto clip = [&clipped](double v) {
      if (v < 0.0 || v > 1.0) {
        ++clipped;
        return std::clamp(v, 0.0, 1.0);
      }
      return v;
    };
    // Start from the (unclipped) stationary law N(1/2, sigma^2 / (1 - a^2)).
    double y = clip(0.5 + ar.sigma / std::sqrt(1.0 - ar.a * ar.a) * rng.normal());
    for (std::size_t t = 0; t < length; ++t) {
      if (t > 0) y = clip(0.5 + ar.a * (y - 0.5) + ar.sigma * rng.normal());
      out.values.push_back(y);
    }
    out.clip_rate = static_cast<double>(clipped) / static_cast<double>(length);
  }
  return out;
}

double min_expected_loss(const std::vector<double>& values, const std::vector<double>& weights,
                         const LossSpec& loss_spec) {
  auto expected = [&](double y) {
    double e = 0.0;
    for (std::size_t k = 0; k < values.size(); ++k) e += weights[k] * loss(loss_spec, y, values[k]);
    return e;
  };
  if (loss_spec.kind == LossKind::square) {
    double mean = 0.0;
    double mass = 0.0;
    for (std::size_t k = 0; k < values.size(); ++k) {
      mean += weights[k] * values[k];
      mass += weights[k];
    }
    return expected(std::clamp(mean / mass, 0.0, 1.0));
  }
  // Piecewise-linear convex objective: the minimum sits on a support point.
  double best = std::numeric_limits<double>::infinity();
  for (double v : values) best = std::min(best, expected(v));
  return best;
}

double l_star(const ProcessSpec& spec, const LossSpec& loss_spec) {
  spec.validate();
  loss_spec.validate();
  if (const auto* iid = std::get_if<IidProcess>(&spec.model)) {
    return min_expected_loss(iid->values, iid->probs, loss_spec);
  }
  if (const auto* chain = std::get_if<MarkovProcess>(&spec.model)) {
    auto sorted = chain->emissions;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
      throw UnsupportedError("L* needs distinct emissions (hidden states are not identified by the past)");
    }
    const auto pi = stationary_distribution(*chain);
    double total = 0.0;
    for (std::size_t s = 0; s < pi.size(); ++s) {
      total += pi[s] * min_expected_loss(chain->emissions, chain->transition[s], loss_spec);
    }
    return total;
  }
  throw UnsupportedError("L* has no closed form for the AR(1) process");
}

}  // namespace nestedeg
