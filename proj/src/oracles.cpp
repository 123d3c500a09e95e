#include "nestedeg/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "nestedeg/errors.hpp"

namespace nestedeg {
namespace {

void check_series(std::span<const double> ys) {
  if (ys.empty()) throw InputError("oracle needs a nonempty outcome sequence");
  for (double y : ys) {
    if (!(y >= 0.0 && y <= 1.0)) throw InputError("outcome outside [0,1]: " + std::to_string(y));
  }
}

// Derivative of the cost-to-go restricted to [0,1]: D(f) = a + s f on [lo, hi).
struct Piece {
  double lo;
  double hi;
  double a;
  double s;
};

class ChainDerivative {
 public:
  ChainDerivative() { pieces_.push_back({0.0, 1.0, 0.0, 0.0}); }

  void add_loss(const LossSpec& spec, double y) {
    switch (spec.kind) {
      case LossKind::absolute:
        add_step(y, -1.0, 1.0);
        break;
      case LossKind::pinball:
        add_step(y, -spec.alpha, 1.0 - spec.alpha);
        break;
      case LossKind::square:
        for (auto& p : pieces_) {
          p.a -= 2.0 * y;
          p.s += 2.0;
        }
        break;
    }
  }

  // Lower argmin on [0,1] of the convex function whose right derivative is D.
  double argmin() const {
    for (const auto& p : pieces_) {
      if (p.a + p.s * p.lo >= 0.0) return p.lo;
      if (p.s > 0.0) {
        const double root = -p.a / p.s;
        if (root < p.hi) return std::max(root, p.lo);
      }
    }
    return 1.0;
  }

  // Replaces V by W(g) = min_{|f - g| <= c} V(f), given z = lower argmin of V.
  void window_min(double z, double c) {
    std::vector<Piece> out;
    out.reserve(pieces_.size() + 3);
    auto emit = [&out](double lo, double hi, double a, double s) {
      lo = std::max(lo, 0.0);
      hi = std::min(hi, 1.0);
      if (!(hi > lo)) return;
      if (!out.empty() && out.back().a == a && out.back().s == s) {
        out.back().hi = hi;
        return;
      }
      out.push_back({lo, hi, a, s});
    };
    for (const auto& p : pieces_) {
      if (p.lo < z) emit(p.lo - c, std::min(p.hi, z) - c, p.a + p.s * c, p.s);
    }
    emit(z - c, z + c, 0.0, 0.0);
    for (const auto& p : pieces_) {
      if (p.hi > z) emit(std::max(p.lo, z) + c, p.hi + c, p.a - p.s * c, p.s);
    }
    if (out.empty()) out.push_back({0.0, 1.0, 0.0, 0.0});
    out.front().lo = 0.0;
    out.back().hi = 1.0;
    pieces_ = std::move(out);
  }

 private:
  void add_step(double y, double left, double right) {
    std::vector<Piece> out;
    out.reserve(pieces_.size() + 1);
    for (const auto& p : pieces_) {
      if (p.hi <= y) {
        out.push_back({p.lo, p.hi, p.a + left, p.s});
      } else if (p.lo >= y) {
        out.push_back({p.lo, p.hi, p.a + right, p.s});
      } else {
        out.push_back({p.lo, y, p.a + left, p.s});
        out.push_back({y, p.hi, p.a + right, p.s});
      }
    }
    pieces_ = std::move(out);
  }

  std::vector<Piece> pieces_;
};

}  // namespace

double cumulative_constant_loss(std::span<const double> outcomes, double value, const LossSpec& loss_spec) {
  double total = 0.0;
  for (double y : outcomes) total += loss(loss_spec, value, y);
  return total;
}

ConstantFit best_constant(std::span<const double> outcomes, const LossSpec& loss_spec) {
  check_series(outcomes);
  loss_spec.validate();
  // Right derivative of the convex objective; nondecreasing in y.
  auto slope = [&](double y) {
    double d = 0.0;
    for (double o : outcomes) {
      switch (loss_spec.kind) {
        case LossKind::absolute:
          d += y >= o ? 1.0 : -1.0;
          break;
        case LossKind::square:
          d += 2.0 * (y - o);
          break;
        case LossKind::pinball:
          d += y >= o ? 1.0 - loss_spec.alpha : -loss_spec.alpha;
          break;
      }
    }
    return d;
  };
  // The lowest minimiser is inf{y : slope(y) >= 0}, clipped to [0,1].
  double lo = 0.0;
  double hi = 1.0;
  if (slope(0.0) >= 0.0) {
    hi = 0.0;
  } else {
    for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
      const double mid = lo + 0.5 * (hi - lo);
      if (mid <= lo || mid >= hi) break;
      (slope(mid) >= 0.0 ? hi : lo) = mid;
    }
  }
  // slope(lo) < 0, so the objective does not increase from lo to hi
  return ConstantFit{hi, cumulative_constant_loss(outcomes, hi, loss_spec)};
}

double best_histogram(std::span<const double> covariates, std::span<const double> outcomes,
                      std::size_t dim, std::size_t bins, const LossSpec& loss_spec) {
  check_series(outcomes);
  if (dim == 0) throw InputError("histogram dimension must be >= 1");
  if (covariates.size() != outcomes.size() * dim) throw InputError("covariate/outcome size mismatch");
  if (bins == 0) throw InputError("histogram needs at least one bin");
  const auto per_axis = static_cast<std::size_t>(std::llround(std::pow(static_cast<double>(bins), 1.0 / dim)));
  std::size_t check = 1;
  for (std::size_t j = 0; j < dim; ++j) check *= per_axis;
  if (per_axis == 0 || check != bins) {
    throw InputError("bins=" + std::to_string(bins) + " is not a " + std::to_string(dim) + "-th power");
  }

  std::vector<std::vector<double>> groups(bins);
  for (std::size_t t = 0; t < outcomes.size(); ++t) {
    std::size_t cell = 0;
    for (std::size_t j = 0; j < dim; ++j) {
      const double x = covariates[t * dim + j];
      if (!(x >= 0.0 && x <= 1.0)) throw InputError("covariate outside [0,1]");
      auto k = static_cast<std::size_t>(x * static_cast<double>(per_axis));
      k = std::min(k, per_axis - 1);
      cell = cell * per_axis + k;
    }
    groups[cell].push_back(outcomes[t]);
  }
  double total = 0.0;
  for (const auto& g : groups) {
    if (!g.empty()) total += best_constant(g, loss_spec).loss;
  }
  return total;
}

LipschitzFit best_lipschitz_1d(std::span<const double> covariates, std::span<const double> outcomes,
                               double lipschitz, const LossSpec& loss_spec) {
  check_series(outcomes);
  loss_spec.validate();
  if (covariates.size() != outcomes.size()) throw InputError("covariate/outcome size mismatch");
  if (!(lipschitz >= 0.0)) throw InputError("Lipschitz constant must be >= 0");
  for (double x : covariates) {
    if (!(x >= 0.0 && x <= 1.0)) throw InputError("covariate outside [0,1]");
  }

  std::vector<std::size_t> order(outcomes.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return covariates[a] < covariates[b]; });

  // Group equal covariates: group g covers order[starts[g] .. starts[g+1]).
  LipschitzFit fit;
  std::vector<std::size_t> starts;
  for (std::size_t k = 0; k < order.size(); ++k) {
    if (k == 0 || covariates[order[k]] != fit.knots.back()) {
      fit.knots.push_back(covariates[order[k]]);
      starts.push_back(k);
    }
  }
  starts.push_back(order.size());
  const std::size_t groups = fit.knots.size();

  // Forward pass: V_g = losses of group g + window-min of V_{g-1}.
  ChainDerivative derivative;
  std::vector<double> argmins(groups);
  for (std::size_t g = 0; g < groups; ++g) {
    for (std::size_t k = starts[g]; k < starts[g + 1]; ++k) derivative.add_loss(loss_spec, outcomes[order[k]]);
    argmins[g] = derivative.argmin();
    if (g + 1 < groups) {
      const double radius = lipschitz * (fit.knots[g + 1] - fit.knots[g]);
      derivative.window_min(argmins[g], std::isfinite(radius) ? radius : 2.0);
    }
  }

  // Backward pass: clamp each argmin into the window around its successor.
  fit.values.assign(groups, 0.0);
  fit.values[groups - 1] = argmins[groups - 1];
  for (std::size_t g = groups - 1; g-- > 0;) {
    const double radius = lipschitz * (fit.knots[g + 1] - fit.knots[g]);
    const double next = fit.values[g + 1];
    double v = argmins[g];
    if (std::isfinite(radius)) v = std::clamp(v, next - radius, next + radius);
    fit.values[g] = std::clamp(v, 0.0, 1.0);
  }

  for (std::size_t g = 0; g < groups; ++g) {
    for (std::size_t k = starts[g]; k < starts[g + 1]; ++k) {
      fit.loss += loss(loss_spec, fit.values[g], outcomes[order[k]]);
    }
  }
  return fit;
}

}  // namespace nestedeg
