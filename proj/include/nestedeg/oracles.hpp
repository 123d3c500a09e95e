#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "nestedeg/loss.hpp"

namespace nestedeg {

// Offline comparators: the optimal cumulative loss of a class of predictors in
// hindsight. All inputs must lie in [0,1].

struct ConstantFit {
  double argmin = 0.5;
  double loss = 0.0;
};

// Sum of loss(value, y) over `outcomes`.
double cumulative_constant_loss(std::span<const double> outcomes, double value, const LossSpec& loss_spec);

// Minimises y -> sum_t loss(y, y_t) over [0,1] by bisection on the sign of the
// right derivative, down to adjacent doubles. Returns the lowest minimiser.
ConstantFit best_constant(std::span<const double> outcomes, const LossSpec& loss_spec);

// Sum of best constants over a uniform grid of `bins` equal boxes of [0,1]^d.
// `bins` must be m^d for an integer m >= 1. Covariates are row-major, dim
// values per outcome; a coordinate equal to 1 falls in the last box.
double best_histogram(std::span<const double> covariates, std::span<const double> outcomes,
                      std::size_t dim, std::size_t bins, const LossSpec& loss_spec);

struct LipschitzFit {
  double loss = 0.0;
  std::vector<double> knots;   // sorted distinct covariates
  std::vector<double> values;  // fitted f at each knot
};

/// Best L-Lipschitz predictor f: [0,1] -> [0,1] in hindsight (d = 1).
///
/// Solves min sum_t loss(f(x_t), y_t) subject to |f_i - f_{i+1}| <= L |x_i - x_{i+1}|
/// over the sorted distinct covariates. The program is a convex chain, solved
/// exactly by forward dynamic programming on the derivative of the
/// cost-to-go (a nondecreasing piecewise-affine function) followed by a
/// backward clamp pass. Duplicate covariates share one variable.
LipschitzFit best_lipschitz_1d(std::span<const double> covariates, std::span<const double> outcomes,
                               double lipschitz, const LossSpec& loss_spec);

}  // namespace nestedeg
