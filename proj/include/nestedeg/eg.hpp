#pragma once

#include <cstdint>

#include "nestedeg/loss.hpp"

namespace nestedeg {

// Exponentially weighted average over the two constant experts 0 and 1,
// driven by the linearised (subgradient) losses. Tracks the best constant
// prediction in [0,1].
struct EgState {
  std::uint64_t steps = 0;           // completed observe-steps
  double cumulative_gradient = 0.0;  // sum of subgradients so far
  double lipschitz = 1.0;            // M

  friend bool operator==(const EgState&, const EgState&) = default;
};

// eta = M^-1 sqrt(log 2 / t) for the step t = steps + 1 about to be played.
double eg_learning_rate(const EgState& state);

// logistic(-eta * G), evaluated without overflow.
double eg_predict(const EgState& state);

// Returns the successor state after observing `outcome` for prediction `pred`.
EgState eg_update(const EgState& state, double pred, double outcome, const LossSpec& loss_spec);

// Stable logistic 1 / (1 + exp(-z)).
double logistic(double z);

// Stand-alone forecaster wrapping an EgState with its loss.
class EgForecaster {
 public:
  explicit EgForecaster(LossSpec loss_spec);

  double predict();
  void update(double outcome);

  const EgState& state() const { return state_; }
  const LossSpec& loss_spec() const { return loss_; }

 private:
  LossSpec loss_;
  EgState state_;
  double pending_ = 0.0;
  bool has_pending_ = false;
};

}  // namespace nestedeg
