#include "nestedeg/eg.hpp"

#include <cmath>
#include <numbers>

#include "nestedeg/errors.hpp"

namespace nestedeg {

double logistic(double z) {
  if (z >= 0.0) {
    return 1.0 / (1.0 + std::exp(-z));
  }
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double eg_learning_rate(const EgState& state) {
  const double t = static_cast<double>(state.steps + 1);
  return std::sqrt(std::numbers::ln2 / t) / state.lipschitz;
}

double eg_predict(const EgState& state) {
  return logistic(-eg_learning_rate(state) * state.cumulative_gradient);
}

EgState eg_update(const EgState& state, double pred, double outcome, const LossSpec& loss_spec) {
  EgState next = state;
  next.cumulative_gradient += subgradient(loss_spec, pred, outcome);
  next.steps += 1;
  return next;
}

EgForecaster::EgForecaster(LossSpec loss_spec) : loss_(loss_spec) {
  loss_.validate();
  state_.lipschitz = lipschitz_constant(loss_);
}

double EgForecaster::predict() {
  pending_ = eg_predict(state_);
  has_pending_ = true;
  return pending_;
}

void EgForecaster::update(double outcome) {
  if (!has_pending_) {
    throw ContractError("EgForecaster::update called without a preceding predict");
  }
  state_ = eg_update(state_, pending_, outcome, loss_);
  has_pending_ = false;
}

}  // namespace nestedeg
