#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "nestedeg/loss.hpp"
#include "nestedeg/tree.hpp"

namespace nestedeg {

enum class ScheduleKind { powers_of_two, quadratic };

std::string_view to_string(ScheduleKind kind);
ScheduleKind schedule_kind_from_string(std::string_view name);

// Strictly increasing starting times t_1 = 2 < t_2 < ... with t_d >= d + 1.
//   powers_of_two: t_d = 2^d
//   quadratic:     t_1 = 2, t_d = d^2 + 1
// An optional cap limits the pool to max_experts forecasters.
class StartSchedule {
 public:
  explicit StartSchedule(ScheduleKind kind = ScheduleKind::powers_of_two,
                         std::optional<std::size_t> max_experts = std::nullopt);

  ScheduleKind kind() const { return kind_; }
  std::optional<std::size_t> max_experts() const { return max_experts_; }

  // t_d for d >= 1; nullopt when d exceeds the cap.
  std::optional<std::uint64_t> start(std::size_t d) const;

  // D_t = sup{d : t_d <= t} (0 when t < t_1).
  std::size_t active_at(std::uint64_t t) const;

 private:
  ScheduleKind kind_;
  std::optional<std::size_t> max_experts_;
};

// A_d: nested EG tree fed with the lag window (y_{t-d}, ..., y_{t-1}),
// oldest first, from its starting time on.
class FixedPastForecaster {
 public:
  FixedPastForecaster(std::size_t lag, std::uint64_t start, LossSpec loss_spec, bool effective_range);

  std::size_t lag() const { return lag_; }
  std::uint64_t start() const { return start_; }
  const NestedEgTree& tree() const { return tree_; }

  double predict(std::span<const double> window);
  void update(double outcome);

 private:
  std::size_t lag_;
  std::uint64_t start_;
  NestedEgTree tree_;
  TreePrediction pending_;
};

// One exponential-weights step in the log domain:
//   log p_{d,t+1} = (eta_next/eta_now) log p_{d,t} - eta_next * loss_d
//                   - log sum_k exp(...) + log(active_now / active_next)
// Updates `log_weights` (size active_now) in place.
void exponential_weight_update(std::vector<double>& log_weights, std::span<const double> losses,
                               double eta_now, double eta_next, std::size_t active_now,
                               std::size_t active_next);

// Learning rate eta_t = 2 / sqrt(t).
double meta_learning_rate(std::uint64_t t);

/// Exponentially weighted aggregation of the growing pool A_1, A_2, ...
/// Before t_1 it predicts 1/2. Expert d joins at t_d with weight 1/D_{t_d}.
class MetaForecaster {
 public:
  MetaForecaster(LossSpec loss_spec, StartSchedule schedule, bool effective_range = false);

  // Prediction for the current step t (1-based).
  double predict();
  void update(double outcome);

  std::uint64_t step() const { return t_; }
  std::size_t active() const { return experts_.size(); }
  const StartSchedule& schedule() const { return schedule_; }
  const LossSpec& loss_spec() const { return loss_; }

  // Weights p_{d,t} used by the last prediction (or current, if none pending).
  std::vector<double> weights() const;
  std::span<const double> expert_predictions() const { return expert_predictions_; }
  const FixedPastForecaster& expert(std::size_t d) const { return experts_.at(d - 1); }

 private:
  LossSpec loss_;
  StartSchedule schedule_;
  bool effective_range_;
  std::uint64_t t_ = 1;
  std::vector<FixedPastForecaster> experts_;
  std::vector<double> log_weights_;
  std::deque<double> history_;  // most recent observations, newest last
  std::vector<double> expert_predictions_;
  std::vector<double> window_;
  bool has_pending_ = false;
};

}  // namespace nestedeg
