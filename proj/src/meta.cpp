#include "nestedeg/meta.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "nestedeg/errors.hpp"

namespace nestedeg {

std::string_view to_string(ScheduleKind kind) {
  return kind == ScheduleKind::powers_of_two ? "powers_of_two" : "quadratic";
}

ScheduleKind schedule_kind_from_string(std::string_view name) {
  if (name == "powers_of_two") return ScheduleKind::powers_of_two;
  if (name == "quadratic") return ScheduleKind::quadratic;
  throw InputError("unknown schedule '" + std::string(name) + "'");
}

StartSchedule::StartSchedule(ScheduleKind kind, std::optional<std::size_t> max_experts)
    : kind_(kind), max_experts_(max_experts) {
  if (max_experts_ && *max_experts_ == 0) throw InputError("max_d must be >= 1");
}

std::optional<std::uint64_t> StartSchedule::start(std::size_t d) const {
  if (d == 0) throw InputError("expert index d starts at 1");
  if (max_experts_ && d > *max_experts_) return std::nullopt;
  if (kind_ == ScheduleKind::powers_of_two) {
    if (d >= 63) return std::nullopt;
    return std::uint64_t{1} << d;
  }
  if (d == 1) return 2;
  return static_cast<std::uint64_t>(d) * d + 1;
}

std::size_t StartSchedule::active_at(std::uint64_t t) const {
  std::size_t d = 0;
  while (true) {
    const auto s = start(d + 1);
    if (!s || *s > t) return d;
    ++d;
  }
}

FixedPastForecaster::FixedPastForecaster(std::size_t lag, std::uint64_t start, LossSpec loss_spec,
                                         bool effective_range)
    : lag_(lag), start_(start), tree_(lag, loss_spec, effective_range) {
  if (start_ < lag_ + 1) throw InputError("starting time must satisfy t_d >= d + 1");
}

double FixedPastForecaster::predict(std::span<const double> window) {
  pending_ = tree_.predict(window);
  return pending_.value;
}

void FixedPastForecaster::update(double outcome) { tree_.update(pending_.leaf, pending_.value, outcome); }

double meta_learning_rate(std::uint64_t t) { return 2.0 / std::sqrt(static_cast<double>(t)); }

void exponential_weight_update(std::vector<double>& log_weights, std::span<const double> losses,
                               double eta_now, double eta_next, std::size_t active_now,
                               std::size_t active_next) {
  if (log_weights.size() != active_now || losses.size() != active_now) {
    throw ContractError("weight update sizes disagree with the active expert count");
  }
  const double ratio = eta_next / eta_now;
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t d = 0; d < active_now; ++d) {
    log_weights[d] = ratio * log_weights[d] - eta_next * losses[d];
    top = std::max(top, log_weights[d]);
  }
  double sum = 0.0;
  for (double lw : log_weights) sum += std::exp(lw - top);
  const double log_norm = top + std::log(sum);
  const double rescale = std::log(static_cast<double>(active_now) / static_cast<double>(active_next));
  for (double& lw : log_weights) lw = lw - log_norm + rescale;
}

MetaForecaster::MetaForecaster(LossSpec loss_spec, StartSchedule schedule, bool effective_range)
    : loss_(loss_spec), schedule_(schedule), effective_range_(effective_range) {
  loss_.validate();
  const auto first = schedule_.start(1);
  if (!first || *first != 2) throw InputError("schedule must start with t_1 = 2");
}

double MetaForecaster::predict() {
  if (has_pending_) throw ContractError("predict called twice without update");
  has_pending_ = true;
  expert_predictions_.assign(experts_.size(), 0.0);
  if (experts_.empty()) return 0.5;

  double pred = 0.0;
  for (std::size_t k = 0; k < experts_.size(); ++k) {
    const std::size_t lag = experts_[k].lag();
    window_.assign(history_.end() - static_cast<std::ptrdiff_t>(lag), history_.end());
    expert_predictions_[k] = experts_[k].predict(window_);
    pred += std::exp(log_weights_[k]) * expert_predictions_[k];
  }
  return std::clamp(pred, 0.0, 1.0);
}

void MetaForecaster::update(double outcome) {
  if (!has_pending_) throw ContractError("update called without a preceding predict");
  if (!(outcome >= 0.0 && outcome <= 1.0)) {
    throw InputError("outcome must lie in [0,1], got " + std::to_string(outcome));
  }

  const std::size_t active_now = experts_.size();
  const auto next_start = schedule_.start(active_now + 1);
  const bool entrant = next_start && *next_start == t_ + 1;
  const std::size_t active_next = active_now + (entrant ? 1 : 0);

  if (active_now > 0) {
    // Barrier: every expert observes y_t before the weights move.
    std::vector<double> losses(active_now);
    for (std::size_t k = 0; k < active_now; ++k) {
      experts_[k].update(outcome);
      losses[k] = loss(loss_, expert_predictions_[k], outcome);
    }
    exponential_weight_update(log_weights_, losses, meta_learning_rate(t_), meta_learning_rate(t_ + 1),
                              active_now, active_next);
  }
  if (entrant) {
    experts_.emplace_back(active_next, *next_start, loss_, effective_range_);
    log_weights_.push_back(-std::log(static_cast<double>(active_next)));
  }

  history_.push_back(outcome);
  // The next entrant needs active_next + 1 lags.
  while (history_.size() > active_next + 1) history_.pop_front();
  ++t_;
  has_pending_ = false;
}

std::vector<double> MetaForecaster::weights() const {
  std::vector<double> w(log_weights_.size());
  std::transform(log_weights_.begin(), log_weights_.end(), w.begin(), [](double lw) { return std::exp(lw); });
  return w;
}

}  // namespace nestedeg
