#pragma once

#include <string>
#include <string_view>

namespace nestedeg {

enum class LossKind { absolute, square, pinball };

/// A convex loss on [0,1]^2, M-Lipschitz in the prediction, with values in [0,1].
struct LossSpec {
  LossKind kind = LossKind::absolute;
  double alpha = 0.5;  // quantile level, pinball only

  static LossSpec absolute() { return {LossKind::absolute, 0.5}; }
  static LossSpec square() { return {LossKind::square, 0.5}; }
  static LossSpec pinball(double alpha) { return {LossKind::pinball, alpha}; }

  /// Throws InputError when alpha is outside (0,1) for the pinball loss.
  void validate() const;

  friend bool operator==(const LossSpec&, const LossSpec&) = default;
};

std::string_view to_string(LossKind kind);
LossKind loss_kind_from_string(std::string_view name);

/// loss(pred, outcome). Both arguments must lie in [0,1].
double loss(const LossSpec& spec, double pred, double outcome);

/// An element of the subdifferential of loss(., outcome) at pred. Returns 0 at
/// the kink of the absolute and pinball losses.
double subgradient(const LossSpec& spec, double pred, double outcome);

/// Uniform bound M on |subgradient| over the unit square.
double lipschitz_constant(const LossSpec& spec);

}  // namespace nestedeg
