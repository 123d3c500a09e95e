#include "nestedeg/loss.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "nestedeg/errors.hpp"

namespace nestedeg {
namespace {

void check_unit(double v, const char* what) {
  if (!(v >= 0.0 && v <= 1.0)) {
    throw InputError(std::string(what) + " must lie in [0,1], got " + std::to_string(v));
  }
}

}  // namespace

void LossSpec::validate() const {
  if (kind == LossKind::pinball && !(alpha > 0.0 && alpha < 1.0)) {
    throw InputError("pinball alpha must lie in (0,1), got " + std::to_string(alpha));
  }
}

std::string_view to_string(LossKind kind) {
  switch (kind) {
    case LossKind::absolute:
      return "absolute";
    case LossKind::square:
      return "square";
    case LossKind::pinball:
      return "pinball";
  }
  return "unknown";
}

LossKind loss_kind_from_string(std::string_view name) {
  if (name == "absolute") return LossKind::absolute;
  if (name == "square") return LossKind::square;
  if (name == "pinball") return LossKind::pinball;
  throw InputError("unknown loss kind '" + std::string(name) + "'");
}

double loss(const LossSpec& spec, double pred, double outcome) {
  check_unit(pred, "prediction");
  check_unit(outcome, "outcome");
  if (spec.kind == LossKind::pinball) spec.validate();
  const double residual = outcome - pred;
  switch (spec.kind) {
    case LossKind::absolute:
      return std::abs(residual);
    case LossKind::square:
      return residual * residual;
    case LossKind::pinball:
      // Check loss rho_alpha(outcome - pred); nonnegative on both sides.
      return residual >= 0.0 ? spec.alpha * residual : (spec.alpha - 1.0) * residual;
  }
  return 0.0;
}

double subgradient(const LossSpec& spec, double pred, double outcome) {
  check_unit(pred, "prediction");
  check_unit(outcome, "outcome");
  if (spec.kind == LossKind::pinball) spec.validate();
  switch (spec.kind) {
    case LossKind::absolute:
      if (pred > outcome) return 1.0;
      if (pred < outcome) return -1.0;
      return 0.0;
    case LossKind::square:
      return 2.0 * (pred - outcome);
    case LossKind::pinball:
      if (pred > outcome) return 1.0 - spec.alpha;
      if (pred < outcome) return -spec.alpha;
      return 0.0;
  }
  return 0.0;
}

double lipschitz_constant(const LossSpec& spec) {
  switch (spec.kind) {
    case LossKind::absolute:
      return 1.0;
    case LossKind::square:
      return 2.0;
    case LossKind::pinball:
      return std::max(spec.alpha, 1.0 - spec.alpha);
  }
  return 1.0;
}

}  // namespace nestedeg
