#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <variant>
#include <vector>

#include "nestedeg/loss.hpp"

namespace nestedeg {

/// Seeded generator with a platform-independent output stream.
///
/// Uses std::mt19937_64 (whose sequence is fixed by the standard) and derives
/// uniforms and normals with explicit formulas instead of the
/// implementation-defined <random> distributions, so CSV fixtures regenerate
/// bit-identically everywhere.
class Rng {
 public:
  static constexpr const char* kAlgorithm = "mt19937_64/u53/box-muller";

  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform on [0,1) with 53 random bits.
  double uniform();
  // Standard normal (Box-Muller, one draw per call).
  double normal();
  // Index drawn from a discrete distribution given its cumulative weights.
  std::size_t discrete(const std::vector<double>& cumulative);

 private:
  std::mt19937_64 engine_;
};

// i.i.d. draws from a finite distribution on [0,1].
struct IidProcess {
  std::vector<double> values;
  std::vector<double> probs;
};

// Order-1 Markov chain; the observation is the emission of the current state.
struct MarkovProcess {
  std::vector<double> emissions;
  std::vector<std::vector<double>> transition;  // row-stochastic
};

// Y_t = clip(1/2 + a (Y_{t-1} - 1/2) + sigma * eps_t) with eps_t ~ N(0,1).
struct Ar1Process {
  double a = 0.5;
  double sigma = 0.1;
};

struct ProcessSpec {
  std::variant<IidProcess, MarkovProcess, Ar1Process> model;
  std::uint64_t seed = 0;

  // Throws InputError on malformed or non-ergodic specifications.
  void validate() const;
};

struct GeneratedSeries {
  std::vector<double> values;
  double clip_rate = 0.0;  // fraction of AR(1) draws clipped to [0,1]
};

GeneratedSeries generate(const ProcessSpec& spec, std::size_t length);

// Irreducible and aperiodic (primitive transition matrix).
bool is_ergodic(const std::vector<std::vector<double>>& transition);

// Stationary distribution pi = pi P of an ergodic chain.
std::vector<double> stationary_distribution(const MarkovProcess& chain);

// Expected minimal loss given the infinite past. For a Markov chain with
// distinct emissions the past determines the current state, so
//   L* = sum_s pi(s) min_y E[loss(y, Y_1) | S_0 = s].
// Throws UnsupportedError for AR(1) and for chains with repeated emissions.
double l_star(const ProcessSpec& spec, const LossSpec& loss_spec);

// min_y sum_k w_k loss(y, v_k) for a finite distribution, solved exactly.
double min_expected_loss(const std::vector<double>& values, const std::vector<double>& weights,
                         const LossSpec& loss_spec);

}  // namespace nestedeg
