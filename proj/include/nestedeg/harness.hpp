#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "nestedeg/config.hpp"
#include "nestedeg/series_io.hpp"
#include "nestedeg/tree.hpp"

namespace nestedeg {

struct StepRecord {
  std::uint64_t t = 0;
  std::vector<double> x;  // covariates of the step, empty for plain series
  double prediction = 0.5;
  double outcome = 0.0;
  double loss = 0.0;
  std::optional<NodeId> leaf;              // tree runs
  std::vector<double> expert_predictions;  // meta runs: f_{d,t}
  std::vector<double> weights;             // meta runs: p_{d,t}
  std::size_t nodes = 1;
  std::uint32_t height = 0;
};

struct RunLog {
  RunConfig config;
  std::size_t dim = 0;
  std::string data_digest;
  std::optional<double> l_star;
  std::vector<StepRecord> steps;
  double cumulative_loss = 0.0;
  nlohmann::json final_state;  // tree: node list; meta: per-expert sizes
  double wall_clock_seconds = 0.0;

  std::vector<double> outcomes() const;
  std::vector<double> covariates() const;
};

// Runs predict -> observe -> update for every row of `data`.
// `initial_tree` resumes a tree forecaster from a snapshot.
RunLog run_forecaster(const RunConfig& config, const SeriesData& data,
                      std::optional<NestedEgTree> initial_tree = std::nullopt);

// Writes steps.csv, summary.json and timing.json into `dir`. Outputs other
// than timing.json depend only on config and input.
void write_run(const RunLog& log, const std::filesystem::path& dir);
RunLog read_run(const std::filesystem::path& dir);

// Sum over t >= t_d of loss(meta) - loss(expert d) for a meta run.
// Throws InputError when expert d never became active.
double meta_regret_vs_expert(const RunLog& log, std::size_t d);

// Offline comparator evaluated on a data file. For a plain series the
// histogram and Lipschitz comparators use the lag-1 pairs (y_{t-1}, y_t).
struct OracleRequest {
  std::string kind = "constant";  // constant | histogram | lipschitz
  LossSpec loss;
  std::size_t bins = 1;
  double lipschitz = 1.0;
};

struct OracleResult {
  std::string kind;
  nlohmann::json params;
  double loss = 0.0;
  nlohmann::json argmin;  // null when not reported
  std::string data_digest;
};

OracleResult evaluate_oracle(const SeriesData& data, const OracleRequest& request);
nlohmann::json oracle_to_json(const OracleResult& result);
OracleResult oracle_from_json(const nlohmann::json& j);

struct BoundCheck {
  std::string name;
  double bound = 0.0;
  double achieved = 0.0;
  double slack = 0.0;  // bound - achieved
  bool pass = false;
};

struct VerifyOptions {
  std::vector<double> lipschitz;  // Lipschitz comparators computed internally
};

/// Evaluates every applicable regret / structure inequality on a run log.
/// Throws InputError for an empty log or when an oracle was computed on
/// different data (digest mismatch).
std::vector<BoundCheck> verify_bounds(const RunLog& log, std::span<const OracleResult> oracles,
                                      const VerifyOptions& options = {});
nlohmann::json checks_to_json(std::span<const BoundCheck> checks);
bool all_passed(std::span<const BoundCheck> checks);

// Aggregates replicate runs into summary tables and plot-ready CSVs.
void write_report(std::span<const RunLog> runs, std::span<const std::string> names,
                  const std::filesystem::path& out_dir);

}  // namespace nestedeg
