#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>

#include <json.hpp>

#include "nestedeg/loss.hpp"
#include "nestedeg/meta.hpp"
#include "nestedeg/processes.hpp"
#include "nestedeg/tree.hpp"

namespace nestedeg {

enum class ForecasterKind { eg, tree, meta };

std::string_view to_string(ForecasterKind kind);
ForecasterKind forecaster_kind_from_string(std::string_view name);

// {"loss": {...}, "schedule": "...", "effective_range": bool, "max_d": int?}
// plus the forecaster kind and seed chosen on the command line.
struct RunConfig {
  LossSpec loss;
  ScheduleKind schedule = ScheduleKind::powers_of_two;
  bool effective_range = false;
  std::optional<std::size_t> max_d;
  ForecasterKind forecaster = ForecasterKind::meta;
  std::uint64_t seed = 0;

  StartSchedule start_schedule() const { return StartSchedule(schedule, max_d); }
};

// {"kind": "absolute"|"square"|"pinball", "alpha": number?}
nlohmann::json loss_to_json(const LossSpec& spec);
LossSpec loss_from_json(const nlohmann::json& j);

nlohmann::json config_to_json(const RunConfig& config);
// Reads loss/schedule/effective_range/max_d; forecaster and seed are optional.
RunConfig config_from_json(const nlohmann::json& j);

// iid:    {"kind":"iid", "values":[...], "probs":[...]}
// markov: {"kind":"markov", "emissions":[...], "transition":[[...],...]}
// ar1:    {"kind":"ar1", "a":number, "sigma":number}
// An optional "seed" is read into ProcessSpec::seed.
nlohmann::json process_to_json(const ProcessSpec& spec);
ProcessSpec process_from_json(const nlohmann::json& j);

// Node list with (h, i, bin, count, EgState) and child links.
nlohmann::json tree_to_json(const NestedEgTree& tree);
NestedEgTree tree_from_json(const nlohmann::json& j);

}  // namespace nestedeg
