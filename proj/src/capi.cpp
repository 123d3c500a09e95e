#include "nestedeg/nestedeg.h"

#include <cstdlib>
#include <cstring>
#include <string>
#include <variant>

#include "nestedeg/config.hpp"
#include "nestedeg/eg.hpp"
#include "nestedeg/errors.hpp"
#include "nestedeg/harness.hpp"
#include "nestedeg/meta.hpp"
#include "nestedeg/oracles.hpp"
#include "nestedeg/processes.hpp"
#include "nestedeg/series_io.hpp"
#include "nestedeg/tree.hpp"

using nlohmann::json;
using namespace nestedeg;

namespace {

thread_local std::string g_last_error;

struct TreeSlot {
  NestedEgTree tree;
  std::optional<TreePrediction> pending;
};

template <typename F>
neg_status guarded(F&& body) {
  try {
    body();
    g_last_error.clear();
    return NEG_OK;
  } catch (const ContractError& e) {
    g_last_error = e.what();
    return NEG_ERR_CONTRACT;
  } catch (const UnsupportedError& e) {
    g_last_error = e.what();
    return NEG_ERR_UNSUPPORTED;
  } catch (const IoError& e) {
    g_last_error = e.what();
    return NEG_ERR_IO;
  } catch (const InputError& e) {
    g_last_error = e.what();
    return NEG_ERR_INVALID_ARGUMENT;
  } catch (const json::exception& e) {
    g_last_error = std::string("invalid JSON: ") + e.what();
    return NEG_ERR_INVALID_ARGUMENT;
  } catch (const std::filesystem::filesystem_error& e) {
    g_last_error = e.what();
    return NEG_ERR_IO;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return NEG_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return NEG_ERR_INTERNAL;
  }
}

void require(const void* p, const char* what) {
  if (p == nullptr) throw InputError(std::string(what) + " must not be NULL");
}

json parse_json(const char* text, const char* what) {
  require(text, what);
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw InputError(std::string(what) + ": " + e.what());
  }
}

LossSpec parse_loss(const char* loss_json) {
  auto spec = loss_from_json(parse_json(loss_json, "loss_json"));
  spec.validate();
  return spec;
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

}  // namespace

struct neg_forecaster {
  std::variant<EgForecaster, TreeSlot, MetaForecaster> impl;
};

extern "C" {

const char* neg_last_error(void) { return g_last_error.c_str(); }

const char* neg_version(void) { return "1.0.0"; }

void neg_string_free(char* s) { std::free(s); }

neg_status neg_loss_eval(const char* loss_json, double prediction, double outcome, double* out) {
  return guarded([&] {
    require(out, "out");
    *out = loss(parse_loss(loss_json), prediction, outcome);
  });
}

neg_status neg_loss_subgradient(const char* loss_json, double prediction, double outcome, double* out) {
  return guarded([&] {
    require(out, "out");
    *out = subgradient(parse_loss(loss_json), prediction, outcome);
  });
}

neg_status neg_forecaster_create(const char* config_json, const char* kind, size_t dim, neg_forecaster** out) {
  return guarded([&] {
    require(out, "out");
    require(kind, "kind");
    const RunConfig config = config_from_json(parse_json(config_json, "config_json"));
    config.loss.validate();
    switch (forecaster_kind_from_string(kind)) {
      case ForecasterKind::eg:
        *out = new neg_forecaster{EgForecaster(config.loss)};
        break;
      case ForecasterKind::tree:
        if (dim == 0) throw InputError("tree forecaster needs dim >= 1");
        *out = new neg_forecaster{TreeSlot{NestedEgTree(dim, config.loss, config.effective_range), std::nullopt}};
        break;
      case ForecasterKind::meta:
        *out = new neg_forecaster{MetaForecaster(config.loss, config.start_schedule(), config.effective_range)};
        break;
    }
  });
}

neg_status neg_forecaster_predict(neg_forecaster* f, const double* x, size_t dim, double* out) {
  return guarded([&] {
    require(f, "forecaster");
    require(out, "out");
    if (auto* slot = std::get_if<TreeSlot>(&f->impl)) {
      if (dim != slot->tree.dim()) throw InputError("covariate dimension does not match the tree");
      require(x, "x");
      const auto pred = slot->tree.predict(std::span<const double>(x, dim));
      slot->pending = pred;
      *out = pred.value;
    } else if (auto* eg = std::get_if<EgForecaster>(&f->impl)) {
      *out = eg->predict();
    } else {
      *out = std::get<MetaForecaster>(f->impl).predict();
    }
  });
}

neg_status neg_forecaster_update(neg_forecaster* f, double outcome) {
  return guarded([&] {
    require(f, "forecaster");
    if (auto* slot = std::get_if<TreeSlot>(&f->impl)) {
      if (!slot->pending) throw ContractError("update called without a preceding predict");
      slot->tree.update(slot->pending->leaf, slot->pending->value, outcome);
      slot->pending.reset();
    } else if (auto* eg = std::get_if<EgForecaster>(&f->impl)) {
      eg->update(outcome);
    } else {
      std::get<MetaForecaster>(f->impl).update(outcome);
    }
  });
}

neg_status neg_forecaster_stats(const neg_forecaster* f, size_t* nodes, uint32_t* height, uint64_t* steps) {
  return guarded([&] {
    require(f, "forecaster");
    size_t n = 1;
    uint32_t h = 0;
    uint64_t s = 0;
    if (const auto* slot = std::get_if<TreeSlot>(&f->impl)) {
      n = slot->tree.node_count();
      h = slot->tree.height();
      s = slot->tree.steps();
    } else if (const auto* eg = std::get_if<EgForecaster>(&f->impl)) {
      s = eg->state().steps;
    } else {
      const auto& meta = std::get<MetaForecaster>(f->impl);
      n = 0;
      for (std::size_t d = 1; d <= meta.active(); ++d) {
        n += meta.expert(d).tree().node_count();
        h = std::max(h, meta.expert(d).tree().height());
      }
      s = meta.step() - 1;
    }
    if (nodes) *nodes = n;
    if (height) *height = h;
    if (steps) *steps = s;
  });
}

neg_status neg_forecaster_snapshot(const neg_forecaster* f, char** json_out) {
  return guarded([&] {
    require(f, "forecaster");
    require(json_out, "json_out");
    const auto* slot = std::get_if<TreeSlot>(&f->impl);
    if (slot == nullptr) throw UnsupportedError("snapshots are available for tree forecasters only");
    *json_out = dup_string(tree_to_json(slot->tree).dump());
  });
}

neg_status neg_forecaster_restore(const char* snapshot_json, neg_forecaster** out) {
  return guarded([&] {
    require(out, "out");
    *out = new neg_forecaster{TreeSlot{tree_from_json(parse_json(snapshot_json, "snapshot_json")), std::nullopt}};
  });
}

void neg_forecaster_destroy(neg_forecaster* f) { delete f; }

neg_status neg_simulate(const char* process_json, size_t length, uint64_t seed, const char* loss_json,
                        const char* out_csv) {
  return guarded([&] {
    require(out_csv, "out_csv");
    ProcessSpec spec = process_from_json(parse_json(process_json, "process_json"));
    spec.seed = seed;
    spec.validate();
    const LossSpec loss_spec = loss_json ? parse_loss(loss_json) : LossSpec::absolute();
    const auto series = generate(spec, length);
    json meta{{"process", process_to_json(spec)},
              {"seed", seed},
              {"T", length},
              {"prng", Rng::kAlgorithm},
              {"clip_rate", series.clip_rate},
              {"l_star_loss", loss_to_json(loss_spec)}};
    try {
      meta["l_star"] = l_star(spec, loss_spec);
    } catch (const UnsupportedError& e) {
      meta["l_star"] = nullptr;
      meta["l_star_note"] = e.what();
    }
    write_series_csv(out_csv, series.values);
    write_text_file(sidecar_path(out_csv), meta.dump(2) + "\n");
  });
}

neg_status neg_lstar(const char* process_json, const char* loss_json, double* out) {
  return guarded([&] {
    require(out, "out");
    ProcessSpec spec = process_from_json(parse_json(process_json, "process_json"));
    spec.validate();
    *out = l_star(spec, parse_loss(loss_json));
  });
}

neg_status neg_oracle(const char* input_csv, const char* request_json, char** result_json) {
  return guarded([&] {
    require(input_csv, "input_csv");
    require(result_json, "result_json");
    const json req = parse_json(request_json, "request_json");
    OracleRequest request;
    request.kind = req.value("kind", std::string("constant"));
    request.loss = req.contains("loss") ? loss_from_json(req.at("loss")) : LossSpec::absolute();
    request.loss.validate();
    request.bins = req.value("bins", std::size_t{1});
    request.lipschitz = req.value("L", 1.0);
    const auto data = read_series_csv(input_csv);
    *result_json = dup_string(oracle_to_json(evaluate_oracle(data, request)).dump(2));
  });
}

neg_status neg_run(const char* config_json, const char* input_csv, const char* out_dir, const char* restore_path) {
  return guarded([&] {
    require(input_csv, "input_csv");
    require(out_dir, "out_dir");
    const RunConfig config = config_from_json(parse_json(config_json, "config_json"));
    const auto data = read_series_csv(input_csv);
    std::optional<NestedEgTree> initial;
    if (restore_path != nullptr) {
      if (config.forecaster != ForecasterKind::tree) throw InputError("--restore applies to tree runs only");
      initial = tree_from_json(parse_json(read_text_file(restore_path).c_str(), "snapshot"));
    }
    const RunLog log = run_forecaster(config, data, std::move(initial));
    std::filesystem::create_directories(out_dir);
    write_run(log, out_dir);
  });
}

neg_status neg_verify_bounds(const char* run_dir, const char* const* oracle_jsons, size_t n_oracles,
                             const double* lipschitz, size_t n_lipschitz, char** report_json, int* all_passed_out) {
  return guarded([&] {
    require(run_dir, "run_dir");
    if (n_oracles > 0) require(oracle_jsons, "oracle_jsons");
    if (n_lipschitz > 0) require(lipschitz, "lipschitz");
    const RunLog log = read_run(run_dir);
    std::vector<OracleResult> oracles;
    for (size_t k = 0; k < n_oracles; ++k) oracles.push_back(oracle_from_json(parse_json(oracle_jsons[k], "oracle")));
    VerifyOptions options;
    options.lipschitz.assign(lipschitz, lipschitz + n_lipschitz);
    const auto checks = verify_bounds(log, oracles, options);
    if (report_json) *report_json = dup_string(checks_to_json(checks).dump(2));
    if (all_passed_out) *all_passed_out = all_passed(checks) ? 1 : 0;
  });
}

neg_status neg_report(const char* const* run_dirs, size_t n_runs, const char* out_dir) {
  return guarded([&] {
    require(out_dir, "out_dir");
    if (n_runs > 0) require(run_dirs, "run_dirs");
    std::vector<RunLog> logs;
    std::vector<std::string> names;
    for (size_t k = 0; k < n_runs; ++k) {
      require(run_dirs[k], "run_dirs entry");
      logs.push_back(read_run(run_dirs[k]));
      names.push_back(std::filesystem::path(run_dirs[k]).lexically_normal().filename().string());
      if (names.back().empty()) names.back() = std::filesystem::path(run_dirs[k]).parent_path().filename().string();
    }
    write_report(logs, names, out_dir);
  });
}

}  // extern "C"
