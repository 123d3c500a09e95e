// Command-line front end. Uses only the C interface in nestedeg.h.
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "nestedeg/nestedeg.h"

using nlohmann::json;

namespace {

// 0: success and all requested checks hold
constexpr int kChecksFailed = 1;
constexpr int kError = 2;  // bad input, usage or I/O

struct Failure {
  std::string message;
};

void check(neg_status status, const char* what) {
  if (status != NEG_OK) throw Failure{std::string(what) + ": " + neg_last_error()};
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Failure{"cannot open " + path};
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json parse_file(const std::string& path) {
  try {
    return json::parse(slurp(path));
  } catch (const json::exception& e) {
    throw Failure{path + ": " + e.what()};
  }
}

std::string take(char* s) {
  std::string out = s ? s : "";
  neg_string_free(s);
  return out;
}

void emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text << "\n";
    return;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw Failure{"cannot write " + out_path};
  out << text << "\n";
}

struct LossOptions {
  std::string kind = "absolute";
  double alpha = 0.5;

  json to_json() const {
    json j{{"kind", kind}};
    if (kind == "pinball") j["alpha"] = alpha;
    return j;
  }
};

void add_loss_options(CLI::App* cmd, LossOptions& opts) {
  cmd->add_option("--loss", opts.kind, "absolute | square | pinball")->check(CLI::IsMember({"absolute", "square", "pinball"}));
  cmd->add_option("--alpha", opts.alpha, "pinball quantile level");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Nested EG forecasting: simulate, run, oracle, verify-bounds, report"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(neg_version()));

  // simulate
  auto* sim = app.add_subcommand("simulate", "Generate a series from a process spec");
  std::string sim_spec;
  std::string sim_out;
  std::size_t sim_length = 0;
  std::uint64_t sim_seed = 0;
  LossOptions sim_loss;
  sim->add_option("--spec", sim_spec, "process JSON file")->required();
  sim->add_option("--T", sim_length, "number of observations")->required();
  sim->add_option("--seed", sim_seed, "PRNG seed")->required();
  sim->add_option("--out", sim_out, "output CSV")->required();
  add_loss_options(sim, sim_loss);

  // run
  auto* run = app.add_subcommand("run", "Run a forecaster over a series or covariate CSV");
  std::string run_config;
  std::string run_input;
  std::string run_out;
  std::string run_restore;
  std::optional<std::uint64_t> run_seed;
  std::optional<std::string> run_kind;
  bool run_effective = false;
  run->add_option("--config", run_config, "config JSON file");
  run->add_option("--input", run_input, "input CSV")->required();
  run->add_option("--out", run_out, "output directory")->required();
  run->add_option("--seed", run_seed, "seed recorded in the log");
  run->add_option("--forecaster", run_kind, "eg | tree | meta")->check(CLI::IsMember({"eg", "tree", "meta"}));
  run->add_flag("--effective-range", run_effective, "split on the range of observed covariates");
  run->add_option("--restore", run_restore, "tree snapshot to resume from");

  // oracle
  auto* orc = app.add_subcommand("oracle", "Best comparator in hindsight");
  std::string orc_input;
  std::string orc_kind = "constant";
  std::string orc_config;
  std::string orc_out;
  std::size_t orc_bins = 1;
  double orc_lipschitz = 1.0;
  LossOptions orc_loss;
  orc->add_option("--input", orc_input, "input CSV")->required();
  orc->add_option("--kind", orc_kind, "constant | histogram | lipschitz")
      ->check(CLI::IsMember({"constant", "histogram", "lipschitz"}));
  orc->add_option("--bins", orc_bins, "number of histogram boxes (m^d)");
  orc->add_option("--L", orc_lipschitz, "Lipschitz constant");
  orc->add_option("--config", orc_config, "take the loss from a run config JSON");
  orc->add_option("--out", orc_out, "write the JSON result here instead of stdout");
  add_loss_options(orc, orc_loss);

  // verify-bounds
  auto* ver = app.add_subcommand("verify-bounds", "Check a run log against its regret and size bounds");
  std::string ver_run;
  std::string ver_out;
  std::vector<std::string> ver_oracles;
  std::vector<double> ver_lipschitz;
  ver->add_option("--run", ver_run, "run directory")->required();
  ver->add_option("--oracle", ver_oracles, "oracle result JSON files");
  ver->add_option("--lipschitz", ver_lipschitz, "Lipschitz constants to compare against");
  ver->add_option("--out", ver_out, "write the JSON report here instead of stdout");

  // report
  auto* rep = app.add_subcommand("report", "Aggregate run logs into tables and plot data");
  std::vector<std::string> rep_runs;
  std::string rep_out;
  rep->add_option("--runs", rep_runs, "run directories")->required();
  rep->add_option("--out", rep_out, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kError;
  }

  try {
    if (*sim) {
      const std::string spec = slurp(sim_spec);
      const std::string loss = sim_loss.to_json().dump();
      check(neg_simulate(spec.c_str(), sim_length, sim_seed, loss.c_str(), sim_out.c_str()), "simulate");
    } else if (*run) {
      json config = run_config.empty() ? json::object() : parse_file(run_config);
      if (run_kind) config["forecaster"] = *run_kind;
      if (run_seed) config["seed"] = *run_seed;
      if (run_effective) config["effective_range"] = true;
      const std::string text = config.dump();
      check(neg_run(text.c_str(), run_input.c_str(), run_out.c_str(), run_restore.empty() ? nullptr : run_restore.c_str()),
            "run");
    } else if (*orc) {
      json request{{"kind", orc_kind}, {"bins", orc_bins}, {"L", orc_lipschitz}, {"loss", orc_loss.to_json()}};
      if (!orc_config.empty()) {
        const json config = parse_file(orc_config);
        if (config.contains("loss")) request["loss"] = config.at("loss");
      }
      const std::string text = request.dump();
      char* result = nullptr;
      check(neg_oracle(orc_input.c_str(), text.c_str(), &result), "oracle");
      emit(take(result), orc_out);
    } else if (*ver) {
      std::vector<std::string> texts;
      for (const auto& path : ver_oracles) texts.push_back(slurp(path));
      std::vector<const char*> ptrs;
      for (const auto& t : texts) ptrs.push_back(t.c_str());
      char* report = nullptr;
      int passed = 0;
      check(neg_verify_bounds(ver_run.c_str(), ptrs.data(), ptrs.size(), ver_lipschitz.data(), ver_lipschitz.size(),
                              &report, &passed),
            "verify-bounds");
      emit(take(report), ver_out);
      if (!passed) {
        std::cerr << "verify-bounds: at least one check failed\n";
        return kChecksFailed;
      }
    } else if (*rep) {
      std::vector<const char*> ptrs;
      for (const auto& r : rep_runs) ptrs.push_back(r.c_str());
      check(neg_report(ptrs.data(), ptrs.size(), rep_out.c_str()), "report");
    }
  } catch (const Failure& f) {
    std::cerr << "error: " << f.message << "\n";
    return kError;
  }
  return 0;
}
