#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "mwscm/harness.hpp"

namespace {

std::vector<std::size_t> parse_sweep(const std::string& spec) {
  // "1..10" or "1,2,4,8"
  auto range = spec.find("..");
  std::vector<std::size_t> values;
  if (range != std::string::npos) {
    std::size_t lo = std::stoull(spec.substr(0, range));
    std::size_t hi = std::stoull(spec.substr(range + 2));
    if (lo < 1 || hi < lo) throw mwscm::Error(mwscm::ErrorCode::ConfigError, "bad sweep " + spec);
    for (std::size_t v = lo; v <= hi; ++v) values.push_back(v);
    return values;
  }
  std::stringstream stream(spec);
  std::string field;
  while (std::getline(stream, field, ',')) {
    if (field.empty()) continue;
    values.push_back(std::stoull(field));
  }
  if (values.empty()) throw mwscm::Error(mwscm::ErrorCode::ConfigError, "empty sweep " + spec);
  return values;
}

std::vector<double> parse_fractions(const std::string& spec) {
  std::vector<double> values;
  std::stringstream stream(spec);
  std::string field;
  while (std::getline(stream, field, ',')) {
    if (field.empty()) continue;
    values.push_back(std::stod(field));
  }
  if (values.empty()) throw mwscm::Error(mwscm::ErrorCode::ConfigError, "empty fraction list");
  return values;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw mwscm::Error(mwscm::ErrorCode::ConfigError, "cannot write " + path);
  out << content;
}

void emit_csv(const std::string& csv, const std::string& out_path) {
  if (out_path.empty())
    std::cout << csv;
  else
    write_file(out_path, csv);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mobile Web service composition mediator harness"};
  app.require_subcommand(1);

  // scenario
  auto* scenario_cmd = app.add_subcommand("scenario", "run a scenario file on the simulator");
  std::string scenario_path;
  std::string trace_path = "trace.csv";
  std::string responses_path = "response.txt";
  std::string transport = "sim";
  std::uint16_t base_port = 19000;
  scenario_cmd->add_option("file", scenario_path, "scenario file")->required();
  scenario_cmd->add_option("--trace", trace_path, "trace CSV output path");
  scenario_cmd->add_option("--responses", responses_path, "response output path");
  scenario_cmd->add_option("--transport", transport, "sim or udp")
      ->check(CLI::IsMember({"sim", "udp"}));
  scenario_cmd->add_option("--base-port", base_port, "first TCP port for udp transport");

  // exp providers / exp tasks
  auto* exp_cmd = app.add_subcommand("exp", "cache-sweep experiments");
  exp_cmd->require_subcommand(1);

  std::string n_spec = "1..10";
  std::string t_spec = "1,2,4,8";
  std::string fractions_spec = "0,0.25,0.5,1.0";
  std::size_t tasks = 4;
  std::size_t providers = 5;
  std::size_t reps = 20;
  std::uint64_t seed = 42;
  std::uint32_t link_ms = 5;
  std::uint32_t fetch_ms = 50;
  std::string out_path;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--fractions", fractions_spec, "cache fractions, comma separated");
    cmd->add_option("--reps", reps, "repetitions per cell");
    cmd->add_option("--seed", seed, "rng seed");
    cmd->add_option("--link-ms", link_ms, "per-link latency (virtual ms)");
    cmd->add_option("--fetch-ms", fetch_ms, "description fetch latency (virtual ms)");
    cmd->add_option("--out", out_path, "CSV output path (stdout when omitted)");
  };

  auto* exp_providers = exp_cmd->add_subcommand("providers", "sweep the provider count");
  exp_providers->add_option("--n", n_spec, "provider sweep, e.g. 1..10 or 2,4,8");
  exp_providers->add_option("--tasks", tasks, "tasks per request");
  add_common(exp_providers);

  auto* exp_tasks = exp_cmd->add_subcommand("tasks", "sweep the task count");
  exp_tasks->add_option("--t", t_spec, "task sweep, e.g. 1,2,4,8");
  exp_tasks->add_option("--providers", providers, "provider count");
  add_common(exp_tasks);

  CLI11_PARSE(app, argc, argv);

  try {
    if (scenario_cmd->parsed()) {
      mwscm::ScenarioOptions options;
      options.transport =
          transport == "udp" ? mwscm::TransportKind::Udp : mwscm::TransportKind::Sim;
      options.base_port = base_port;
      mwscm::ScenarioOutcome outcome = mwscm::run_scenario_file(scenario_path, options);
      write_file(trace_path, outcome.trace_csv);
      write_file(responses_path, outcome.responses);
      std::cout << outcome.responses;
      return outcome.exit_code;
    }

    mwscm::ExperimentConfig config;
    config.tasks = tasks;
    config.providers = providers;
    config.cache_fractions = parse_fractions(fractions_spec);
    config.repetitions = reps;
    config.seed = seed;
    config.sim.link_latency_ms = link_ms;
    config.sim.description_fetch_latency_ms = fetch_ms;

    if (exp_providers->parsed()) {
      emit_csv(mwscm::experiment_providers_csv(config, parse_sweep(n_spec)), out_path);
      return 0;
    }
    if (exp_tasks->parsed()) {
      emit_csv(mwscm::experiment_tasks_csv(config, parse_sweep(t_spec)), out_path);
      return 0;
    }
  } catch (const mwscm::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
