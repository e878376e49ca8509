#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "mwscm/transport.hpp"

namespace mwscm {

enum class TransportKind { Sim, Udp };

struct ScenarioOptions {
  TransportKind transport = TransportKind::Sim;
  // udp mode rewrites sim:// endpoints to tcp://127.0.0.1:<base_port + k>
  std::uint16_t base_port = 19000;
};

struct ScenarioOutcome {
  int exit_code = 0;         // 0 ok, 1 when any request failed
  std::string responses;     // one response payload per request, newline-terminated
  std::string trace_csv;     // all requests' traces, one header
};

// Scenario files are line based ('#' comments allowed):
//   seed <n> | link-ms <n> | fetch-ms <n> | drop <p>     (before the first provider)
//   browse-ms <n> | cache-ttl-ms <n>                     (before the first provider)
//   taxonomy <path>
//   plan <path> | plandir <dir>
//   provider <description-path> <handlers-path> [ttl_s]  (declares and starts)
//   run-ms <n>
//   stop <service-name> | start <service-name>
//   request <format> <payload...>
// Paths are relative to the scenario file. Throws Error(ScenarioParseError)
// on malformed directives, unreadable files, or a request whose type has no
// loaded plan.
ScenarioOutcome run_scenario_file(const std::filesystem::path& path, ScenarioOptions options = {});
ScenarioOutcome run_scenario_text(std::string_view content, const std::filesystem::path& base_dir,
                                  ScenarioOptions options = {});

struct ExperimentConfig {
  std::size_t providers = 5;  // N: matched providers per task
  std::size_t tasks = 4;      // T: tasks per request
  std::vector<double> cache_fractions{0.0, 0.25, 0.5, 1.0};
  std::size_t repetitions = 20;
  SimConfig sim{};
  std::uint64_t seed = 42;
};

struct CellResult {
  double mean_ms = 0.0;
  double stddev_ms = 0.0;
};

// One experiment cell: N providers x T tasks at one cache fraction on a fresh
// simulator; one warm-up request, then `repetitions` measured requests.
// floor(fraction*T) leading tasks may use the Service Cache; the rest pay the
// full discovery cost every time. Throws Error(ConfigError).
CellResult run_experiment_cell(const ExperimentConfig& config, std::size_t n_providers,
                               std::size_t n_tasks, double fraction);

// CSV "setting,x,mean_ms,stddev_ms"; setting is the cache fraction, x is N
// (providers sweep) or T (tasks sweep).
std::string experiment_providers_csv(const ExperimentConfig& config,
                                     const std::vector<std::size_t>& n_values);
std::string experiment_tasks_csv(const ExperimentConfig& config,
                                 const std::vector<std::size_t>& t_values);

}  // namespace mwscm
