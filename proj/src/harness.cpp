#include "mwscm/harness.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>
#include <thread>

#include "mwscm/host.hpp"
#include "mwscm/provider.hpp"
#include "mwscm/transport_udp.hpp"
#include "text.hpp"

namespace mwscm {

namespace {

[[noreturn]] void scenario_fail(std::size_t line_no, const std::string& what) {
  throw Error(ErrorCode::ScenarioParseError, "line " + std::to_string(line_no) + ": " + what);
}

std::string read_file_or_fail(const std::filesystem::path& path, std::size_t line_no) {
  std::ifstream in(path, std::ios::binary);
  if (!in) scenario_fail(line_no, "cannot read " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

template <typename T>
T parse_num_or_fail(std::string_view field, std::size_t line_no) {
  T out{};
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), out);
  if (ec != std::errc() || ptr != field.data() + field.size())
    scenario_fail(line_no, "bad number '" + std::string(field) + "'");
  return out;
}

struct Directive {
  enum class Kind { RunMs, Stop, Start, Request };
  Kind kind;
  std::size_t line_no = 0;
  std::uint64_t ms = 0;
  std::string name;
  ClientFormat format = ClientFormat::Urlencoded;
  std::string payload;
};

struct ParsedScenario {
  SimConfig sim;
  std::uint32_t browse_ms = 100;
  std::uint64_t cache_ttl_ms = 30'000;
  TaxonomyPtr taxonomy;
  std::vector<TaskOrganizationDocument> plans;
  std::vector<ProviderConfig> providers;
  std::vector<Directive> script;
};

ParsedScenario parse_scenario(std::string_view content, const std::filesystem::path& base_dir) {
  ParsedScenario scenario;
  bool config_frozen = false;
  std::size_t line_no = 0;

  for (auto raw_line : text::split(content, '\n')) {
    ++line_no;
    std::string_view line = raw_line;
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ' || line.back() == '\t'))
      line.remove_suffix(1);
    while (!line.empty() && (line.front() == ' ' || line.front() == '\t')) line.remove_prefix(1);
    if (line.empty() || line.front() == '#') continue;

    auto space = line.find(' ');
    std::string_view keyword = line.substr(0, space);
    std::string_view rest = space == std::string_view::npos ? std::string_view{}
                                                            : line.substr(space + 1);
    auto args = [&] {
      std::vector<std::string_view> out;
      for (auto field : text::split(rest, ' '))
        if (!field.empty()) out.push_back(field);
      return out;
    }();

    auto need_args = [&](std::size_t n) {
      if (args.size() != n)
        scenario_fail(line_no, std::string(keyword) + " takes " + std::to_string(n) + " argument(s)");
    };
    auto config_directive = [&] {
      if (config_frozen)
        scenario_fail(line_no, std::string(keyword) + " must precede the first provider");
    };

    if (keyword == "seed") {
      need_args(1);
      config_directive();
      scenario.sim.seed = parse_num_or_fail<std::uint64_t>(args[0], line_no);
    } else if (keyword == "link-ms") {
      need_args(1);
      config_directive();
      scenario.sim.link_latency_ms = parse_num_or_fail<std::uint32_t>(args[0], line_no);
    } else if (keyword == "fetch-ms") {
      need_args(1);
      config_directive();
      scenario.sim.description_fetch_latency_ms = parse_num_or_fail<std::uint32_t>(args[0], line_no);
    } else if (keyword == "drop") {
      need_args(1);
      config_directive();
      double p = 0;
      auto [ptr, ec] = std::from_chars(args[0].data(), args[0].data() + args[0].size(), p);
      if (ec != std::errc() || ptr != args[0].data() + args[0].size())
        scenario_fail(line_no, "bad probability");
      scenario.sim.drop_probability = p;
    } else if (keyword == "browse-ms") {
      need_args(1);
      config_directive();
      scenario.browse_ms = parse_num_or_fail<std::uint32_t>(args[0], line_no);
    } else if (keyword == "cache-ttl-ms") {
      need_args(1);
      config_directive();
      scenario.cache_ttl_ms = parse_num_or_fail<std::uint64_t>(args[0], line_no);
    } else if (keyword == "taxonomy") {
      need_args(1);
      if (scenario.taxonomy) scenario_fail(line_no, "taxonomy already declared");
      try {
        scenario.taxonomy = std::make_shared<OperationTaxonomy>(
            parse_taxonomy(read_file_or_fail(base_dir / args[0], line_no)));
      } catch (const Error& e) {
        scenario_fail(line_no, e.what());
      }
    } else if (keyword == "plan") {
      need_args(1);
      if (!scenario.taxonomy) scenario_fail(line_no, "taxonomy must come first");
      try {
        scenario.plans.push_back(parse_task_document(
            read_file_or_fail(base_dir / args[0], line_no), *scenario.taxonomy));
      } catch (const Error& e) {
        scenario_fail(line_no, e.what());
      }
    } else if (keyword == "plandir") {
      need_args(1);
      if (!scenario.taxonomy) scenario_fail(line_no, "taxonomy must come first");
      std::vector<std::filesystem::path> paths;
      std::error_code ec;
      for (const auto& entry : std::filesystem::directory_iterator(base_dir / args[0], ec))
        if (entry.is_regular_file() && entry.path().extension() == ".xml")
          paths.push_back(entry.path());
      if (ec) scenario_fail(line_no, "cannot read directory " + (base_dir / args[0]).string());
      std::sort(paths.begin(), paths.end());
      for (const auto& path : paths) {
        try {
          scenario.plans.push_back(
              parse_task_document(read_file_or_fail(path, line_no), *scenario.taxonomy));
        } catch (const Error& e) {
          scenario_fail(line_no, path.filename().string() + ": " + e.what());
        }
      }
    } else if (keyword == "provider") {
      if (args.size() != 2 && args.size() != 3) scenario_fail(line_no, "provider takes 2-3 arguments");
      if (!scenario.taxonomy) scenario_fail(line_no, "taxonomy must come first");
      config_frozen = true;
      try {
        ProviderConfig config =
            load_provider_config(base_dir / args[0], base_dir / args[1], *scenario.taxonomy);
        if (args.size() == 3)
          config.advertise_ttl_s = parse_num_or_fail<std::uint32_t>(args[2], line_no);
        scenario.providers.push_back(std::move(config));
      } catch (const Error& e) {
        scenario_fail(line_no, e.what());
      }
    } else if (keyword == "run-ms") {
      need_args(1);
      scenario.script.push_back(Directive{Directive::Kind::RunMs, line_no,
                                          parse_num_or_fail<std::uint64_t>(args[0], line_no),
                                          {}, ClientFormat::Urlencoded, {}});
    } else if (keyword == "stop" || keyword == "start") {
      need_args(1);
      auto kind = keyword == "stop" ? Directive::Kind::Stop : Directive::Kind::Start;
      scenario.script.push_back(
          Directive{kind, line_no, 0, std::string(args[0]), ClientFormat::Urlencoded, {}});
    } else if (keyword == "request") {
      auto format_end = rest.find(' ');
      if (format_end == std::string_view::npos) scenario_fail(line_no, "request takes a format and a payload");
      auto format = client_format_from_name(rest.substr(0, format_end));
      if (!format) scenario_fail(line_no, "unknown format '" + std::string(rest.substr(0, format_end)) + "'");
      std::string_view payload = rest.substr(format_end + 1);
      if (payload.empty()) scenario_fail(line_no, "empty request payload");
      scenario.script.push_back(Directive{Directive::Kind::Request, line_no, 0, {}, *format,
                                          std::string(payload)});
    } else {
      scenario_fail(line_no, "unknown directive '" + std::string(keyword) + "'");
    }
  }

  if (!scenario.taxonomy) throw Error(ErrorCode::ScenarioParseError, "no taxonomy declared");

  // static validation: provider names unique, stop/start names known,
  // request types resolvable against the declared plans
  std::map<std::string, bool> provider_names;
  for (const auto& provider : scenario.providers) {
    if (!provider_names.emplace(provider.description.service_name, true).second)
      throw Error(ErrorCode::ScenarioParseError,
                  "duplicate provider '" + provider.description.service_name + "'");
  }
  std::map<std::string, bool> plan_types;
  for (const auto& plan : scenario.plans) {
    if (!plan_types.emplace(plan.request_type, true).second)
      throw Error(ErrorCode::ScenarioParseError,
                  "duplicate plan for request type '" + plan.request_type + "'");
  }
  for (const auto& directive : scenario.script) {
    if (directive.kind == Directive::Kind::Stop || directive.kind == Directive::Kind::Start) {
      if (!provider_names.count(directive.name))
        scenario_fail(directive.line_no, "unknown provider '" + directive.name + "'");
    } else if (directive.kind == Directive::Kind::Request) {
      NormalizedRequest request;
      try {
        request = normalize(directive.payload, directive.format);
      } catch (const Error& e) {
        scenario_fail(directive.line_no, e.what());
      }
      if (!plan_types.count(request.request_type))
        scenario_fail(directive.line_no, "no plan for request type '" + request.request_type + "'");
    }
  }
  return scenario;
}

void append_trace(std::string& csv, const RequestTrace& trace) {
  std::string one = trace.to_csv();
  auto newline = one.find('\n');
  csv += one.substr(newline + 1);
}

ScenarioOutcome execute_scenario(ParsedScenario scenario, const ScenarioOptions& options) {
  std::unique_ptr<SimNet> sim;
  std::unique_ptr<UdpNet> udp;
  Network* net = nullptr;
  Endpoint mediator_endpoint{Scheme::Sim, "mediator", 70};
  Endpoint group = default_group(Scheme::Sim);

  if (options.transport == TransportKind::Sim) {
    sim = std::make_unique<SimNet>(scenario.sim);
    net = sim.get();
  } else {
    udp = std::make_unique<UdpNet>();
    net = udp.get();
    group = default_group(Scheme::Udp);
    std::uint16_t next_port = options.base_port;
    mediator_endpoint = Endpoint{Scheme::Tcp, "127.0.0.1", next_port++};
    for (auto& provider : scenario.providers) {
      provider.description.endpoint = Endpoint{Scheme::Tcp, "127.0.0.1", next_port++};
      provider.description_raw = serialize_service_description(provider.description);
    }
  }

  MediatorHostConfig host_config;
  host_config.endpoint = mediator_endpoint;
  host_config.group = group;
  host_config.browse_interval_ms = scenario.browse_ms;
  host_config.cache_ttl_ms = scenario.cache_ttl_ms;
  MediatorHost host(scenario.taxonomy, host_config, *net);
  for (auto& plan : scenario.plans) host.catalog().add(std::move(plan));
  host.start_browsing();

  std::map<std::string, std::unique_ptr<ProviderHost>> providers;
  for (auto& config : scenario.providers) {
    auto name = config.description.service_name;
    auto provider = std::make_unique<ProviderHost>(std::move(config), *net, group);
    provider->start();
    providers.emplace(std::move(name), std::move(provider));
  }

  ScenarioOutcome outcome;
  outcome.trace_csv = "step,label,clock_ms,task_id\n";

  for (const auto& directive : scenario.script) {
    switch (directive.kind) {
      case Directive::Kind::RunMs:
        if (sim)
          sim->run_for(directive.ms);
        else
          std::this_thread::sleep_for(std::chrono::milliseconds(directive.ms));
        break;
      case Directive::Kind::Stop:
        providers.at(directive.name)->stop();
        break;
      case Directive::Kind::Start:
        providers.at(directive.name)->start();
        break;
      case Directive::Kind::Request: {
        auto reply = host.handle_client(directive.payload, directive.format);
        outcome.responses += reply.payload;
        outcome.responses += '\n';
        append_trace(outcome.trace_csv, reply.trace);
        if (!reply.ok) outcome.exit_code = 1;
        break;
      }
    }
  }
  return outcome;
}

}  // namespace

ScenarioOutcome run_scenario_text(std::string_view content,
                                  const std::filesystem::path& base_dir,
                                  ScenarioOptions options) {
  return execute_scenario(parse_scenario(content, base_dir), options);
}

ScenarioOutcome run_scenario_file(const std::filesystem::path& path, ScenarioOptions options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::ScenarioParseError, "cannot read " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return run_scenario_text(buffer.str(), path.parent_path(), options);
}

namespace {

void validate_experiment(const ExperimentConfig& config) {
  if (config.repetitions < 1) throw Error(ErrorCode::ConfigError, "repetitions must be >= 1");
  if (config.providers < 1) throw Error(ErrorCode::ConfigError, "providers must be >= 1");
  if (config.tasks < 1) throw Error(ErrorCode::ConfigError, "tasks must be >= 1");
  for (double f : config.cache_fractions)
    if (f < 0.0 || f > 1.0)
      throw Error(ErrorCode::ConfigError, "cache fraction outside [0,1]");
}

std::string two_digits(std::size_t n) {
  std::string out = std::to_string(n);
  return out.size() < 2 ? "0" + out : out;
}

TaxonomyPtr experiment_taxonomy(std::size_t n_tasks) {
  OperationTaxonomy::Node root;
  root.name = "exp";
  root.children.push_back({"svc", {}});
  for (std::size_t i = 0; i < n_tasks; ++i) root.children.push_back({"op-" + two_digits(i), {}});
  return std::make_shared<OperationTaxonomy>(std::move(root));
}

}  // namespace

CellResult run_experiment_cell(const ExperimentConfig& config, std::size_t n_providers,
                               std::size_t n_tasks, double fraction) {
  validate_experiment(config);
  if (n_providers < 1 || n_tasks < 1)
    throw Error(ErrorCode::ConfigError, "sweep values must be >= 1");
  if (fraction < 0.0 || fraction > 1.0)
    throw Error(ErrorCode::ConfigError, "cache fraction outside [0,1]");

  SimConfig sim = config.sim;
  sim.seed = config.seed;
  SimNet net(sim);
  TaxonomyPtr taxonomy = experiment_taxonomy(n_tasks);

  MediatorHostConfig host_config;
  host_config.endpoint = Endpoint{Scheme::Sim, "mediator", 70};
  // isolate fetch amortization from TTL effects across long sweeps
  host_config.cache_ttl_ms = 3'600'000;
  // every pool discovery pays the full fetch-and-parse cost; only the
  // service cache amortizes it
  host_config.pool_options.memoize_descriptions = false;
  MediatorHost host(taxonomy, host_config, net);

  TaskOrganizationDocument plan;
  plan.request_type = "exp";
  for (std::size_t i = 0; i < n_tasks; ++i) {
    TaskSpec task;
    task.task_id = "t-" + two_digits(i);
    task.op_type = TypePath::parse("op-" + two_digits(i));
    task.output_slot = "s-" + two_digits(i);
    plan.tasks.push_back(std::move(task));
  }
  host.catalog().add(std::move(plan));
  host.start_browsing();

  std::vector<std::unique_ptr<ProviderHost>> providers;
  for (std::size_t p = 0; p < n_providers; ++p) {
    ServiceDescription desc;
    desc.service_name = "p-" + two_digits(p);
    desc.service_type = TypePath::parse("svc");
    desc.endpoint = Endpoint{Scheme::Sim, desc.service_name, 80};
    std::map<std::string, HandlerSpec> handlers;
    for (std::size_t i = 0; i < n_tasks; ++i) {
      OperationSignature op;
      op.name = "run-" + two_digits(i);
      op.op_type = TypePath::parse("op-" + two_digits(i));
      op.output_scalar = ScalarKind::Int;
      desc.operations.push_back(std::move(op));
      HandlerSpec handler;
      handler.kind = HandlerSpec::Kind::Fixture;
      handler.fixture["value"] = static_cast<std::int64_t>(i);
      handlers["run-" + two_digits(i)] = std::move(handler);
    }
    auto provider = std::make_unique<ProviderHost>(
        make_provider_config(std::move(desc), std::move(handlers)), net, host.config().group);
    provider->start();
    providers.push_back(std::move(provider));
  }
  net.run_for(250);  // discovery convergence

  const auto eligible = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n_tasks) + 1e-9));
  CachePolicy policy = [eligible](std::size_t index) { return index < eligible; };

  auto run_once = [&] {
    auto reply = host.handle_client("type=exp", ClientFormat::Urlencoded, policy);
    if (!reply.ok)
      throw Error(ErrorCode::ConfigError, "experiment request failed: " + reply.payload);
    return static_cast<double>(reply.trace.steps.back().clock_ms -
                               reply.trace.steps.front().clock_ms);
  };

  run_once();  // warm-up populates the cache for the eligible tasks

  std::vector<double> durations;
  durations.reserve(config.repetitions);
  for (std::size_t r = 0; r < config.repetitions; ++r) durations.push_back(run_once());

  double mean = 0.0;
  for (double d : durations) mean += d;
  mean /= static_cast<double>(durations.size());
  double variance = 0.0;
  for (double d : durations) variance += (d - mean) * (d - mean);
  variance /= static_cast<double>(durations.size());

  return CellResult{mean, std::sqrt(variance)};
}

namespace {

std::string sweep_csv(const ExperimentConfig& config, const std::vector<std::size_t>& xs,
                      bool sweep_providers) {
  validate_experiment(config);
  if (xs.empty()) throw Error(ErrorCode::ConfigError, "empty sweep");

  std::vector<double> fractions = config.cache_fractions;
  std::sort(fractions.begin(), fractions.end());
  fractions.erase(std::unique(fractions.begin(), fractions.end()), fractions.end());
  std::vector<std::size_t> sorted_xs = xs;
  std::sort(sorted_xs.begin(), sorted_xs.end());
  sorted_xs.erase(std::unique(sorted_xs.begin(), sorted_xs.end()), sorted_xs.end());

  std::string csv = "setting,x,mean_ms,stddev_ms\n";
  for (double fraction : fractions) {
    for (std::size_t x : sorted_xs) {
      CellResult cell = sweep_providers
                            ? run_experiment_cell(config, x, config.tasks, fraction)
                            : run_experiment_cell(config, config.providers, x, fraction);
      csv += scalar_text(Scalar(fraction));
      csv += ',';
      csv += std::to_string(x);
      csv += ',';
      csv += scalar_text(Scalar(cell.mean_ms));
      csv += ',';
      csv += scalar_text(Scalar(cell.stddev_ms));
      csv += '\n';
    }
  }
  return csv;
}

}  // namespace

std::string experiment_providers_csv(const ExperimentConfig& config,
                                     const std::vector<std::size_t>& n_values) {
  return sweep_csv(config, n_values, true);
}

std::string experiment_tasks_csv(const ExperimentConfig& config,
                                 const std::vector<std::size_t>& t_values) {
  return sweep_csv(config, t_values, false);
}

}  // namespace mwscm
