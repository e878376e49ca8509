#include <doctest.h>

#include <algorithm>
#include <filesystem>

#include "mwscm/harness.hpp"
#include "mwscm/provider.hpp"
#include "testutil.hpp"

using namespace mwscm;

namespace {

std::filesystem::path scenarios() {
  return std::filesystem::path(MWSCM_FIXTURES_DIR) / "scenarios";
}

}  // namespace

TEST_CASE("locate.scn: both positioning tasks served, exit 0") {
  ScenarioOutcome outcome = run_scenario_file(scenarios() / "locate.scn");
  CHECK(outcome.exit_code == 0);
  CHECK(outcome.responses.find("status=ok") != std::string::npos);
  CHECK(outcome.responses.find("gps-fix.lat=-37.88") != std::string::npos);
  CHECK(outcome.responses.find("indoor-fix.building=h") != std::string::npos);
  CHECK(outcome.trace_csv.rfind("step,label,clock_ms,task_id\n", 0) == 0);
}

TEST_CASE("mbv.scn: the recommended vendor is the exhaustive-scoring argmax") {
  ScenarioOutcome outcome = run_scenario_file(scenarios() / "mbv.scn");
  CHECK(outcome.exit_code == 0);
  // prefs scifi/evening: only vendor-a matches both
  CHECK(outcome.responses.find("\"recommendation.vendor\":\"vendor-a\"") != std::string::npos);
  CHECK(outcome.responses.find("\"recommendation.score\":1.0") != std::string::npos);
}

TEST_CASE("withdraw.scn: failover succeeds, exit 0") {
  ScenarioOutcome outcome = run_scenario_file(scenarios() / "withdraw.scn");
  CHECK(outcome.exit_code == 0);
  // the second request re-discovers: an sp-query block appears after an sc-hit
  CHECK(outcome.trace_csv.find("sc-hit") != std::string::npos);
  CHECK(outcome.responses.find("gps-fix.lat=-37.88") != std::string::npos);
}

TEST_CASE("scenario referencing an unknown plan fails to parse") {
  try {
    run_scenario_text(
        "taxonomy taxonomy.xml\n"
        "plan plans/locate-user.xml\n"
        "request urlencoded type=warp-home\n",
        MWSCM_FIXTURES_DIR);
    FAIL("expected ScenarioParseError");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ScenarioParseError);
  }
}

TEST_CASE("scenario parse errors") {
  auto code_of = [](const std::string& content) {
    try {
      run_scenario_text(content, MWSCM_FIXTURES_DIR);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::ConfigError;
  };
  CHECK(code_of("bogus directive\n") == ErrorCode::ScenarioParseError);
  CHECK(code_of("plan plans/locate-user.xml\n") == ErrorCode::ScenarioParseError);  // taxonomy first
  CHECK(code_of("taxonomy missing-file.xml\n") == ErrorCode::ScenarioParseError);
  CHECK(code_of("taxonomy taxonomy.xml\nstop nobody\n") == ErrorCode::ScenarioParseError);
  CHECK(code_of("taxonomy taxonomy.xml\nrequest martian type=x\n") ==
        ErrorCode::ScenarioParseError);
  CHECK(code_of("") == ErrorCode::ScenarioParseError);
}

TEST_CASE("plandir loads every plan in a directory") {
  ScenarioOutcome outcome = run_scenario_text(
      "taxonomy taxonomy.xml\n"
      "plandir plans\n"
      "provider providers/gps-1.sd providers/gps-1.handlers\n"
      "provider providers/indoor-1.sd providers/indoor-1.handlers\n"
      "run-ms 250\n"
      "request urlencoded type=locate-user&user=alice\n"
      "request urlencoded type=locate-gps&user=alice\n",
      MWSCM_FIXTURES_DIR);
  CHECK(outcome.exit_code == 0);
}

TEST_CASE("a request error gives a nonzero exit but still responds") {
  ScenarioOutcome outcome = run_scenario_text(
      "taxonomy taxonomy.xml\n"
      "plan plans/locate-gps.xml\n"
      "# no providers at all\n"
      "request urlencoded type=locate-gps&user=alice\n",
      MWSCM_FIXTURES_DIR);
  CHECK(outcome.exit_code == 1);
  CHECK(outcome.responses.find("code=NoProvider") != std::string::npos);
}

TEST_CASE("experiment cell: hand-derived schedule values") {
  // cost model, derived by hand from the configured latencies:
  //   one CALL exchange: 2 x link
  //   one description fetch: 2 x link + fetch
  //   task with cache hit: one CALL
  //   task without cache: N fetches + one CALL
  ExperimentConfig config;
  config.repetitions = 5;

  const double link = 5.0, fetch = 50.0;
  const double call_cost = 2 * link;
  const double fetch_cost = 2 * link + fetch;

  SUBCASE("fraction 1.0 warm: zero fetches") {
    CellResult cell = run_experiment_cell(config, 5, 4, 1.0);
    CHECK(cell.mean_ms == 4 * call_cost);  // 40
    CHECK(cell.stddev_ms == 0.0);
  }
  SUBCASE("fraction 0: every task pays full discovery") {
    CellResult cell = run_experiment_cell(config, 5, 4, 0.0);
    CHECK(cell.mean_ms == 4 * (5 * fetch_cost + call_cost));  // 1240
    CHECK(cell.stddev_ms == 0.0);
  }
  SUBCASE("cache beats no cache") {
    CHECK(run_experiment_cell(config, 5, 4, 0.0).mean_ms >
          run_experiment_cell(config, 5, 4, 1.0).mean_ms);
  }
  SUBCASE("mean time is nondecreasing in the per-fetch latency") {
    ExperimentConfig slower = config;
    slower.sim.description_fetch_latency_ms = 100;
    CHECK(run_experiment_cell(slower, 5, 4, 0.0).mean_ms >
          run_experiment_cell(config, 5, 4, 0.0).mean_ms);
    // fully cached requests never fetch, so the knob must not matter there
    CHECK(run_experiment_cell(slower, 5, 4, 1.0).mean_ms ==
          run_experiment_cell(config, 5, 4, 1.0).mean_ms);
  }
}

TEST_CASE("experiment config validation") {
  ExperimentConfig config;
  config.repetitions = 0;
  CHECK_THROWS_AS(run_experiment_cell(config, 5, 4, 0.0), Error);
  config.repetitions = 1;
  CHECK_THROWS_AS(run_experiment_cell(config, 5, 4, 1.5), Error);
  config.cache_fractions = {0.5, 2.0};
  CHECK_THROWS_AS(experiment_tasks_csv(config, {1, 2}), Error);
}

TEST_CASE("experiment CSV shape and reproducibility") {
  ExperimentConfig config;
  config.repetitions = 3;
  config.cache_fractions = {0.0, 1.0};
  std::string csv = experiment_providers_csv(config, {1, 2});
  CHECK(csv.rfind("setting,x,mean_ms,stddev_ms\n", 0) == 0);
  // two fractions x two provider counts
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);
  CHECK(csv.find("\n0.0,1,") != std::string::npos);
  CHECK(csv.find("\n1.0,2,") != std::string::npos);

  CHECK(experiment_providers_csv(config, {1, 2}) == csv);
  CHECK(experiment_tasks_csv(config, {1, 2}) == experiment_tasks_csv(config, {1, 2}));
}

TEST_CASE("experiment seeds flow into the simulator") {
  ExperimentConfig config;
  config.repetitions = 3;
  config.seed = 1;
  auto first = experiment_tasks_csv(config, {2});
  config.seed = 2;
  auto second = experiment_tasks_csv(config, {2});
  // drop probability is zero, so seeds must not change the virtual schedule
  CHECK(first == second);
}

TEST_CASE("scenario runs are deterministic") {
  auto a = run_scenario_file(scenarios() / "locate.scn");
  auto b = run_scenario_file(scenarios() / "locate.scn");
  CHECK(a.trace_csv == b.trace_csv);
  CHECK(a.responses == b.responses);
}
