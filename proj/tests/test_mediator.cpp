#include <doctest.h>

#include <filesystem>

#include "mwscm/host.hpp"
#include "mwscm/provider.hpp"
#include "testutil.hpp"

using namespace mwscm;

namespace {

std::filesystem::path fixtures() { return MWSCM_FIXTURES_DIR; }

ServiceDelegatePtr stub_delegate(const std::string& name, double rtt, bool reachable = true) {
  ServiceDescription desc;
  desc.service_name = name;
  desc.service_type = TypePath::parse("positioning");
  desc.endpoint = Endpoint{Scheme::Sim, name, 80};
  OperationSignature op;
  op.name = "noop";
  op.op_type = TypePath::parse("positioning");
  desc.operations.push_back(op);
  auto delegate = std::make_shared<ServiceDelegate>(create_delegate(desc, "noop"));
  if (!reachable) delegate->mark_unreachable();
  if (rtt > 0) {
    // drive the ewma to the wanted value through its own update rule
    SimConfig config;
    config.link_latency_ms = static_cast<std::uint32_t>(rtt / 2);
    SimNet net(config);
    net.register_node(Endpoint{Scheme::Sim, "probe", 1}, {});
    NodeHandlers server;
    server.on_request = [](const std::string&, const Endpoint&) { return std::string("200\n"); };
    net.register_node(desc.endpoint, std::move(server));
    delegate->invoke({}, net, Endpoint{Scheme::Sim, "probe", 1});
    if (!reachable) delegate->mark_unreachable();
  }
  return delegate;
}

// full stack on the simulator with the shipped fixtures
struct Rig {
  SimNet net;
  TaxonomyPtr taxonomy = testutil::demo_taxonomy();
  MediatorHost host;
  std::map<std::string, std::unique_ptr<ProviderHost>> providers;

  explicit Rig(MediatorHostConfig config = {}) : host(taxonomy, config, net) {
    host.catalog().load_directory(fixtures() / "plans", *taxonomy);
    host.start_browsing();
  }

  void spawn(const std::string& name) {
    ProviderConfig config = load_provider_config(
        fixtures() / "providers" / (name + ".sd"), fixtures() / "providers" / (name + ".handlers"),
        *taxonomy);
    auto provider = std::make_unique<ProviderHost>(std::move(config), net,
                                                   host.config().group);
    provider->start();
    providers[name] = std::move(provider);
  }

  std::vector<int> steps(const RequestTrace& trace) {
    std::vector<int> out;
    for (const auto& step : trace.steps) out.push_back(step.step);
    return out;
  }
};

}  // namespace

TEST_CASE("service cache: exact key, ttl, negative entries") {
  ServiceCache cache(30'000);
  TypePath positioning = TypePath::parse("positioning");
  TypePath gps = TypePath::parse("positioning/gps");

  CHECK_FALSE(cache.lookup(positioning, 0).has_value());

  cache.update(positioning, {stub_delegate("a", 0)}, 1'000);
  auto hit = cache.lookup(positioning, 11'000);  // age 10 s
  REQUIRE(hit.has_value());
  CHECK(hit->size() == 1);

  CHECK_FALSE(cache.lookup(gps, 11'000).has_value());  // no subtype walking

  CHECK_FALSE(cache.lookup(positioning, 32'000).has_value());  // age 31 s
  CHECK(cache.size() == 0);                                    // expired entry evicted

  cache.update(positioning, {}, 0);  // negative entry
  auto negative = cache.lookup(positioning, 7'000);
  REQUIRE(negative.has_value());
  CHECK(negative->empty());
  CHECK_FALSE(cache.lookup(positioning, 7'600).has_value());  // negative ttl is ttl/4
}

TEST_CASE("cache update: read-your-write and last-writer-wins") {
  ServiceCache cache;
  TypePath key = TypePath::parse("positioning");
  auto first = stub_delegate("first", 0);
  auto second = stub_delegate("second", 0);
  cache.update(key, {first}, 0);
  CHECK((*cache.lookup(key, 1))[0]->service_name() == "first");
  cache.update(key, {second}, 2);
  auto delegates = *cache.lookup(key, 3);
  REQUIRE(delegates.size() == 1);
  CHECK(delegates[0]->service_name() == "second");
}

TEST_CASE("evict_provider") {
  ServiceCache cache;
  auto shared = stub_delegate("gone", 0);
  cache.update(TypePath::parse("positioning"), {shared, stub_delegate("stays", 0)}, 0);
  cache.update(TypePath::parse("media"), {shared}, 0);
  cache.update(TypePath::parse("bazaar"), {stub_delegate("other", 0)}, 0);

  CHECK(cache.evict_provider("gone") == 2);
  CHECK(cache.size() == 2);  // the media entry became empty and was deleted
  CHECK((*cache.lookup(TypePath::parse("positioning"), 1)).size() == 1);
  CHECK(cache.evict_provider("nobody") == 0);
}

TEST_CASE("select_best prefers untried, then min rtt, then name") {
  auto a = stub_delegate("a", 80);
  auto b = stub_delegate("b", 30);
  CHECK(TaskManager::select_best({a, b})->service_name() == "b");

  auto a30 = stub_delegate("a", 30);
  CHECK(TaskManager::select_best({a30, b})->service_name() == "a");

  auto untried = stub_delegate("z-untried", 0);
  CHECK(TaskManager::select_best({a30, untried})->service_name() == "z-untried");

  auto dead1 = stub_delegate("d1", 0, false);
  auto dead2 = stub_delegate("d2", 30, false);
  try {
    TaskManager::select_best({dead1, dead2});
    FAIL("expected NoProvider");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NoProvider);
  }
  CHECK(TaskManager::select_best({dead1, b})->service_name() == "b");
}

TEST_CASE("locate-user: cold cache then warm cache") {
  Rig rig;
  rig.spawn("gps-1");
  rig.spawn("indoor-1");
  rig.net.run_for(250);

  auto first = rig.host.handle_client("type=locate-user&user=alice", ClientFormat::Urlencoded);
  CHECK(first.ok);
  CHECK(first.payload.find("status=ok") != std::string::npos);
  CHECK(first.payload.find("gps-fix.lat=-37.88") != std::string::npos);
  CHECK(first.payload.find("gps-fix.lon=145.04") != std::string::npos);
  CHECK(first.payload.find("indoor-fix.") != std::string::npos);

  // cold: both tasks discovered via the pool (8-10), no cache hits
  auto cold_steps = rig.steps(first.trace);
  CHECK(cold_steps == std::vector<int>{1, 2, 3, 4, 5,
                                       6, 8, 9, 10, 11, 12, 13, 14, 15,
                                       6, 8, 9, 10, 11, 12, 13, 14, 15,
                                       16, 17, 18, 19, 20});
  CHECK(rig.net.stats().fetch_requests == 2);

  // warm: cache hits (7), no pool queries, zero further fetches
  auto second = rig.host.handle_client("type=locate-user&user=alice", ClientFormat::Urlencoded);
  CHECK(second.ok);
  auto warm_steps = rig.steps(second.trace);
  CHECK(warm_steps == std::vector<int>{1, 2, 3, 4, 5,
                                       6, 7, 11, 12, 13, 14, 15,
                                       6, 7, 11, 12, 13, 14, 15,
                                       16, 17, 18, 19, 20});
  CHECK(rig.net.stats().fetch_requests == 2);

  // provenance marks the cache outcomes
  for (const auto& step : second.trace.steps)
    if (step.step >= 6 && step.step <= 15) CHECK_FALSE(step.task_id.empty());

  // cache soundness: every cached delegate matches the key it is filed under
  for (auto key : {"positioning/gps", "positioning/indoor"}) {
    auto cached = rig.host.cache().lookup(TypePath::parse(key), rig.net.clock_ms());
    REQUIRE(cached.has_value());
    for (const auto& delegate : *cached)
      CHECK(is_subtype(delegate->operation().op_type, TypePath::parse(key), *rig.taxonomy));
  }
}

TEST_CASE("unknown request type") {
  Rig rig;
  auto reply = rig.host.handle_client("type=warp-home", ClientFormat::Urlencoded);
  CHECK_FALSE(reply.ok);
  CHECK(reply.payload == "code=UnknownRequestType&status=error");
  CHECK(rig.steps(reply.trace) == std::vector<int>{1, 2, 3, 4, 5, 16, 17, 18, 19, 20});
}

TEST_CASE("provider withdrawal mid-sequence: evict, re-discover, fail over") {
  Rig rig;
  rig.spawn("gps-1");
  rig.spawn("gps-2");
  rig.net.run_for(250);

  auto first = rig.host.handle_client("type=locate-gps&user=alice", ClientFormat::Urlencoded);
  REQUIRE(first.ok);
  REQUIRE(first.payload.find("gps-fix.lat=-37.88") != std::string::npos);  // served by gps-1

  rig.providers.at("gps-2")->stop();
  rig.net.run_for(150);

  // the cached list prefers untried gps-2, which is gone: one eviction, one
  // re-discovery, then success via gps-1
  auto second = rig.host.handle_client("type=locate-gps&user=alice", ClientFormat::Urlencoded);
  CHECK(second.ok);
  CHECK(second.payload.find("gps-fix.lat=-37.88") != std::string::npos);
  CHECK(rig.steps(second.trace) == std::vector<int>{1, 2, 3, 4, 5,
                                                    6, 7, 11, 12,
                                                    8, 9, 10, 11, 12, 13, 14, 15,
                                                    16, 17, 18, 19, 20});
}

TEST_CASE("all providers withdrawn: NoProvider after one re-discovery") {
  Rig rig;
  rig.spawn("gps-1");
  rig.spawn("gps-2");
  rig.net.run_for(250);
  REQUIRE(rig.host.handle_client("type=locate-gps&user=alice", ClientFormat::Urlencoded).ok);

  rig.providers.at("gps-1")->stop();
  rig.providers.at("gps-2")->stop();
  rig.net.run_for(150);

  auto reply = rig.host.handle_client("type=locate-gps&user=alice", ClientFormat::Urlencoded);
  CHECK_FALSE(reply.ok);
  CHECK(reply.payload == "code=NoProvider&status=error");
  // cached hit -> try gps-2 (12) -> evict -> re-discovery finds nothing -> no
  // second selection
  CHECK(rig.steps(reply.trace) == std::vector<int>{1, 2, 3, 4, 5,
                                                   6, 7, 11, 12,
                                                   8, 9, 10,
                                                   16, 17, 18, 19, 20});
}

TEST_CASE("vacuous plan: zero tasks still finalizes") {
  Rig rig;
  TaskOrganizationDocument empty_plan;
  empty_plan.request_type = "noop";
  rig.host.catalog().add(empty_plan);

  auto reply = rig.host.handle_client("type=noop", ClientFormat::Urlencoded);
  CHECK(reply.ok);
  CHECK(reply.payload == "status=ok");
  CHECK(rig.steps(reply.trace) == std::vector<int>{1, 2, 3, 4, 5, 16, 17, 18, 19, 20});
}

TEST_CASE("application faults become TaskFault without retry") {
  Rig rig;
  ServiceDescription desc;
  desc.service_name = "faulty";
  desc.service_type = TypePath::parse("positioning");
  desc.endpoint = Endpoint::parse("sim://faulty:80");
  OperationSignature op;
  op.name = "locate";
  op.op_type = TypePath::parse("positioning/gps");
  op.inputs = {{"user", ScalarKind::String}};
  desc.operations.push_back(op);
  std::map<std::string, HandlerSpec> handlers;
  HandlerSpec fault;
  fault.kind = HandlerSpec::Kind::Fault;
  fault.fault_code = "Slipped";
  handlers["locate"] = fault;
  auto provider = std::make_unique<ProviderHost>(make_provider_config(desc, handlers), rig.net,
                                                 rig.host.config().group);
  provider->start();
  rig.net.run_for(250);

  auto reply = rig.host.handle_client("type=locate-gps&user=alice", ClientFormat::Urlencoded);
  CHECK_FALSE(reply.ok);
  CHECK(reply.payload == "code=TaskFault&status=error");
  // the provider answered: 12-15 all appear, then the request aborts
  CHECK(rig.steps(reply.trace) == std::vector<int>{1, 2, 3, 4, 5,
                                                   6, 8, 9, 10, 11, 12, 13, 14, 15,
                                                   16, 17, 18, 19, 20});
}

TEST_CASE("trace CSV shape") {
  Rig rig;
  rig.spawn("gps-1");
  rig.spawn("indoor-1");
  rig.net.run_for(250);
  auto reply = rig.host.handle_client("type=locate-user&user=alice", ClientFormat::Urlencoded);
  std::string csv = reply.trace.to_csv();
  CHECK(csv.rfind("step,label,clock_ms,task_id\n", 0) == 0);
  CHECK(csv.find("1,request-received,250,\n") != std::string::npos);
  CHECK(csv.find(",sc-check,") != std::string::npos);
  CHECK(csv.find(",t1\n") != std::string::npos);
  CHECK(csv.find(",t2\n") != std::string::npos);
}

TEST_CASE("provenance records task, provider, elapsed and cache outcome") {
  Rig rig;
  rig.spawn("gps-1");
  rig.spawn("indoor-1");
  rig.net.run_for(250);

  NormalizedRequest request;
  request.request_type = "locate-user";
  request.params = {{"user", "alice"}};
  RequestTrace trace;
  NormalizedResponse response = rig.host.task_manager().handle_request(request, trace);
  REQUIRE(response.ok);
  REQUIRE(response.provenance.size() == 2);
  CHECK(response.provenance[0].task_id == "t1");
  CHECK(response.provenance[0].service_name == "gps-1");
  CHECK(response.provenance[0].cache_hit == false);
  // the first discovery fetches both alive descriptions (60 each) + one call
  CHECK(response.provenance[0].elapsed_ms == 130);
  CHECK(response.provenance[1].task_id == "t2");
  CHECK(response.provenance[1].service_name == "indoor-1");
  CHECK(response.provenance[1].elapsed_ms == 10);  // memoized descriptions, call only

  RequestTrace warm_trace;
  NormalizedResponse warm = rig.host.task_manager().handle_request(request, warm_trace);
  REQUIRE(warm.ok);
  CHECK(warm.provenance[0].cache_hit);
  CHECK(warm.provenance[0].elapsed_ms == 10);  // call only
}

TEST_CASE("plan catalog loads a directory and rejects duplicates") {
  auto tax = testutil::demo_taxonomy();
  PlanCatalog catalog;
  catalog.load_directory(fixtures() / "plans", *tax);
  CHECK(catalog.size() == 3);
  CHECK(catalog.find("locate-user") != nullptr);
  CHECK(catalog.find("recommend-vendor") != nullptr);
  CHECK(catalog.find("nope") == nullptr);

  TaskOrganizationDocument duplicate;
  duplicate.request_type = "locate-user";
  CHECK_THROWS_AS(catalog.add(duplicate), Error);
}

TEST_CASE("slot-to-input binding feeds a later task") {
  Rig rig;
  // provider a produces an int; provider b consumes it as its input
  ServiceDescription source;
  source.service_name = "source";
  source.service_type = TypePath::parse("media");
  source.endpoint = Endpoint::parse("sim://source:80");
  OperationSignature produce;
  produce.name = "produce";
  produce.op_type = TypePath::parse("media/dvd-catalog");
  produce.output_scalar = ScalarKind::Int;
  source.operations.push_back(produce);
  std::map<std::string, HandlerSpec> source_handlers;
  HandlerSpec fixture;
  fixture.fixture["value"] = std::int64_t{7};
  source_handlers["produce"] = fixture;

  ServiceDescription sink;
  sink.service_name = "sink";
  sink.service_type = TypePath::parse("media");
  sink.endpoint = Endpoint::parse("sim://sink:80");
  OperationSignature consume;
  consume.name = "consume";
  consume.op_type = TypePath::parse("media");
  consume.inputs = {{"n", ScalarKind::Int}};
  consume.output_scalar = ScalarKind::Int;
  sink.operations.push_back(consume);
  std::map<std::string, HandlerSpec> sink_handlers;
  HandlerSpec echo;
  echo.fixture["value"] = std::int64_t{99};
  sink_handlers["consume"] = echo;

  auto p1 = std::make_unique<ProviderHost>(make_provider_config(source, source_handlers), rig.net,
                                           rig.host.config().group);
  auto p2 = std::make_unique<ProviderHost>(make_provider_config(sink, sink_handlers), rig.net,
                                           rig.host.config().group);
  p1->start();
  p2->start();
  rig.net.run_for(250);

  TaskOrganizationDocument plan;
  plan.request_type = "chain";
  TaskSpec t1;
  t1.task_id = "t1";
  t1.op_type = TypePath::parse("media/dvd-catalog");
  t1.output_slot = "n";
  TaskSpec t2;
  t2.task_id = "t2";
  t2.op_type = TypePath::parse("media");
  t2.inputs = {{"n", InputBinding{InputBinding::Source::TaskSlot, "n"}}};
  t2.output_slot = "out";
  plan.tasks = {t1, t2};
  rig.host.catalog().add(plan);

  auto reply = rig.host.handle_client("type=chain", ClientFormat::Urlencoded);
  CHECK(reply.ok);
  CHECK(reply.payload == "n=7&out=99&status=ok");
}
