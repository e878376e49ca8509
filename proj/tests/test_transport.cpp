#include <doctest.h>

#include "mwscm/transport.hpp"

using namespace mwscm;

namespace {

Endpoint node(const std::string& host) { return Endpoint{Scheme::Sim, host, 80}; }

}  // namespace

TEST_CASE("fresh simulator: clock zero, no nodes") {
  SimNet net;
  CHECK(net.clock_ms() == 0);
  CHECK(net.node_count() == 0);
  CHECK(net.run_until_idle() == 0);
}

TEST_CASE("config validation") {
  SimConfig ok;
  ok.drop_probability = 0.5;
  CHECK_NOTHROW(SimNet{ok});
  SimConfig bad;
  bad.drop_probability = 1.0;
  CHECK_THROWS_AS(SimNet{bad}, Error);
  bad.drop_probability = -0.1;
  CHECK_THROWS_AS(SimNet{bad}, Error);
}

TEST_CASE("datagram delivered after the link latency") {
  SimNet net;  // default 5 ms
  std::vector<std::uint64_t> deliveries;
  net.register_node(node("a"), {});
  NodeHandlers rx;
  rx.on_datagram = [&](const Datagram& d) { deliveries.push_back(d.timestamp_ms); };
  net.register_node(node("b"), std::move(rx));

  net.send(node("a"), node("b"), "hello");
  CHECK(net.run_until_idle() == 5);
  REQUIRE(deliveries.size() == 1);
  CHECK(deliveries[0] == 5);
}

TEST_CASE("multicast fans out to every member") {
  SimNet net;
  Endpoint group = default_group(Scheme::Sim);
  int received = 0;
  net.register_node(node("src"), {});
  for (auto host : {"m1", "m2", "m3"}) {
    NodeHandlers rx;
    rx.on_datagram = [&](const Datagram&) { ++received; };
    net.register_node(node(host), std::move(rx));
    net.join_group(node(host), group);
  }
  net.send(node("src"), group, "ping");
  net.run_until_idle();
  CHECK(received == 3);
}

TEST_CASE("send validation") {
  SimNet net;
  net.register_node(node("a"), {});
  CHECK_THROWS_AS(net.send(node("ghost"), node("a"), "x"), Error);
  std::string big(10 * 1024, 'x');
  try {
    net.send(node("a"), node("a"), big);
    FAIL("expected PayloadTooLarge");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::PayloadTooLarge);
  }
}

TEST_CASE("request/response round trip costs two link latencies") {
  SimNet net;
  net.register_node(node("client"), {});
  NodeHandlers server;
  server.on_request = [](const std::string& payload, const Endpoint&) {
    return "re:" + payload;
  };
  net.register_node(node("server"), std::move(server));

  std::string reply = net.request(node("client"), node("server"), "ping", RequestClass::Call);
  CHECK(reply == "re:ping");
  CHECK(net.clock_ms() == 10);
  CHECK(net.stats().requests == 1);
  CHECK(net.stats().fetch_requests == 0);
}

TEST_CASE("fetch exchanges pay the description-fetch latency on the reply leg") {
  SimNet net;  // link 5, fetch 50
  net.register_node(node("client"), {});
  NodeHandlers server;
  server.on_request = [](const std::string&, const Endpoint&) { return "doc"; };
  net.register_node(node("server"), std::move(server));

  net.request(node("client"), node("server"), "GETDESC", RequestClass::Fetch);
  CHECK(net.clock_ms() == 60);  // 5 out + 5 back + 50 fetch cost
  CHECK(net.stats().fetch_requests == 1);
}

TEST_CASE("request to an unregistered endpoint fails after a round trip") {
  SimNet net;
  net.register_node(node("client"), {});
  try {
    net.request(node("client"), node("ghost"), "ping", RequestClass::Call);
    FAIL("expected TransportError");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::TransportError);
  }
  CHECK(net.clock_ms() == 10);
}

TEST_CASE("chained request/response latencies accumulate") {
  // hand-summed schedule: two sequential exchanges at 5 ms per leg = 20 ms
  SimNet net;
  net.register_node(node("client"), {});
  NodeHandlers server;
  server.on_request = [](const std::string& p, const Endpoint&) { return p; };
  net.register_node(node("server"), std::move(server));
  net.request(node("client"), node("server"), "one", RequestClass::Call);
  net.request(node("client"), node("server"), "two", RequestClass::Call);
  CHECK(net.clock_ms() == 20);
}

TEST_CASE("per-destination delivery order follows timestamp order") {
  SimNet net;
  net.register_node(node("a"), {});
  std::vector<std::string> received;
  NodeHandlers rx;
  rx.on_datagram = [&](const Datagram& d) { received.push_back(d.payload); };
  net.register_node(node("b"), std::move(rx));
  for (int i = 0; i < 5; ++i) net.send(node("a"), node("b"), "m" + std::to_string(i));
  net.run_until_idle();
  CHECK(received == std::vector<std::string>{"m0", "m1", "m2", "m3", "m4"});
}

TEST_CASE("determinism: same seed, same operations, identical event log") {
  auto run = [] {
    SimConfig config;
    config.seed = 42;
    config.drop_probability = 0.3;
    SimNet net(config);
    net.set_event_log(true);
    net.register_node(node("a"), {});
    NodeHandlers rx;
    rx.on_datagram = [](const Datagram&) {};
    net.register_node(node("b"), std::move(rx));
    for (int i = 0; i < 50; ++i) net.send(node("a"), node("b"), "m" + std::to_string(i));
    net.run_until_idle();
    return net.event_log();
  };
  auto log1 = run();
  auto log2 = run();
  CHECK(log1 == log2);
  CHECK_FALSE(log1.empty());
}

TEST_CASE("zero drop probability delivers everything exactly once") {
  SimNet net;
  net.register_node(node("a"), {});
  int count = 0;
  NodeHandlers rx;
  rx.on_datagram = [&](const Datagram&) { ++count; };
  net.register_node(node("b"), std::move(rx));
  for (int i = 0; i < 100; ++i) net.send(node("a"), node("b"), "x");
  net.run_until_idle();
  CHECK(count == 100);
  CHECK(net.stats().datagrams_dropped == 0);
}

TEST_CASE("dropped request legs surface when the reply was due") {
  SimConfig config;
  config.drop_probability = 0.9;
  config.seed = 7;
  SimNet net(config);
  net.register_node(node("client"), {});
  NodeHandlers server;
  server.on_request = [](const std::string&, const Endpoint&) { return "pong"; };
  net.register_node(node("server"), std::move(server));

  int failures = 0;
  for (int i = 0; i < 20; ++i) {
    std::uint64_t before = net.clock_ms();
    try {
      net.request(node("client"), node("server"), "ping", RequestClass::Call);
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::TransportError);
      ++failures;
    }
    CHECK(net.clock_ms() == before + 10);  // success or failure, full round trip elapses
  }
  CHECK(failures > 0);
}

TEST_CASE("periodic timers are daemons: run_until_idle does not spin on them") {
  SimNet net;
  net.register_node(node("a"), {});
  NodeHandlers rx;
  rx.on_datagram = [](const Datagram&) {};
  net.register_node(node("b"), std::move(rx));
  int ticks = 0;
  std::uint64_t timer = net.schedule_periodic(100, [&] { ++ticks; });

  CHECK(net.run_until_idle() == 0);  // only the daemon is pending
  CHECK(ticks == 0);

  net.run_for(1000);
  CHECK(ticks == 10);
  CHECK(net.clock_ms() == 1000);

  net.send(node("a"), node("b"), "x");
  net.run_until_idle();
  CHECK(net.clock_ms() == 1005);

  net.cancel_periodic(timer);
  int before = ticks;
  net.run_for(1000);
  CHECK(ticks == before);
}
