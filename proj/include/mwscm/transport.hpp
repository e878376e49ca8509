#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <queue>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "mwscm/endpoint.hpp"
#include "mwscm/errors.hpp"

namespace mwscm {

inline constexpr std::size_t kMaxPayloadBytes = 8 * 1024;

// Default multicast group for service advertisements.
inline Endpoint default_group(Scheme scheme) {
  return Endpoint{scheme, "239.255.70.70", 7070};
}

struct Datagram {
  std::string payload;  // non-empty, <= 8 KiB
  Endpoint source;
  std::uint64_t timestamp_ms = 0;  // virtual on sim, wall-clock on udp
};

// Exchanges carrying service description documents pay the extra
// description-fetch latency on the simulator; plain calls do not.
enum class RequestClass { Call, Fetch };

struct NodeHandlers {
  std::function<void(const Datagram&)> on_datagram;
  // Unicast request/response; the returned payload is the reply. A missing
  // handler means the node refuses requests.
  std::function<std::string(const std::string& payload, const Endpoint& from)> on_request;
};

// One substrate interface for the deterministic simulator and the live
// UDP/TCP transport. All higher modules speak blocking request/response
// plus fire-and-forget datagrams (unicast or multicast group).
class Network {
 public:
  virtual ~Network() = default;

  virtual void register_node(const Endpoint& endpoint, NodeHandlers handlers) = 0;
  virtual void unregister_node(const Endpoint& endpoint) = 0;
  virtual void join_group(const Endpoint& member, const Endpoint& group) = 0;
  virtual void leave_group(const Endpoint& member, const Endpoint& group) = 0;

  // Datagram to a node or a multicast group. Throws UnknownNode when `from`
  // is not registered, PayloadTooLarge past 8 KiB.
  virtual void send(const Endpoint& from, const Endpoint& to, std::string payload) = 0;

  // Blocking exchange; returns the reply payload or throws Error(TransportError).
  virtual std::string request(const Endpoint& from, const Endpoint& to, std::string payload,
                              RequestClass cls) = 0;

  virtual std::uint64_t clock_ms() const = 0;

  // Recurring maintenance activity (advertisement refresh, browse ticks).
  virtual std::uint64_t schedule_periodic(std::uint32_t interval_ms,
                                          std::function<void()> fn) = 0;
  virtual void cancel_periodic(std::uint64_t timer_id) = 0;
};

struct SimConfig {
  std::uint32_t link_latency_ms = 5;
  std::uint32_t description_fetch_latency_ms = 50;
  double drop_probability = 0.0;  // [0, 1)
  std::uint64_t seed = 0;
};

// Deterministic discrete-event network. Single-threaded by contract: nodes,
// sends and requests are driven from one thread, and handlers run inside the
// event loop. Periodic timers are daemon events: run_until_idle() stops once
// only daemons remain, run_for() executes everything up to its horizon.
class SimNet final : public Network {
 public:
  explicit SimNet(SimConfig config = {});  // ConfigError on bad config

  void register_node(const Endpoint& endpoint, NodeHandlers handlers) override;
  void unregister_node(const Endpoint& endpoint) override;
  void join_group(const Endpoint& member, const Endpoint& group) override;
  void leave_group(const Endpoint& member, const Endpoint& group) override;
  void send(const Endpoint& from, const Endpoint& to, std::string payload) override;
  std::string request(const Endpoint& from, const Endpoint& to, std::string payload,
                      RequestClass cls) override;
  std::uint64_t clock_ms() const override { return clock_; }
  std::uint64_t schedule_periodic(std::uint32_t interval_ms, std::function<void()> fn) override;
  void cancel_periodic(std::uint64_t timer_id) override;

  // Processes pending events in timestamp order (ties by scheduling sequence)
  // until only daemon timers remain; returns the final virtual clock.
  std::uint64_t run_until_idle();
  // Advances the virtual clock by `ms`, executing everything due.
  void run_for(std::uint64_t ms);

  const SimConfig& config() const { return config_; }
  std::size_t node_count() const { return nodes_.size(); }
  bool is_registered(const Endpoint& endpoint) const { return nodes_.count(endpoint) > 0; }

  struct Stats {
    std::uint64_t datagrams_sent = 0;
    std::uint64_t datagrams_delivered = 0;
    std::uint64_t datagrams_dropped = 0;
    std::uint64_t requests = 0;
    std::uint64_t fetch_requests = 0;
  };
  const Stats& stats() const { return stats_; }

  // Optional delivery log for determinism checks: one line per event.
  void set_event_log(bool enabled) { log_enabled_ = enabled; }
  const std::vector<std::string>& event_log() const { return event_log_; }

 private:
  struct Event {
    std::uint64_t at;
    std::uint64_t seq;
    bool daemon;
    std::function<void()> fn;
  };
  struct EventOrder {
    bool operator()(const Event& a, const Event& b) const {
      if (a.at != b.at) return a.at > b.at;
      return a.seq > b.seq;
    }
  };

  void push_event(std::uint64_t at, bool daemon, std::function<void()> fn);
  void exec_next();
  bool dropped();
  void log_line(std::string line);
  void require_registered(const Endpoint& endpoint) const;
  void check_payload(const std::string& payload) const;
  void deliver(const Endpoint& to, Datagram datagram);

  SimConfig config_;
  std::uint64_t clock_ = 0;
  std::uint64_t next_seq_ = 0;
  std::size_t pending_normal_ = 0;
  std::priority_queue<Event, std::vector<Event>, EventOrder> queue_;
  std::map<Endpoint, NodeHandlers> nodes_;
  std::map<Endpoint, std::set<Endpoint>> groups_;
  std::map<std::uint64_t, bool> timers_;  // id -> active
  std::uint64_t next_timer_id_ = 1;
  std::mt19937_64 rng_;
  Stats stats_;
  bool log_enabled_ = false;
  std::vector<std::string> event_log_;
};

}  // namespace mwscm
