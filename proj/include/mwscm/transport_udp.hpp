#pragma once

#include <atomic>
#include <chrono>
#include <map>
#include <memory>
#include <mutex>
#include <thread>
#include <vector>

#include "mwscm/transport.hpp"

namespace mwscm {

struct UdpNetConfig {
  std::uint32_t request_timeout_ms = 2000;
  std::string multicast_interface = "127.0.0.1";
};

// Live transport: advertisements travel as UDP datagrams (multicast group or
// unicast), request/response as TCP with a 4-byte big-endian length prefix.
// Wall-clock timing. Each registered node owns a TCP accept loop and a UDP
// receive loop on its port; handlers run on those background threads.
class UdpNet final : public Network {
 public:
  explicit UdpNet(UdpNetConfig config = {});
  ~UdpNet() override;

  void register_node(const Endpoint& endpoint, NodeHandlers handlers) override;
  void unregister_node(const Endpoint& endpoint) override;
  void join_group(const Endpoint& member, const Endpoint& group) override;
  void leave_group(const Endpoint& member, const Endpoint& group) override;
  void send(const Endpoint& from, const Endpoint& to, std::string payload) override;
  std::string request(const Endpoint& from, const Endpoint& to, std::string payload,
                      RequestClass cls) override;
  std::uint64_t clock_ms() const override;
  std::uint64_t schedule_periodic(std::uint32_t interval_ms, std::function<void()> fn) override;
  void cancel_periodic(std::uint64_t timer_id) override;

 private:
  struct Node;
  struct GroupMembership;
  struct Timer;

  void stop_node(Node& node);

  UdpNetConfig config_;
  std::chrono::steady_clock::time_point epoch_;
  mutable std::mutex mutex_;
  std::map<Endpoint, std::shared_ptr<Node>> nodes_;
  std::vector<std::shared_ptr<GroupMembership>> memberships_;
  std::map<std::uint64_t, std::shared_ptr<Timer>> timers_;
  std::uint64_t next_timer_id_ = 1;
};

// 4-byte big-endian length prefix framing over a connected stream socket.
bool write_framed(int fd, const std::string& payload);
bool read_framed(int fd, std::string& payload, std::uint32_t timeout_ms);

}  // namespace mwscm
