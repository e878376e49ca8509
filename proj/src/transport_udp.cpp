#include "mwscm/transport_udp.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cstring>

namespace mwscm {

namespace {

sockaddr_in make_addr(const std::string& host, std::uint16_t port) {
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port);
  if (host == "0.0.0.0" || host.empty())
    addr.sin_addr.s_addr = INADDR_ANY;
  else if (inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1)
    throw Error(ErrorCode::ConfigError, "not an IPv4 address: " + host);
  return addr;
}

bool wait_readable(int fd, std::uint32_t timeout_ms) {
  pollfd pfd{fd, POLLIN, 0};
  return poll(&pfd, 1, static_cast<int>(timeout_ms)) > 0 && (pfd.revents & POLLIN);
}

class Fd {
 public:
  explicit Fd(int fd = -1) : fd_(fd) {}
  ~Fd() { reset(); }
  Fd(const Fd&) = delete;
  Fd& operator=(const Fd&) = delete;
  Fd(Fd&& other) noexcept : fd_(other.release()) {}
  Fd& operator=(Fd&& other) noexcept {
    if (this != &other) reset(other.release());
    return *this;
  }
  int get() const { return fd_; }
  int release() {
    int fd = fd_;
    fd_ = -1;
    return fd;
  }
  void reset(int fd = -1) {
    if (fd_ >= 0) ::close(fd_);
    fd_ = fd;
  }
  explicit operator bool() const { return fd_ >= 0; }

 private:
  int fd_;
};

}  // namespace

bool write_framed(int fd, const std::string& payload) {
  std::uint32_t len = htonl(static_cast<std::uint32_t>(payload.size()));
  std::string buffer(reinterpret_cast<const char*>(&len), 4);
  buffer += payload;
  std::size_t sent = 0;
  while (sent < buffer.size()) {
    ssize_t n = ::send(fd, buffer.data() + sent, buffer.size() - sent, MSG_NOSIGNAL);
    if (n <= 0) return false;
    sent += static_cast<std::size_t>(n);
  }
  return true;
}

bool read_framed(int fd, std::string& payload, std::uint32_t timeout_ms) {
  auto read_exact = [&](char* out, std::size_t count) {
    std::size_t got = 0;
    while (got < count) {
      if (!wait_readable(fd, timeout_ms)) return false;
      ssize_t n = ::recv(fd, out + got, count - got, 0);
      if (n <= 0) return false;
      got += static_cast<std::size_t>(n);
    }
    return true;
  };
  std::uint32_t len_be = 0;
  if (!read_exact(reinterpret_cast<char*>(&len_be), 4)) return false;
  std::uint32_t len = ntohl(len_be);
  if (len > 16 * 1024 * 1024) return false;  // sanity bound
  payload.resize(len);
  return len == 0 || read_exact(payload.data(), len);
}

struct UdpNet::Node {
  Endpoint endpoint;
  NodeHandlers handlers;
  Fd tcp_listener;
  Fd udp_socket;
  std::thread tcp_thread;
  std::thread udp_thread;
  std::atomic<bool> stopping{false};
};

struct UdpNet::GroupMembership {
  Endpoint member;
  Endpoint group;
  Fd socket;
  std::thread thread;
  std::atomic<bool> stopping{false};
};

struct UdpNet::Timer {
  std::thread thread;
  std::atomic<bool> stopping{false};
};

UdpNet::UdpNet(UdpNetConfig config)
    : config_(std::move(config)), epoch_(std::chrono::steady_clock::now()) {}

UdpNet::~UdpNet() {
  std::vector<std::shared_ptr<Node>> nodes;
  std::vector<std::shared_ptr<GroupMembership>> memberships;
  std::vector<std::shared_ptr<Timer>> timers;
  {
    std::lock_guard lock(mutex_);
    for (auto& [ep, node] : nodes_) nodes.push_back(node);
    nodes_.clear();
    memberships.swap(memberships_);
    for (auto& [id, timer] : timers_) timers.push_back(timer);
    timers_.clear();
  }
  for (auto& node : nodes) stop_node(*node);
  for (auto& membership : memberships) {
    membership->stopping = true;
    membership->socket.reset();
    if (membership->thread.joinable()) membership->thread.join();
  }
  for (auto& timer : timers) {
    timer->stopping = true;
    if (timer->thread.joinable()) timer->thread.join();
  }
}

std::uint64_t UdpNet::clock_ms() const {
  return static_cast<std::uint64_t>(std::chrono::duration_cast<std::chrono::milliseconds>(
                                        std::chrono::steady_clock::now() - epoch_)
                                        .count());
}

void UdpNet::register_node(const Endpoint& endpoint, NodeHandlers handlers) {
  auto node = std::make_shared<Node>();
  node->endpoint = endpoint;
  node->handlers = std::move(handlers);

  sockaddr_in addr = make_addr(endpoint.host, endpoint.port);

  // TCP listener for request/response
  Fd listener(::socket(AF_INET, SOCK_STREAM, 0));
  if (!listener) throw Error(ErrorCode::TransportError, "socket() failed");
  int one = 1;
  setsockopt(listener.get(), SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
  if (::bind(listener.get(), reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0 ||
      ::listen(listener.get(), 16) != 0)
    throw Error(ErrorCode::EndpointInUse, endpoint.str());
  node->tcp_listener = Fd(listener.release());

  // UDP socket on the same port for unicast datagrams
  Fd udp(::socket(AF_INET, SOCK_DGRAM, 0));
  if (!udp) throw Error(ErrorCode::TransportError, "socket() failed");
  setsockopt(udp.get(), SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
  if (::bind(udp.get(), reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0)
    throw Error(ErrorCode::EndpointInUse, endpoint.str() + " (udp)");
  node->udp_socket = Fd(udp.release());

  {
    std::lock_guard lock(mutex_);
    if (nodes_.count(endpoint)) throw Error(ErrorCode::EndpointInUse, endpoint.str());
    nodes_[endpoint] = node;
  }

  auto weak = std::weak_ptr<Node>(node);
  node->tcp_thread = std::thread([weak, timeout = config_.request_timeout_ms] {
    while (true) {
      auto self = weak.lock();
      if (!self || self->stopping) return;
      int listener = self->tcp_listener.get();
      if (!wait_readable(listener, 200)) continue;
      sockaddr_in peer{};
      socklen_t peer_len = sizeof(peer);
      int conn = ::accept(listener, reinterpret_cast<sockaddr*>(&peer), &peer_len);
      if (conn < 0) return;
      Fd connection(conn);
      if (self->stopping) return;
      std::string payload;
      if (!read_framed(connection.get(), payload, timeout)) continue;
      if (!self->handlers.on_request) continue;
      char host[INET_ADDRSTRLEN] = {};
      inet_ntop(AF_INET, &peer.sin_addr, host, sizeof(host));
      Endpoint from{Scheme::Tcp, host, ntohs(peer.sin_port)};
      std::string reply;
      try {
        reply = self->handlers.on_request(payload, from);
      } catch (...) {
        continue;  // connection dropped, caller times out
      }
      write_framed(connection.get(), reply);
    }
  });

  node->udp_thread = std::thread([weak] {
    while (true) {
      auto self = weak.lock();
      if (!self || self->stopping) return;
      int fd = self->udp_socket.get();
      auto handler = self->handlers.on_datagram;
      self.reset();
      if (!wait_readable(fd, 200)) continue;
      char buffer[kMaxPayloadBytes];
      sockaddr_in peer{};
      socklen_t peer_len = sizeof(peer);
      ssize_t n = ::recvfrom(fd, buffer, sizeof(buffer), 0,
                             reinterpret_cast<sockaddr*>(&peer), &peer_len);
      if (n <= 0) return;
      self = weak.lock();
      if (!self || self->stopping || !handler) continue;
      char host[INET_ADDRSTRLEN] = {};
      inet_ntop(AF_INET, &peer.sin_addr, host, sizeof(host));
      Datagram datagram{std::string(buffer, static_cast<std::size_t>(n)),
                        Endpoint{Scheme::Udp, host, ntohs(peer.sin_port)}, 0};
      handler(datagram);
    }
  });
}

void UdpNet::stop_node(Node& node) {
  node.stopping = true;
  // closing the sockets unblocks accept/recv
  ::shutdown(node.tcp_listener.get(), SHUT_RDWR);
  node.tcp_listener.reset();
  node.udp_socket.reset();
  if (node.tcp_thread.joinable()) node.tcp_thread.join();
  if (node.udp_thread.joinable()) node.udp_thread.join();
}

void UdpNet::unregister_node(const Endpoint& endpoint) {
  std::shared_ptr<Node> node;
  {
    std::lock_guard lock(mutex_);
    auto it = nodes_.find(endpoint);
    if (it == nodes_.end()) return;
    node = it->second;
    nodes_.erase(it);
  }
  stop_node(*node);
}

void UdpNet::join_group(const Endpoint& member, const Endpoint& group) {
  std::function<void(const Datagram&)> handler;
  {
    std::lock_guard lock(mutex_);
    auto it = nodes_.find(member);
    if (it == nodes_.end()) throw Error(ErrorCode::UnknownNode, member.str());
    handler = it->second->handlers.on_datagram;
  }

  auto membership = std::make_shared<GroupMembership>();
  membership->member = member;
  membership->group = group;

  Fd fd(::socket(AF_INET, SOCK_DGRAM, 0));
  if (!fd) throw Error(ErrorCode::TransportError, "socket() failed");
  int one = 1;
  setsockopt(fd.get(), SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
#ifdef SO_REUSEPORT
  setsockopt(fd.get(), SOL_SOCKET, SO_REUSEPORT, &one, sizeof(one));
#endif
  sockaddr_in addr = make_addr("0.0.0.0", group.port);
  if (::bind(fd.get(), reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0)
    throw Error(ErrorCode::TransportError, "bind " + group.str());
  ip_mreq mreq{};
  inet_pton(AF_INET, group.host.c_str(), &mreq.imr_multiaddr);
  inet_pton(AF_INET, config_.multicast_interface.c_str(), &mreq.imr_interface);
  if (setsockopt(fd.get(), IPPROTO_IP, IP_ADD_MEMBERSHIP, &mreq, sizeof(mreq)) != 0)
    throw Error(ErrorCode::TransportError, "multicast join " + group.str());
  membership->socket = Fd(fd.release());

  auto weak = std::weak_ptr<GroupMembership>(membership);
  membership->thread = std::thread([weak, handler] {
    while (true) {
      auto self = weak.lock();
      if (!self || self->stopping) return;
      int fd = self->socket.get();
      self.reset();
      if (!wait_readable(fd, 200)) continue;
      char buffer[kMaxPayloadBytes];
      sockaddr_in peer{};
      socklen_t peer_len = sizeof(peer);
      ssize_t n = ::recvfrom(fd, buffer, sizeof(buffer), 0,
                             reinterpret_cast<sockaddr*>(&peer), &peer_len);
      if (n <= 0) return;
      self = weak.lock();
      if (!self || self->stopping || !handler) continue;
      char host[INET_ADDRSTRLEN] = {};
      inet_ntop(AF_INET, &peer.sin_addr, host, sizeof(host));
      handler(Datagram{std::string(buffer, static_cast<std::size_t>(n)),
                       Endpoint{Scheme::Udp, host, ntohs(peer.sin_port)}, 0});
    }
  });

  std::lock_guard lock(mutex_);
  memberships_.push_back(std::move(membership));
}

void UdpNet::leave_group(const Endpoint& member, const Endpoint& group) {
  std::vector<std::shared_ptr<GroupMembership>> dropped;
  {
    std::lock_guard lock(mutex_);
    for (auto it = memberships_.begin(); it != memberships_.end();) {
      if ((*it)->member == member && (*it)->group == group) {
        dropped.push_back(*it);
        it = memberships_.erase(it);
      } else {
        ++it;
      }
    }
  }
  for (auto& membership : dropped) {
    membership->stopping = true;
    membership->socket.reset();
    if (membership->thread.joinable()) membership->thread.join();
  }
}

void UdpNet::send(const Endpoint& from, const Endpoint& to, std::string payload) {
  {
    std::lock_guard lock(mutex_);
    if (!nodes_.count(from)) throw Error(ErrorCode::UnknownNode, from.str());
  }
  if (payload.empty()) throw Error(ErrorCode::MalformedPayload, "empty datagram");
  if (payload.size() > kMaxPayloadBytes)
    throw Error(ErrorCode::PayloadTooLarge, std::to_string(payload.size()) + " bytes");

  Fd fd(::socket(AF_INET, SOCK_DGRAM, 0));
  if (!fd) throw Error(ErrorCode::TransportError, "socket() failed");
  in_addr iface{};
  inet_pton(AF_INET, config_.multicast_interface.c_str(), &iface);
  setsockopt(fd.get(), IPPROTO_IP, IP_MULTICAST_IF, &iface, sizeof(iface));
  int loop = 1;
  setsockopt(fd.get(), IPPROTO_IP, IP_MULTICAST_LOOP, &loop, sizeof(loop));
  sockaddr_in addr = make_addr(to.host, to.port);
  ::sendto(fd.get(), payload.data(), payload.size(), 0, reinterpret_cast<sockaddr*>(&addr),
           sizeof(addr));
}

std::string UdpNet::request(const Endpoint& from, const Endpoint& to, std::string payload,
                            RequestClass) {
  {
    std::lock_guard lock(mutex_);
    if (!nodes_.count(from)) throw Error(ErrorCode::UnknownNode, from.str());
  }
  Fd fd(::socket(AF_INET, SOCK_STREAM, 0));
  if (!fd) throw Error(ErrorCode::TransportError, "socket() failed");
  sockaddr_in addr = make_addr(to.host, to.port);
  if (::connect(fd.get(), reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0)
    throw Error(ErrorCode::TransportError, "connect " + to.str());
  if (!write_framed(fd.get(), payload))
    throw Error(ErrorCode::TransportError, "send to " + to.str());
  std::string reply;
  if (!read_framed(fd.get(), reply, config_.request_timeout_ms))
    throw Error(ErrorCode::TransportError, "no reply from " + to.str());
  return reply;
}

std::uint64_t UdpNet::schedule_periodic(std::uint32_t interval_ms, std::function<void()> fn) {
  if (interval_ms == 0) throw Error(ErrorCode::ConfigError, "zero periodic interval");
  auto timer = std::make_shared<Timer>();
  std::uint64_t id;
  {
    std::lock_guard lock(mutex_);
    id = next_timer_id_++;
    timers_[id] = timer;
  }
  auto weak = std::weak_ptr<Timer>(timer);
  timer->thread = std::thread([weak, interval_ms, fn = std::move(fn)] {
    while (true) {
      for (std::uint32_t waited = 0; waited < interval_ms; waited += 50) {
        auto self = weak.lock();
        if (!self || self->stopping) return;
        std::this_thread::sleep_for(
            std::chrono::milliseconds(std::min<std::uint32_t>(50, interval_ms - waited)));
      }
      auto self = weak.lock();
      if (!self || self->stopping) return;
      fn();
    }
  });
  return id;
}

void UdpNet::cancel_periodic(std::uint64_t timer_id) {
  std::shared_ptr<Timer> timer;
  {
    std::lock_guard lock(mutex_);
    auto it = timers_.find(timer_id);
    if (it == timers_.end()) return;
    timer = it->second;
    timers_.erase(it);
  }
  timer->stopping = true;
  if (timer->thread.joinable()) timer->thread.join();
}

}  // namespace mwscm
