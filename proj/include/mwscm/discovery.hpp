#pragma once

#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <variant>
#include <vector>

#include "mwscm/delegate.hpp"
#include "mwscm/model.hpp"
#include "mwscm/transport.hpp"

namespace mwscm {

// One line per datagram, '|'-separated, no escaping (names and types are
// [a-z0-9/-]+):
//   ADVERTISE|<name>|<service-type>|<endpoint>|<ttl_s>|<seq>
//   WITHDRAW|<name>|<seq>
struct Advertisement {
  std::string service_name;
  TypePath service_type;
  Endpoint endpoint;
  std::uint32_t ttl_s = 0;  // >= 1
  std::uint64_t seq = 0;    // strictly increasing per provider
};

struct Withdrawal {
  std::string service_name;
  std::uint64_t seq = 0;
};

using PoolMessage = std::variant<Advertisement, Withdrawal>;

std::string encode_advertisement(const Advertisement& ad);
std::string encode_withdrawal(const Withdrawal& wd);
// Malformed lines yield nullopt; pools ignore noise rather than fail.
std::optional<PoolMessage> decode_pool_message(std::string_view line);

struct PoolOptions {
  // The pool memoizes fetched service descriptions; the cache-sweep
  // experiments turn this off to charge every discovery its full
  // fetch-and-parse cost.
  bool memoize_descriptions = true;
};

// The Service Pool: tracks advertised and registered providers, expires them
// by TTL, and turns operation-type queries into freshly created delegates,
// fetching descriptions lazily over GETDESC.
class ServicePool {
 public:
  // Network-attached pool; `self` is the endpoint GETDESC requests originate
  // from and must already be registered on `net` by the host.
  ServicePool(TaxonomyPtr taxonomy, Network* net, Endpoint self, Endpoint group,
              PoolOptions options = {});
  // Registration-only pool (no browsing, no fetches).
  explicit ServicePool(TaxonomyPtr taxonomy);

  // Joins the multicast group and starts the expiry tick. Wire the host
  // node's datagram handler to handle_message(). Throws AlreadyBrowsing.
  void start_browsing(std::uint32_t interval_ms);
  void stop_browsing();
  bool browsing() const { return browsing_; }

  // Feed of ADVERTISE/WITHDRAW datagrams from the network.
  void handle_message(const Datagram& datagram);

  // Local registration; the description is pre-populated so no fetch is ever
  // needed. Throws DuplicateName while an entry of that name is alive.
  void register_service(const ServiceDescription& desc);

  // Names of alive providers whose service type is a descendant-or-equal of
  // `service_type`, sorted lexicographically. Throws UnknownType.
  std::vector<std::string> find_by_service_type(const TypePath& service_type);

  // One delegate per (alive provider, operation matching `op_type`), sorted
  // by (service name, operation name). Fetches missing descriptions over
  // GETDESC; unreachable providers are expired and skipped.
  std::vector<ServiceDelegatePtr> find_by_operation_type(const TypePath& op_type);

  struct Stats {
    std::uint64_t description_fetches = 0;
    std::uint64_t advertisements_seen = 0;
    std::uint64_t withdrawals_seen = 0;
  };
  Stats stats() const;
  std::size_t alive_count() const;
  bool is_alive(const std::string& service_name) const;

  // Expires overdue entries and removes the dead; normally driven by the
  // browse tick.
  void tick();

  static constexpr std::uint64_t kRegisteredTtl = UINT64_MAX;

 private:
  struct Entry {
    Endpoint endpoint;
    TypePath service_type;
    std::uint64_t last_seen_ms = 0;
    std::uint64_t ttl_ms = 0;
    std::int64_t last_seq = -1;  // -1 for registered entries: the network wins
    bool withdrawn = false;
    std::optional<ServiceDescription> description;
  };

  bool alive(const Entry& entry, std::uint64_t clock) const;
  std::uint64_t clock() const;
  std::optional<ServiceDescription> fetch_description(const std::string& name,
                                                      const Endpoint& endpoint);

  TaxonomyPtr taxonomy_;
  Network* net_ = nullptr;
  Endpoint self_;
  Endpoint group_;
  PoolOptions options_;
  bool browsing_ = false;
  std::uint64_t tick_timer_ = 0;
  mutable std::shared_mutex mutex_;
  std::map<std::string, Entry> entries_;
  Stats stats_;
};

}  // namespace mwscm
