#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "mwscm/discovery.hpp"
#include "mwscm/model.hpp"
#include "mwscm/transport.hpp"

namespace mwscm {

// What one Mobile Bazaar Vendor offers.
struct VendorCatalog {
  std::vector<std::string> items;
  std::vector<std::string> genres;
  std::vector<std::string> trading_times;
};

struct VendorEntry {
  std::string name;
  VendorCatalog catalog;
};

// 0.5 for a genre hit plus 0.5 for a trading-time hit.
double vendor_match(const VendorCatalog& catalog, const std::string& genre,
                    const std::string& trading_time);

// Exhaustive scoring; ties broken by the lexicographically smallest name.
// `entries` must be non-empty.
const VendorEntry& best_vendor(const std::vector<VendorEntry>& entries,
                               const std::string& genre, const std::string& trading_time);

// Per-operation behaviour of a hosted provider:
//   fixture        — replies with a fixed record on every call
//   fault          — replies "500 <code>"
//   vendor-catalog — offer mode serves the first entry's catalog, recommend
//                    mode picks the best-matching entry for the preferences
struct HandlerSpec {
  enum class Kind { Fixture, Fault, VendorOffer, VendorRecommend };
  Kind kind = Kind::Fixture;
  Record fixture;
  std::string fault_code;
  std::vector<VendorEntry> vendors;
};

// Sidecar file, one line per operation:
//   <op>=fixture:key=value,key=value,...
//   <op>=fault:<code>
//   <op>=vendor-catalog:offer;name=a,genres=x|y,times=t1|t2,items=i1|i2
//   <op>=vendor-catalog:recommend;name=a,genres=...;name=b,...
std::map<std::string, HandlerSpec> parse_handlers(std::string_view text);

struct ProviderConfig {
  ServiceDescription description;
  std::string description_raw;  // served byte-identical over GETDESC
  std::map<std::string, HandlerSpec> handlers;
  std::uint32_t advertise_ttl_s = 30;
};

// Loads a description document plus its handler sidecar; throws ConfigError
// when a described operation lacks a handler.
ProviderConfig load_provider_config(const std::filesystem::path& description_path,
                                    const std::filesystem::path& handlers_path,
                                    const OperationTaxonomy& taxonomy);
ProviderConfig make_provider_config(ServiceDescription desc,
                                    std::map<std::string, HandlerSpec> handlers,
                                    std::uint32_t advertise_ttl_s = 30);

// Hosts one provider on the network: serves GETDESC and CALL, advertises on
// start and every ttl/2 after, withdraws on stop.
class ProviderHost {
 public:
  ProviderHost(ProviderConfig config, Network& net, Endpoint group);
  ~ProviderHost();

  ProviderHost(const ProviderHost&) = delete;
  ProviderHost& operator=(const ProviderHost&) = delete;

  void start();  // Error(EndpointInUse)
  void stop();   // Error(NotRunning)
  bool running() const { return running_; }

  const ProviderConfig& config() const { return config_; }
  std::uint64_t advertisements_sent() const { return advertisements_sent_; }

 private:
  void advertise();
  std::string handle_request(const std::string& payload, const Endpoint& from);
  Record evaluate(const HandlerSpec& handler, const Record& args, std::string& fault_code) const;

  ProviderConfig config_;
  Network& net_;
  Endpoint group_;
  bool running_ = false;
  std::uint64_t seq_ = 0;
  std::uint64_t timer_ = 0;
  std::uint64_t advertisements_sent_ = 0;
};

}  // namespace mwscm
