#pragma once

#include <memory>
#include <string>
#include <utility>

#include "mwscm/broker.hpp"
#include "mwscm/mediator.hpp"

namespace mwscm {

struct MediatorHostConfig {
  Endpoint endpoint{Scheme::Sim, "mediator", 70};
  Endpoint group = default_group(Scheme::Sim);
  std::uint32_t browse_interval_ms = 100;
  std::uint64_t cache_ttl_ms = 30'000;
  PoolOptions pool_options{};
};

// One mediator node: client-application gateway, broker, task manager,
// service pool and service cache wired onto a network endpoint.
class MediatorHost {
 public:
  MediatorHost(TaxonomyPtr taxonomy, MediatorHostConfig config, Network& net);
  ~MediatorHost();

  MediatorHost(const MediatorHost&) = delete;
  MediatorHost& operator=(const MediatorHost&) = delete;

  PlanCatalog& catalog() { return catalog_; }
  ServicePool& pool() { return pool_; }
  ServiceCache& cache() { return cache_; }
  TaskManager& task_manager() { return task_manager_; }
  const TaxonomyPtr& taxonomy() const { return taxonomy_; }
  const MediatorHostConfig& config() const { return config_; }

  void start_browsing() { pool_.start_browsing(config_.browse_interval_ms); }

  struct ClientReply {
    std::string payload;
    RequestTrace trace;
    bool ok = false;
  };

  // The whole request-handling sequence: receive (1-2), normalize (3),
  // mediate (4-17), format (18-19), respond (20). Always returns a response
  // payload in the client's format, errors included.
  ClientReply handle_client(std::string_view raw, ClientFormat format,
                            const CachePolicy& cache_policy = {});

 private:
  TaxonomyPtr taxonomy_;
  MediatorHostConfig config_;
  Network& net_;
  PlanCatalog catalog_;
  ServicePool pool_;
  ServiceCache cache_;
  TaskManager task_manager_;
};

}  // namespace mwscm
