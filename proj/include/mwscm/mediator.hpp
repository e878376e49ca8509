#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "mwscm/delegate.hpp"
#include "mwscm/discovery.hpp"
#include "mwscm/model.hpp"

namespace mwscm {

// Operation-type-keyed cache of delegate lists. Keys are the exact queried
// path (subtype reasoning happens at pool-query time only). An empty list is
// a valid negative entry and lives ttl/4.
class ServiceCache {
 public:
  explicit ServiceCache(std::uint64_t ttl_ms = 30'000);

  std::optional<std::vector<ServiceDelegatePtr>> lookup(const TypePath& op_type,
                                                        std::uint64_t clock);
  void update(const TypePath& op_type, std::vector<ServiceDelegatePtr> delegates,
              std::uint64_t clock);
  // Removes the provider's delegates from every entry; entries left empty by
  // the eviction are deleted. Returns how many entries were touched.
  std::size_t evict_provider(const std::string& service_name);

  std::size_t size() const;
  std::uint64_t ttl_ms() const { return ttl_ms_; }

 private:
  struct Entry {
    std::vector<ServiceDelegatePtr> delegates;
    std::uint64_t created_at_ms = 0;
    std::uint64_t ttl_ms = 0;
  };

  std::uint64_t ttl_ms_;
  mutable std::mutex mutex_;
  std::map<TypePath, Entry> entries_;
};

// The request-handling sequence has twenty numbered steps; the trace records
// every step taken with its virtual clock and, for the per-task block (6-15),
// the task id.
struct TraceStep {
  int step = 0;
  std::string label;
  std::uint64_t clock_ms = 0;
  std::string task_id;
};

struct RequestTrace {
  std::vector<TraceStep> steps;

  void record(int step, std::uint64_t clock_ms, std::string task_id = {});
  // CSV with header "step,label,clock_ms,task_id".
  std::string to_csv() const;
  static std::string_view step_label(int step);
};

// request_type -> plan. Duplicate keys are a configuration error.
class PlanCatalog {
 public:
  void add(TaskOrganizationDocument plan);  // Error(ConfigError) on duplicate
  // Loads every *.xml in `dir` as a task document.
  void load_directory(const std::filesystem::path& dir, const OperationTaxonomy& taxonomy);
  const TaskOrganizationDocument* find(std::string_view request_type) const;
  std::size_t size() const { return plans_.size(); }

 private:
  std::map<std::string, TaskOrganizationDocument, std::less<>> plans_;
};

// Experiment knob: which task indices may consult the Service Cache. Tasks
// outside the policy treat the cache check as a miss.
using CachePolicy = std::function<bool(std::size_t task_index)>;

// Decomposes a normalized request into its plan's tasks, resolves each task
// to the best provider (cache first, pool on miss), invokes it, and collects
// the composite result. Emits trace steps 4-17.
class TaskManager {
 public:
  TaskManager(const PlanCatalog& catalog, ServicePool& pool, ServiceCache& cache, Network& net,
              Endpoint self);

  NormalizedResponse handle_request(const NormalizedRequest& request, RequestTrace& trace,
                                    const CachePolicy& cache_policy = {});

  // Among reachable delegates, minimum rtt_ewma (0 = untried sorts first),
  // ties by smallest service name. Throws Error(NoProvider).
  static ServiceDelegatePtr select_best(const std::vector<ServiceDelegatePtr>& delegates);

 private:
  struct TaskResult {
    ResultValue value;
    ProvenanceEntry provenance;
  };

  TaskResult run_task(const TaskSpec& task, std::size_t task_index,
                      const NormalizedRequest& request,
                      const std::map<std::string, ResultValue>& slots, RequestTrace& trace,
                      const CachePolicy& cache_policy);
  Record bind_arguments(const TaskSpec& task, const OperationSignature& op,
                        const NormalizedRequest& request,
                        const std::map<std::string, ResultValue>& slots) const;

  const PlanCatalog& catalog_;
  ServicePool& pool_;
  ServiceCache& cache_;
  Network& net_;
  Endpoint self_;
};

}  // namespace mwscm
