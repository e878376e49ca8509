#include "mwscm/mediator.hpp"

#include <algorithm>
#include <fstream>

namespace mwscm {

ServiceCache::ServiceCache(std::uint64_t ttl_ms) : ttl_ms_(ttl_ms) {}

std::optional<std::vector<ServiceDelegatePtr>> ServiceCache::lookup(const TypePath& op_type,
                                                                    std::uint64_t clock) {
  std::lock_guard lock(mutex_);
  auto it = entries_.find(op_type);
  if (it == entries_.end()) return std::nullopt;
  if (clock > it->second.created_at_ms + it->second.ttl_ms) {
    entries_.erase(it);
    return std::nullopt;
  }
  return it->second.delegates;
}

void ServiceCache::update(const TypePath& op_type, std::vector<ServiceDelegatePtr> delegates,
                          std::uint64_t clock) {
  std::lock_guard lock(mutex_);
  Entry entry;
  // an empty list is a negative entry: it hits, but expires sooner
  entry.ttl_ms = delegates.empty() ? ttl_ms_ / 4 : ttl_ms_;
  entry.created_at_ms = clock;
  entry.delegates = std::move(delegates);
  entries_[op_type] = std::move(entry);
}

std::size_t ServiceCache::evict_provider(const std::string& service_name) {
  std::lock_guard lock(mutex_);
  std::size_t touched = 0;
  for (auto it = entries_.begin(); it != entries_.end();) {
    auto& delegates = it->second.delegates;
    auto removed = std::erase_if(delegates, [&](const ServiceDelegatePtr& d) {
      return d->service_name() == service_name;
    });
    if (removed > 0) {
      ++touched;
      if (delegates.empty()) {
        it = entries_.erase(it);
        continue;
      }
    }
    ++it;
  }
  return touched;
}

std::size_t ServiceCache::size() const {
  std::lock_guard lock(mutex_);
  return entries_.size();
}

std::string_view RequestTrace::step_label(int step) {
  switch (step) {
    case 1: return "request-received";
    case 2: return "ca-to-broker";
    case 3: return "broker-normalize";
    case 4: return "broker-to-tm";
    case 5: return "tm-match-plan";
    case 6: return "sc-check";
    case 7: return "sc-hit";
    case 8: return "sp-query";
    case 9: return "sp-return";
    case 10: return "sc-update";
    case 11: return "select-best";
    case 12: return "tm-to-sd";
    case 13: return "sd-to-provider";
    case 14: return "provider-to-sd";
    case 15: return "sd-to-tm";
    case 16: return "tm-finalize";
    case 17: return "tm-to-broker";
    case 18: return "broker-format";
    case 19: return "broker-to-ca";
    case 20: return "ca-respond";
  }
  return "unknown";
}

void RequestTrace::record(int step, std::uint64_t clock_ms, std::string task_id) {
  steps.push_back(TraceStep{step, std::string(step_label(step)), clock_ms, std::move(task_id)});
}

std::string RequestTrace::to_csv() const {
  std::string csv = "step,label,clock_ms,task_id\n";
  for (const auto& step : steps) {
    csv += std::to_string(step.step);
    csv += ',';
    csv += step.label;
    csv += ',';
    csv += std::to_string(step.clock_ms);
    csv += ',';
    csv += step.task_id;
    csv += '\n';
  }
  return csv;
}

void PlanCatalog::add(TaskOrganizationDocument plan) {
  if (plans_.count(plan.request_type))
    throw Error(ErrorCode::ConfigError,
                "duplicate plan for request type '" + plan.request_type + "'");
  auto key = plan.request_type;
  plans_.emplace(std::move(key), std::move(plan));
}

void PlanCatalog::load_directory(const std::filesystem::path& dir,
                                 const OperationTaxonomy& taxonomy) {
  std::vector<std::filesystem::path> paths;
  for (const auto& entry : std::filesystem::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".xml")
      paths.push_back(entry.path());
  std::sort(paths.begin(), paths.end());
  for (const auto& path : paths) {
    std::string content;
    {
      std::ifstream in(path, std::ios::binary);
      if (!in) throw Error(ErrorCode::ConfigError, "cannot read " + path.string());
      content.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
    }
    add(parse_task_document(content, taxonomy));
  }
}

const TaskOrganizationDocument* PlanCatalog::find(std::string_view request_type) const {
  auto it = plans_.find(request_type);
  return it == plans_.end() ? nullptr : &it->second;
}

TaskManager::TaskManager(const PlanCatalog& catalog, ServicePool& pool, ServiceCache& cache,
                         Network& net, Endpoint self)
    : catalog_(catalog), pool_(pool), cache_(cache), net_(net), self_(std::move(self)) {}

ServiceDelegatePtr TaskManager::select_best(const std::vector<ServiceDelegatePtr>& delegates) {
  ServiceDelegatePtr best;
  for (const auto& delegate : delegates) {
    if (!delegate->status().reachable) continue;
    if (!best) {
      best = delegate;
      continue;
    }
    double a = delegate->status().rtt_ewma_ms;
    double b = best->status().rtt_ewma_ms;
    if (a < b || (a == b && delegate->service_name() < best->service_name())) best = delegate;
  }
  if (!best) throw Error(ErrorCode::NoProvider, "no reachable provider");
  return best;
}

Record TaskManager::bind_arguments(const TaskSpec& task, const OperationSignature& op,
                                   const NormalizedRequest& request,
                                   const std::map<std::string, ResultValue>& slots) const {
  Record args;
  for (const auto& [pname, kind] : op.inputs) {
    const InputBinding* binding = nullptr;
    for (const auto& [bname, b] : task.inputs)
      if (bname == pname) {
        binding = &b;
        break;
      }
    if (!binding)
      throw Error(ErrorCode::ArgumentMismatch,
                  "task '" + task.task_id + "' has no binding for param '" + pname + "'");

    std::optional<Scalar> value;
    switch (binding->source) {
      case InputBinding::Source::Literal:
        value = scalar_from_text(binding->value, kind);
        break;
      case InputBinding::Source::RequestField: {
        auto it = request.params.find(binding->value);
        if (it == request.params.end())
          throw Error(ErrorCode::ArgumentMismatch,
                      "request field '" + binding->value + "' is absent");
        value = scalar_from_text(it->second, kind);
        break;
      }
      case InputBinding::Source::TaskSlot: {
        const ResultValue& slot = slots.at(binding->value);
        if (const auto* scalar = std::get_if<Scalar>(&slot)) {
          if (kind_of(*scalar) == kind)
            value = *scalar;
          else
            value = scalar_from_text(scalar_text(*scalar), kind);
        } else if (kind == ScalarKind::String) {
          value = Scalar(record_text(std::get<Record>(slot)));
        }
        break;
      }
    }
    if (!value)
      throw Error(ErrorCode::ArgumentMismatch,
                  "cannot bind param '" + pname + "' as " + std::string(kind_name(kind)));
    args[pname] = std::move(*value);
  }
  return args;
}

namespace {

ResultValue shape_result(const Record& record, const OperationSignature& op,
                         const std::string& service_name) {
  if (!op.output_scalar) return ResultValue(record);
  auto it = record.find("value");
  if (it == record.end() || kind_of(it->second) != *op.output_scalar)
    throw Error(ErrorCode::TaskFault,
                "provider '" + service_name + "' returned a malformed " +
                    std::string(kind_name(*op.output_scalar)) + " result");
  return ResultValue(it->second);
}

}  // namespace

TaskManager::TaskResult TaskManager::run_task(const TaskSpec& task, std::size_t task_index,
                                              const NormalizedRequest& request,
                                              const std::map<std::string, ResultValue>& slots,
                                              RequestTrace& trace,
                                              const CachePolicy& cache_policy) {
  const std::string& id = task.task_id;
  const std::uint64_t task_start = net_.clock_ms();

  bool eligible = !cache_policy || cache_policy(task_index);
  trace.record(6, net_.clock_ms(), id);
  std::optional<std::vector<ServiceDelegatePtr>> cached;
  if (eligible) cached = cache_.lookup(task.op_type, net_.clock_ms());

  std::vector<ServiceDelegatePtr> delegates;
  bool cache_hit = false;
  auto discover = [&] {
    trace.record(8, net_.clock_ms(), id);
    delegates = pool_.find_by_operation_type(task.op_type);
    trace.record(9, net_.clock_ms(), id);
    cache_.update(task.op_type, delegates, net_.clock_ms());
    trace.record(10, net_.clock_ms(), id);
    cache_hit = false;
  };

  if (cached) {
    trace.record(7, net_.clock_ms(), id);
    delegates = std::move(*cached);
    cache_hit = true;
  } else {
    discover();
  }

  bool rediscovered = false;
  while (true) {
    ServiceDelegatePtr chosen;
    try {
      chosen = select_best(delegates);
    } catch (const Error&) {
      if (!rediscovered) {
        rediscovered = true;
        discover();
        continue;
      }
      throw Error(ErrorCode::NoProvider, "task '" + id + "' found no usable provider");
    }
    trace.record(11, net_.clock_ms(), id);

    Record args;
    try {
      args = bind_arguments(task, chosen->operation(), request, slots);
    } catch (const Error& e) {
      throw Error(ErrorCode::TaskFault, "task '" + id + "': " + e.what());
    }

    const std::uint64_t sent_at = net_.clock_ms();
    trace.record(12, sent_at, id);
    try {
      Record result = chosen->invoke(args, net_, self_);
      const std::uint64_t now = net_.clock_ms();
      trace.record(13, sent_at, id);
      trace.record(14, now, id);
      trace.record(15, now, id);
      TaskResult out;
      out.value = shape_result(result, chosen->operation(), chosen->service_name());
      out.provenance =
          ProvenanceEntry{id, chosen->service_name(), now - task_start, cache_hit};
      return out;
    } catch (const Error& e) {
      if (e.code() == ErrorCode::InvocationFault) {
        // the provider answered; the fault is an application error
        const std::uint64_t now = net_.clock_ms();
        trace.record(13, sent_at, id);
        trace.record(14, now, id);
        trace.record(15, now, id);
        throw Error(ErrorCode::TaskFault,
                    "task '" + id + "': provider '" + chosen->service_name() + "': " + e.what());
      }
      if (e.code() == ErrorCode::TransportError) {
        cache_.evict_provider(chosen->service_name());
        if (!rediscovered) {
          rediscovered = true;
          discover();
          continue;
        }
        throw Error(ErrorCode::NoProvider,
                    "task '" + id + "' lost its provider after re-discovery");
      }
      if (e.code() == ErrorCode::TaskFault) throw;
      throw Error(ErrorCode::TaskFault, "task '" + id + "': " + e.what());
    }
  }
}

NormalizedResponse TaskManager::handle_request(const NormalizedRequest& request,
                                               RequestTrace& trace,
                                               const CachePolicy& cache_policy) {
  trace.record(4, net_.clock_ms());
  const TaskOrganizationDocument* plan = catalog_.find(request.request_type);
  trace.record(5, net_.clock_ms());

  NormalizedResponse response;
  if (!plan) {
    response = NormalizedResponse::failure(ErrorCode::UnknownRequestType, request.request_type);
  } else {
    std::map<std::string, ResultValue> slots;
    std::vector<ProvenanceEntry> provenance;
    try {
      for (std::size_t i = 0; i < plan->tasks.size(); ++i) {
        TaskResult result = run_task(plan->tasks[i], i, request, slots, trace, cache_policy);
        slots[plan->tasks[i].output_slot] = std::move(result.value);
        provenance.push_back(std::move(result.provenance));
      }
      response.ok = true;
      response.results = std::move(slots);
      response.provenance = std::move(provenance);
    } catch (const Error& e) {
      response = NormalizedResponse::failure(e.code(), e.what());
    }
  }

  trace.record(16, net_.clock_ms());
  trace.record(17, net_.clock_ms());
  return response;
}

}  // namespace mwscm
