#include "mwscm/host.hpp"

namespace mwscm {

MediatorHost::MediatorHost(TaxonomyPtr taxonomy, MediatorHostConfig config, Network& net)
    : taxonomy_(std::move(taxonomy)),
      config_(std::move(config)),
      net_(net),
      pool_(taxonomy_, &net_, config_.endpoint, config_.group, config_.pool_options),
      cache_(config_.cache_ttl_ms),
      task_manager_(catalog_, pool_, cache_, net_, config_.endpoint) {
  NodeHandlers handlers;
  handlers.on_datagram = [this](const Datagram& datagram) { pool_.handle_message(datagram); };
  net_.register_node(config_.endpoint, std::move(handlers));
}

MediatorHost::~MediatorHost() {
  try {
    pool_.stop_browsing();
    net_.unregister_node(config_.endpoint);
  } catch (...) {
  }
}

MediatorHost::ClientReply MediatorHost::handle_client(std::string_view raw, ClientFormat format,
                                                      const CachePolicy& cache_policy) {
  ClientReply reply;
  RequestTrace& trace = reply.trace;
  trace.record(1, net_.clock_ms());
  trace.record(2, net_.clock_ms());

  NormalizedRequest request;
  try {
    request = normalize(raw, format);
  } catch (const Error& e) {
    trace.record(3, net_.clock_ms());
    NormalizedResponse response = NormalizedResponse::failure(e.code(), e.what());
    reply.payload = format_response(response, format);
    trace.record(18, net_.clock_ms());
    trace.record(19, net_.clock_ms());
    trace.record(20, net_.clock_ms());
    return reply;
  }
  trace.record(3, net_.clock_ms());

  NormalizedResponse response = task_manager_.handle_request(request, trace, cache_policy);
  reply.ok = response.ok;

  reply.payload = format_response(response, request.client_format);
  trace.record(18, net_.clock_ms());
  trace.record(19, net_.clock_ms());
  trace.record(20, net_.clock_ms());
  return reply;
}

}  // namespace mwscm
