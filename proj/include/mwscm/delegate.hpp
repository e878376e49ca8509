#pragma once

#include <memory>
#include <string>

#include "mwscm/model.hpp"
#include "mwscm/transport.hpp"

namespace mwscm {

// What the Task Manager compares when picking a provider. rtt_ewma_ms == 0
// means "no sample yet"; untried providers sort first.
struct ProviderStatus {
  bool reachable = true;
  double rtt_ewma_ms = 0.0;
  std::uint32_t consecutive_failures = 0;
};

inline constexpr double kRttEwmaAlpha = 0.3;

// Runtime proxy for one operation of one discovered provider. Invoking it
// looks like calling an internal component; the delegate speaks the CALL
// wire format and tracks the provider's observed status.
class ServiceDelegate {
 public:
  ServiceDelegate(std::string service_name, Endpoint endpoint, OperationSignature operation)
      : service_name_(std::move(service_name)),
        endpoint_(std::move(endpoint)),
        operation_(std::move(operation)) {}

  const std::string& service_name() const { return service_name_; }
  const Endpoint& endpoint() const { return endpoint_; }
  const OperationSignature& operation() const { return operation_; }
  const ProviderStatus& status() const { return status_; }

  // Validates args against the signature before touching the network
  // (ArgumentMismatch), then performs one blocking CALL exchange. Throws
  // TransportError on network failure (marks the provider unreachable) and
  // InvocationFault when the provider answers with an application error.
  Record invoke(const Record& args, Network& net, const Endpoint& from);

  void mark_unreachable();

 private:
  std::string service_name_;
  Endpoint endpoint_;
  OperationSignature operation_;
  ProviderStatus status_;
};

using ServiceDelegatePtr = std::shared_ptr<ServiceDelegate>;

// Throws Error(UnknownOperation) when the description lacks `op_name`.
ServiceDelegate create_delegate(const ServiceDescription& desc, std::string_view op_name);

// CALL wire format helpers, shared with the provider host.
// request:  "CALL <operation>\n" + one "name=<pct-encoded value>\n" per arg
// reply:    "200\n" + one "key=<pct-encoded value>\n" per result entry,
//           or "500 <code>\n" for an application fault.
std::string encode_call(const OperationSignature& op, const Record& args);
struct CallRequest {
  std::string operation;
  // Decoded argument text; the receiver types each value against its own
  // signature so string args that look numeric survive the wire.
  std::map<std::string, std::string> args;
};
CallRequest decode_call(const std::string& payload);  // Error(MalformedPayload)
std::string encode_call_ok(const Record& result);
std::string encode_call_fault(std::string_view code);

}  // namespace mwscm
