#include "mwscm/delegate.hpp"

#include "text.hpp"

namespace mwscm {

ServiceDelegate create_delegate(const ServiceDescription& desc, std::string_view op_name) {
  const OperationSignature* op = desc.find_operation(op_name);
  if (!op)
    throw Error(ErrorCode::UnknownOperation,
                "'" + std::string(op_name) + "' on service '" + desc.service_name + "'");
  return ServiceDelegate(desc.service_name, desc.endpoint, *op);
}

std::string encode_call(const OperationSignature& op, const Record& args) {
  std::string payload = "CALL " + op.name + "\n";
  for (const auto& [pname, kind] : op.inputs) {
    payload += pname;
    payload += '=';
    payload += text::pct_encode(scalar_text(args.at(pname)));
    payload += '\n';
  }
  return payload;
}

CallRequest decode_call(const std::string& payload) {
  auto lines = text::split(payload, '\n');
  if (lines.empty() || lines.front().rfind("CALL ", 0) != 0)
    throw Error(ErrorCode::MalformedPayload, "missing CALL line");
  CallRequest req;
  req.operation = std::string(lines.front().substr(5));
  if (req.operation.empty()) throw Error(ErrorCode::MalformedPayload, "empty operation name");
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    std::string_view key, value;
    if (!text::split_kv(lines[i], key, value))
      throw Error(ErrorCode::MalformedPayload, "bad arg line");
    std::string decoded;
    if (!text::pct_decode(value, decoded))
      throw Error(ErrorCode::MalformedPayload, "bad arg encoding");
    req.args[std::string(key)] = std::move(decoded);
  }
  return req;
}

std::string encode_call_ok(const Record& result) {
  std::string payload = "200\n";
  for (const auto& [key, value] : result) {
    payload += key;
    payload += '=';
    payload += text::pct_encode(scalar_text(value));
    payload += '\n';
  }
  return payload;
}

std::string encode_call_fault(std::string_view code) {
  return "500 " + std::string(code) + "\n";
}

namespace {

// Returns the fault code for 500 replies, fills `result` for 200 replies.
// Anything else is a protocol violation surfaced as TransportError.
std::optional<std::string> decode_call_reply(const std::string& payload, Record& result) {
  auto lines = text::split(payload, '\n');
  if (lines.empty()) throw Error(ErrorCode::TransportError, "empty reply");
  if (lines.front().rfind("500", 0) == 0) {
    auto rest = lines.front().size() > 4 ? lines.front().substr(4) : std::string_view{};
    return std::string(rest.empty() ? "InvocationFault" : rest);
  }
  if (lines.front() != "200") throw Error(ErrorCode::TransportError, "malformed reply status");
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    std::string_view key, value;
    if (!text::split_kv(lines[i], key, value))
      throw Error(ErrorCode::TransportError, "malformed reply line");
    std::string decoded;
    if (!text::pct_decode(value, decoded))
      throw Error(ErrorCode::TransportError, "malformed reply encoding");
    result[std::string(key)] = sniff_scalar(decoded);
  }
  return std::nullopt;
}

}  // namespace

void ServiceDelegate::mark_unreachable() {
  status_.reachable = false;
  ++status_.consecutive_failures;
}

Record ServiceDelegate::invoke(const Record& args, Network& net, const Endpoint& from) {
  // pre-flight: every declared input, matching kind, nothing extra
  if (args.size() != operation_.inputs.size())
    throw Error(ErrorCode::ArgumentMismatch,
                "operation '" + operation_.name + "' takes " +
                    std::to_string(operation_.inputs.size()) + " args, got " +
                    std::to_string(args.size()));
  for (const auto& [pname, kind] : operation_.inputs) {
    auto it = args.find(pname);
    if (it == args.end())
      throw Error(ErrorCode::ArgumentMismatch, "missing arg '" + pname + "'");
    if (kind_of(it->second) != kind)
      throw Error(ErrorCode::ArgumentMismatch,
                  "arg '" + pname + "' must be " + std::string(kind_name(kind)));
  }

  std::string payload = encode_call(operation_, args);
  std::uint64_t started = net.clock_ms();
  std::string reply;
  try {
    reply = net.request(from, endpoint_, std::move(payload), RequestClass::Call);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::TransportError) mark_unreachable();
    throw;
  }

  Record result;
  std::optional<std::string> fault;
  try {
    fault = decode_call_reply(reply, result);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::TransportError) mark_unreachable();
    throw;
  }

  // the exchange round-tripped: update the status observables
  double sample = static_cast<double>(net.clock_ms() - started);
  status_.rtt_ewma_ms = status_.rtt_ewma_ms == 0.0
                            ? sample
                            : kRttEwmaAlpha * sample + (1.0 - kRttEwmaAlpha) * status_.rtt_ewma_ms;
  status_.reachable = true;
  status_.consecutive_failures = 0;

  if (fault) throw Error(ErrorCode::InvocationFault, *fault);
  return result;
}

}  // namespace mwscm
