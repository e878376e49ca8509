#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mwscm {

enum class ErrorCode {
  // document parsing
  MalformedDocument,
  DuplicateSibling,
  MultipleRoots,
  UnknownType,
  NoOperations,
  ForwardReference,
  DuplicateTaskId,
  // transport
  ConfigError,
  UnknownNode,
  PayloadTooLarge,
  TransportError,
  // discovery
  AlreadyBrowsing,
  DuplicateName,
  // delegates
  UnknownOperation,
  ArgumentMismatch,
  InvocationFault,
  // mediation
  UnknownRequestType,
  NoProvider,
  TaskFault,
  // broker
  MalformedPayload,
  MissingRequestType,
  // providers
  EndpointInUse,
  NotRunning,
  // harness
  ScenarioParseError,
};

std::string_view error_code_name(ErrorCode code);

// Every failure in the library surfaces as an Error carrying one of the codes
// above; tests and the wire formats match on the code, the message is detail.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(std::string(error_code_name(code)) +
                           (detail.empty() ? "" : ": " + detail)),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace mwscm
