#include "mwscm/errors.hpp"

namespace mwscm {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::MalformedDocument: return "MalformedDocument";
    case ErrorCode::DuplicateSibling: return "DuplicateSibling";
    case ErrorCode::MultipleRoots: return "MultipleRoots";
    case ErrorCode::UnknownType: return "UnknownType";
    case ErrorCode::NoOperations: return "NoOperations";
    case ErrorCode::ForwardReference: return "ForwardReference";
    case ErrorCode::DuplicateTaskId: return "DuplicateTaskId";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::UnknownNode: return "UnknownNode";
    case ErrorCode::PayloadTooLarge: return "PayloadTooLarge";
    case ErrorCode::TransportError: return "TransportError";
    case ErrorCode::AlreadyBrowsing: return "AlreadyBrowsing";
    case ErrorCode::DuplicateName: return "DuplicateName";
    case ErrorCode::UnknownOperation: return "UnknownOperation";
    case ErrorCode::ArgumentMismatch: return "ArgumentMismatch";
    case ErrorCode::InvocationFault: return "InvocationFault";
    case ErrorCode::UnknownRequestType: return "UnknownRequestType";
    case ErrorCode::NoProvider: return "NoProvider";
    case ErrorCode::TaskFault: return "TaskFault";
    case ErrorCode::MalformedPayload: return "MalformedPayload";
    case ErrorCode::MissingRequestType: return "MissingRequestType";
    case ErrorCode::EndpointInUse: return "EndpointInUse";
    case ErrorCode::NotRunning: return "NotRunning";
    case ErrorCode::ScenarioParseError: return "ScenarioParseError";
  }
  return "UnknownError";
}

}  // namespace mwscm
