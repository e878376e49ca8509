#pragma once

#include <string>
#include <string_view>

#include "mwscm/model.hpp"

namespace mwscm {

// Decodes a client payload into the mediator's common request form. The
// request type comes from the `type` field, every other field becomes a
// param. Throws MalformedPayload / MissingRequestType.
NormalizedRequest normalize(std::string_view raw, ClientFormat format);

// Canonical client-side encoding of a request; inverse of normalize() and
// used by round-trip tests. Throws MalformedPayload when a param is named
// `type` (reserved for the request type).
std::string format_request(const NormalizedRequest& request, ClientFormat format);

// Deterministic response encoding. Result slots flatten to `slot` for a
// scalar and `slot.field` for record fields; all keys sort lexicographically
// (XML keeps status/code as leading attributes per the canonical form).
std::string format_response(const NormalizedResponse& response, ClientFormat format);

std::string_view client_format_name(ClientFormat format);
std::optional<ClientFormat> client_format_from_name(std::string_view name);

}  // namespace mwscm
