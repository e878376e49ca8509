#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace mwscm::text {

// RFC 3986 percent-encoding; unreserved characters kept verbatim, space is
// %20 and '+' has no special meaning on either side.
std::string pct_encode(std::string_view raw);
// Returns false on a malformed escape.
bool pct_decode(std::string_view raw, std::string& out);

std::vector<std::string_view> split(std::string_view s, char sep);

// Splits "key=value" at the first '='; returns false when '=' is absent.
bool split_kv(std::string_view line, std::string_view& key, std::string_view& value);

}  // namespace mwscm::text
