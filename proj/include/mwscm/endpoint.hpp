#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace mwscm {

enum class Scheme { Sim, Udp, Tcp };

// Network address of a node: sim://host:port on the simulator,
// udp:// or tcp:// on the live transport. The scheme decides which
// transport serves the endpoint.
struct Endpoint {
  Scheme scheme = Scheme::Sim;
  std::string host;
  std::uint16_t port = 0;

  std::string str() const;

  // Accepts exactly "scheme://host:port", port 1-65535.
  // Throws Error(MalformedDocument) otherwise.
  static Endpoint parse(std::string_view text);

  auto operator<=>(const Endpoint&) const = default;
};

}  // namespace mwscm
