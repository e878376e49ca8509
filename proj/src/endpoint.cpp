#include "mwscm/endpoint.hpp"

#include <charconv>

#include "mwscm/errors.hpp"

namespace mwscm {

std::string Endpoint::str() const {
  std::string out;
  switch (scheme) {
    case Scheme::Sim: out = "sim://"; break;
    case Scheme::Udp: out = "udp://"; break;
    case Scheme::Tcp: out = "tcp://"; break;
  }
  out += host;
  out += ':';
  out += std::to_string(port);
  return out;
}

Endpoint Endpoint::parse(std::string_view text) {
  auto fail = [&] { throw Error(ErrorCode::MalformedDocument, "bad endpoint '" + std::string(text) + "'"); };

  Endpoint ep;
  auto sep = text.find("://");
  if (sep == std::string_view::npos) fail();
  auto scheme = text.substr(0, sep);
  if (scheme == "sim") ep.scheme = Scheme::Sim;
  else if (scheme == "udp") ep.scheme = Scheme::Udp;
  else if (scheme == "tcp") ep.scheme = Scheme::Tcp;
  else fail();

  auto rest = text.substr(sep + 3);
  auto colon = rest.rfind(':');
  if (colon == std::string_view::npos || colon == 0) fail();
  ep.host = std::string(rest.substr(0, colon));

  auto port_text = rest.substr(colon + 1);
  unsigned port = 0;
  auto [ptr, ec] = std::from_chars(port_text.data(), port_text.data() + port_text.size(), port);
  if (ec != std::errc() || ptr != port_text.data() + port_text.size()) fail();
  if (port < 1 || port > 65535) fail();
  ep.port = static_cast<std::uint16_t>(port);
  return ep;
}

}  // namespace mwscm
