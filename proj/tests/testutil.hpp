#pragma once

#include <memory>
#include <random>
#include <string>
#include <vector>

#include "mwscm/model.hpp"

namespace mwscm::testutil {

inline TaxonomyPtr demo_taxonomy() {
  // root op: positioning{gps,indoor}, media{dvd-catalog}, bazaar{vendor,offer,recommend}
  OperationTaxonomy::Node root{
      "op",
      {
          {"positioning", {{"gps", {}}, {"indoor", {}}}},
          {"media", {{"dvd-catalog", {}}}},
          {"bazaar", {{"vendor", {}}, {"offer", {}}, {"recommend", {}}}},
      }};
  return std::make_shared<OperationTaxonomy>(std::move(root));
}

inline ServiceDescription gps_description() {
  ServiceDescription desc;
  desc.service_name = "gps-1";
  desc.service_type = TypePath::parse("positioning");
  desc.endpoint = Endpoint::parse("sim://gps-1:80");
  desc.binding = ServiceBinding::Rest;
  OperationSignature locate;
  locate.name = "locate";
  locate.op_type = TypePath::parse("positioning/gps");
  locate.inputs = {{"user", ScalarKind::String}};
  locate.output_scalar = std::nullopt;  // record
  desc.operations.push_back(std::move(locate));
  return desc;
}

// Lowercase identifier from a seeded generator, for fuzz-ish round trips.
inline std::string random_name(std::mt19937_64& rng, std::size_t min_len = 1,
                               std::size_t max_len = 8) {
  static const char alphabet[] = "abcdefghijklmnopqrstuvwxyz0123456789-";
  std::uniform_int_distribution<std::size_t> len(min_len, max_len);
  std::uniform_int_distribution<std::size_t> pick(0, sizeof(alphabet) - 2);
  std::string out;
  std::size_t n = len(rng);
  for (std::size_t i = 0; i < n; ++i) out += alphabet[pick(rng)];
  if (out.front() == '-') out.front() = 'a';
  return out;
}

// Printable-ASCII value text including the characters every codec must escape.
inline std::string random_value(std::mt19937_64& rng, std::size_t max_len = 12) {
  static const char alphabet[] =
      "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789 &<>\"'%=+/?#.~";
  std::uniform_int_distribution<std::size_t> len(0, max_len);
  std::uniform_int_distribution<std::size_t> pick(0, sizeof(alphabet) - 2);
  std::string out;
  std::size_t n = len(rng);
  for (std::size_t i = 0; i < n; ++i) out += alphabet[pick(rng)];
  return out;
}

}  // namespace mwscm::testutil
