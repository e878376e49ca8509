#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace mwscm::xml {

// Minimal XML subset shared by all document kinds: elements with attributes
// and child elements only. No text nodes, comments, PIs or namespaces; an
// optional leading <?xml ...?> declaration is tolerated and dropped.
struct Node {
  std::string name;
  std::vector<std::pair<std::string, std::string>> attrs;
  std::vector<Node> children;

  const std::string* attr(std::string_view key) const;
};

// Throws Error(MalformedDocument) on anything outside the subset.
Node parse(std::string_view document);

// Compact canonical form: no whitespace between elements, attributes in
// stored order, self-closing tags for leaves.
void write(std::string& out, const Node& node);
std::string to_string(const Node& node);

std::string escape_attr(std::string_view raw);

// True when `name` is a legal element/attribute name in this subset.
bool is_valid_name(std::string_view name);

}  // namespace mwscm::xml
