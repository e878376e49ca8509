#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mwscm/endpoint.hpp"
#include "mwscm/errors.hpp"
#include "mwscm/values.hpp"

namespace mwscm {

// Slash-separated position in the operation-type tree, e.g. "positioning/gps".
// Segments are resolved against the children of the taxonomy root; the root's
// own name is not a segment.
struct TypePath {
  std::vector<std::string> segments;

  // Validates `[a-z0-9-]+` segments, at least one. Throws Error(MalformedDocument).
  static TypePath parse(std::string_view path);
  std::string str() const;

  auto operator<=>(const TypePath&) const = default;
};

// The tree-based model of operation types, loaded from an XML document with a
// single root <type>.
class OperationTaxonomy {
 public:
  struct Node {
    std::string name;
    std::vector<Node> children;
  };

  explicit OperationTaxonomy(Node root) : root_(std::move(root)) {}

  const Node& root() const { return root_; }
  bool resolves(const TypePath& path) const;
  std::size_t node_count() const;

 private:
  const Node* walk(const TypePath& path) const;
  Node root_;
};

using TaxonomyPtr = std::shared_ptr<const OperationTaxonomy>;

OperationTaxonomy parse_taxonomy(std::string_view document);
std::string serialize_taxonomy(const OperationTaxonomy& taxonomy);

// True iff `requested` is a prefix of `candidate` (descendant-or-equal).
// Throws Error(UnknownType) when either path does not resolve.
bool is_subtype(const TypePath& candidate, const TypePath& requested,
                const OperationTaxonomy& taxonomy);

struct OperationSignature {
  std::string name;
  TypePath op_type;
  std::vector<std::pair<std::string, ScalarKind>> inputs;  // ordered params
  std::optional<ScalarKind> output_scalar;                 // nullopt -> record output

  bool operator==(const OperationSignature&) const = default;
};

enum class ServiceBinding { Rest, Socket };

struct ServiceDescription {
  std::string service_name;
  TypePath service_type;
  Endpoint endpoint;
  ServiceBinding binding = ServiceBinding::Rest;
  std::vector<OperationSignature> operations;

  const OperationSignature* find_operation(std::string_view name) const;

  bool operator==(const ServiceDescription&) const = default;
};

ServiceDescription parse_service_description(std::string_view document,
                                             const OperationTaxonomy& taxonomy);
std::string serialize_service_description(const ServiceDescription& desc);

// Where one task input takes its value from.
struct InputBinding {
  enum class Source { Literal, RequestField, TaskSlot };
  Source source = Source::Literal;
  std::string value;  // literal text, request field name, or slot name

  bool operator==(const InputBinding&) const = default;
};

struct TaskSpec {
  std::string task_id;
  TypePath op_type;
  std::vector<std::pair<std::string, InputBinding>> inputs;  // param name -> binding
  std::string output_slot;

  bool operator==(const TaskSpec&) const = default;
};

// Ordered plan for one request type; tasks execute strictly in written order.
struct TaskOrganizationDocument {
  std::string request_type;
  std::vector<TaskSpec> tasks;

  bool operator==(const TaskOrganizationDocument&) const = default;
};

TaskOrganizationDocument parse_task_document(std::string_view document,
                                             const OperationTaxonomy& taxonomy);
std::string serialize_task_document(const TaskOrganizationDocument& doc);

enum class ClientFormat { Urlencoded, Xml, Json };

struct NormalizedRequest {
  std::string request_type;
  std::map<std::string, std::string> params;
  ClientFormat client_format = ClientFormat::Urlencoded;

  bool operator==(const NormalizedRequest&) const = default;
};

struct ProvenanceEntry {
  std::string task_id;
  std::string service_name;
  std::uint64_t elapsed_ms = 0;
  bool cache_hit = false;
};

struct NormalizedResponse {
  bool ok = true;
  ErrorCode error = ErrorCode::TaskFault;  // meaningful only when !ok
  std::string error_detail;
  std::map<std::string, ResultValue> results;  // output_slot -> value
  std::vector<ProvenanceEntry> provenance;

  static NormalizedResponse failure(ErrorCode code, std::string detail);
};

}  // namespace mwscm
