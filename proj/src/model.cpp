#include "mwscm/model.hpp"

#include <algorithm>
#include <set>

#include "text.hpp"
#include "xml.hpp"

namespace mwscm {

namespace {

bool type_segment_ok(std::string_view seg) {
  if (seg.empty()) return false;
  for (char c : seg)
    if (!((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '-')) return false;
  return true;
}

[[noreturn]] void malformed(const std::string& what) {
  throw Error(ErrorCode::MalformedDocument, what);
}

const std::string& require_attr(const xml::Node& node, std::string_view key) {
  const std::string* v = node.attr(key);
  if (!v) malformed("<" + node.name + "> missing attribute '" + std::string(key) + "'");
  return *v;
}

}  // namespace

TypePath TypePath::parse(std::string_view path) {
  TypePath out;
  for (auto seg : text::split(path, '/')) {
    if (!type_segment_ok(seg)) malformed("bad type path '" + std::string(path) + "'");
    out.segments.emplace_back(seg);
  }
  return out;
}

std::string TypePath::str() const {
  std::string out;
  for (const auto& seg : segments) {
    if (!out.empty()) out += '/';
    out += seg;
  }
  return out;
}

const OperationTaxonomy::Node* OperationTaxonomy::walk(const TypePath& path) const {
  const Node* node = &root_;
  for (const auto& seg : path.segments) {
    const Node* next = nullptr;
    for (const auto& child : node->children)
      if (child.name == seg) {
        next = &child;
        break;
      }
    if (!next) return nullptr;
    node = next;
  }
  return node;
}

bool OperationTaxonomy::resolves(const TypePath& path) const {
  return !path.segments.empty() && walk(path) != nullptr;
}

namespace {

std::size_t count_nodes(const OperationTaxonomy::Node& node) {
  std::size_t n = 1;
  for (const auto& child : node.children) n += count_nodes(child);
  return n;
}

}  // namespace

std::size_t OperationTaxonomy::node_count() const { return count_nodes(root_); }

namespace {

OperationTaxonomy::Node read_type_node(const xml::Node& element) {
  if (element.name != "type") malformed("expected <type>, got <" + element.name + ">");
  OperationTaxonomy::Node node;
  node.name = require_attr(element, "name");
  if (!type_segment_ok(node.name)) malformed("bad type name '" + node.name + "'");
  std::set<std::string> seen;
  for (const auto& child : element.children) {
    auto parsed = read_type_node(child);
    if (!seen.insert(parsed.name).second)
      throw Error(ErrorCode::DuplicateSibling,
                  "'" + parsed.name + "' repeated under '" + node.name + "'");
    node.children.push_back(std::move(parsed));
  }
  return node;
}

}  // namespace

OperationTaxonomy parse_taxonomy(std::string_view document) {
  xml::Node root = xml::parse(document);
  if (root.name != "taxonomy") malformed("root element must be <taxonomy>");
  if (root.children.empty()) malformed("taxonomy has no root type");
  if (root.children.size() > 1)
    throw Error(ErrorCode::MultipleRoots,
                std::to_string(root.children.size()) + " top-level types");
  return OperationTaxonomy(read_type_node(root.children.front()));
}

namespace {

xml::Node type_to_xml(const OperationTaxonomy::Node& node) {
  xml::Node out;
  out.name = "type";
  out.attrs.emplace_back("name", node.name);
  for (const auto& child : node.children) out.children.push_back(type_to_xml(child));
  return out;
}

}  // namespace

std::string serialize_taxonomy(const OperationTaxonomy& taxonomy) {
  xml::Node root;
  root.name = "taxonomy";
  root.children.push_back(type_to_xml(taxonomy.root()));
  return xml::to_string(root);
}

bool is_subtype(const TypePath& candidate, const TypePath& requested,
                const OperationTaxonomy& taxonomy) {
  if (!taxonomy.resolves(candidate))
    throw Error(ErrorCode::UnknownType, "'" + candidate.str() + "'");
  if (!taxonomy.resolves(requested))
    throw Error(ErrorCode::UnknownType, "'" + requested.str() + "'");
  if (requested.segments.size() > candidate.segments.size()) return false;
  return std::equal(requested.segments.begin(), requested.segments.end(),
                    candidate.segments.begin());
}

const OperationSignature* ServiceDescription::find_operation(std::string_view name) const {
  for (const auto& op : operations)
    if (op.name == name) return &op;
  return nullptr;
}

namespace {

TypePath parse_checked_type(const std::string& raw, const OperationTaxonomy& taxonomy) {
  TypePath path = TypePath::parse(raw);
  if (!taxonomy.resolves(path)) throw Error(ErrorCode::UnknownType, "'" + raw + "'");
  return path;
}

OperationSignature read_operation(const xml::Node& element, const OperationTaxonomy& taxonomy) {
  if (element.name != "operation") malformed("expected <operation>, got <" + element.name + ">");
  OperationSignature op;
  op.name = require_attr(element, "name");
  op.op_type = parse_checked_type(require_attr(element, "type"), taxonomy);
  bool saw_output = false;
  std::set<std::string> param_names;
  for (const auto& child : element.children) {
    if (child.name == "input") {
      if (saw_output) malformed("<input> after <output> in operation '" + op.name + "'");
      const auto& pname = require_attr(child, "name");
      if (!param_names.insert(pname).second)
        malformed("duplicate param '" + pname + "' in operation '" + op.name + "'");
      auto kind = kind_from_name(require_attr(child, "kind"));
      if (!kind) malformed("bad input kind in operation '" + op.name + "'");
      op.inputs.emplace_back(pname, *kind);
    } else if (child.name == "output") {
      if (saw_output) malformed("multiple <output> in operation '" + op.name + "'");
      saw_output = true;
      const auto& kind_text = require_attr(child, "kind");
      if (kind_text != "record") {
        auto kind = kind_from_name(kind_text);
        if (!kind) malformed("bad output kind '" + kind_text + "'");
        op.output_scalar = *kind;
      }
    } else {
      malformed("unexpected <" + child.name + "> in <operation>");
    }
  }
  if (!saw_output) malformed("operation '" + op.name + "' has no <output>");
  return op;
}

}  // namespace

ServiceDescription parse_service_description(std::string_view document,
                                             const OperationTaxonomy& taxonomy) {
  xml::Node root = xml::parse(document);
  if (root.name != "service") malformed("root element must be <service>");

  ServiceDescription desc;
  desc.service_name = require_attr(root, "name");
  if (desc.service_name.empty()) malformed("empty service name");
  desc.service_type = parse_checked_type(require_attr(root, "type"), taxonomy);
  desc.endpoint = Endpoint::parse(require_attr(root, "endpoint"));
  const auto& binding = require_attr(root, "binding");
  if (binding == "rest") desc.binding = ServiceBinding::Rest;
  else if (binding == "socket") desc.binding = ServiceBinding::Socket;
  else malformed("bad binding '" + binding + "'");

  std::set<std::string> op_names;
  for (const auto& child : root.children) {
    auto op = read_operation(child, taxonomy);
    if (!op_names.insert(op.name).second)
      malformed("duplicate operation '" + op.name + "'");
    desc.operations.push_back(std::move(op));
  }
  if (desc.operations.empty())
    throw Error(ErrorCode::NoOperations, "service '" + desc.service_name + "'");
  return desc;
}

std::string serialize_service_description(const ServiceDescription& desc) {
  xml::Node root;
  root.name = "service";
  root.attrs.emplace_back("name", desc.service_name);
  root.attrs.emplace_back("type", desc.service_type.str());
  root.attrs.emplace_back("endpoint", desc.endpoint.str());
  root.attrs.emplace_back("binding", desc.binding == ServiceBinding::Rest ? "rest" : "socket");
  for (const auto& op : desc.operations) {
    xml::Node op_node;
    op_node.name = "operation";
    op_node.attrs.emplace_back("name", op.name);
    op_node.attrs.emplace_back("type", op.op_type.str());
    for (const auto& [pname, kind] : op.inputs) {
      xml::Node in;
      in.name = "input";
      in.attrs.emplace_back("name", pname);
      in.attrs.emplace_back("kind", std::string(kind_name(kind)));
      op_node.children.push_back(std::move(in));
    }
    xml::Node out;
    out.name = "output";
    out.attrs.emplace_back("kind", op.output_scalar ? std::string(kind_name(*op.output_scalar))
                                                    : "record");
    op_node.children.push_back(std::move(out));
    root.children.push_back(std::move(op_node));
  }
  return xml::to_string(root);
}

namespace {

InputBinding parse_binding(const std::string& raw) {
  InputBinding b;
  if (raw.rfind("request:", 0) == 0) {
    b.source = InputBinding::Source::RequestField;
    b.value = raw.substr(8);
    if (b.value.empty()) malformed("empty request field reference");
  } else if (raw.rfind("task:", 0) == 0) {
    b.source = InputBinding::Source::TaskSlot;
    b.value = raw.substr(5);
    if (b.value.empty()) malformed("empty task slot reference");
  } else if (raw.rfind("literal:", 0) == 0) {
    b.source = InputBinding::Source::Literal;
    b.value = raw.substr(8);
  } else {
    malformed("bad binding '" + raw + "'");
  }
  return b;
}

std::string binding_text(const InputBinding& b) {
  switch (b.source) {
    case InputBinding::Source::RequestField: return "request:" + b.value;
    case InputBinding::Source::TaskSlot: return "task:" + b.value;
    case InputBinding::Source::Literal: return "literal:" + b.value;
  }
  return {};
}

}  // namespace

TaskOrganizationDocument parse_task_document(std::string_view document,
                                             const OperationTaxonomy& taxonomy) {
  xml::Node root = xml::parse(document);
  if (root.name != "taskdoc") malformed("root element must be <taskdoc>");

  TaskOrganizationDocument doc;
  doc.request_type = require_attr(root, "request-type");
  if (doc.request_type.empty()) malformed("empty request-type");

  std::set<std::string> task_ids;
  std::set<std::string> slots;          // all output slots, for uniqueness
  std::set<std::string> earlier_slots;  // slots of strictly earlier tasks
  for (const auto& element : root.children) {
    if (element.name != "task") malformed("expected <task>, got <" + element.name + ">");
    TaskSpec task;
    task.task_id = require_attr(element, "id");
    if (!task_ids.insert(task.task_id).second)
      throw Error(ErrorCode::DuplicateTaskId, "'" + task.task_id + "'");
    task.op_type = parse_checked_type(require_attr(element, "operation-type"), taxonomy);

    bool saw_output = false;
    std::set<std::string> input_names;
    for (const auto& child : element.children) {
      if (child.name == "input") {
        const auto& pname = require_attr(child, "name");
        if (!input_names.insert(pname).second)
          malformed("duplicate input '" + pname + "' in task '" + task.task_id + "'");
        auto binding = parse_binding(require_attr(child, "from"));
        if (binding.source == InputBinding::Source::TaskSlot &&
            earlier_slots.find(binding.value) == earlier_slots.end())
          throw Error(ErrorCode::ForwardReference,
                      "task '" + task.task_id + "' reads slot '" + binding.value + "'");
        task.inputs.emplace_back(pname, std::move(binding));
      } else if (child.name == "output") {
        if (saw_output) malformed("multiple <output> in task '" + task.task_id + "'");
        saw_output = true;
        task.output_slot = require_attr(child, "slot");
        if (task.output_slot.empty()) malformed("empty output slot");
        if (!slots.insert(task.output_slot).second)
          malformed("duplicate output slot '" + task.output_slot + "'");
      } else {
        malformed("unexpected <" + child.name + "> in <task>");
      }
    }
    if (!saw_output) malformed("task '" + task.task_id + "' has no <output>");
    earlier_slots.insert(task.output_slot);
    doc.tasks.push_back(std::move(task));
  }
  return doc;
}

std::string serialize_task_document(const TaskOrganizationDocument& doc) {
  xml::Node root;
  root.name = "taskdoc";
  root.attrs.emplace_back("request-type", doc.request_type);
  for (const auto& task : doc.tasks) {
    xml::Node node;
    node.name = "task";
    node.attrs.emplace_back("id", task.task_id);
    node.attrs.emplace_back("operation-type", task.op_type.str());
    for (const auto& [pname, binding] : task.inputs) {
      xml::Node in;
      in.name = "input";
      in.attrs.emplace_back("name", pname);
      in.attrs.emplace_back("from", binding_text(binding));
      node.children.push_back(std::move(in));
    }
    xml::Node out;
    out.name = "output";
    out.attrs.emplace_back("slot", task.output_slot);
    node.children.push_back(std::move(out));
    root.children.push_back(std::move(node));
  }
  return xml::to_string(root);
}

NormalizedResponse NormalizedResponse::failure(ErrorCode code, std::string detail) {
  NormalizedResponse resp;
  resp.ok = false;
  resp.error = code;
  resp.error_detail = std::move(detail);
  return resp;
}

}  // namespace mwscm
