#include "mwscm/broker.hpp"

#include <map>

#include <json.hpp>

#include "text.hpp"
#include "xml.hpp"

namespace mwscm {

namespace {

using OrderedFields = std::map<std::string, std::string>;

[[noreturn]] void bad_payload(const std::string& what) {
  throw Error(ErrorCode::MalformedPayload, what);
}

NormalizedRequest from_fields(OrderedFields fields, ClientFormat format) {
  auto type_it = fields.find("type");
  if (type_it == fields.end() || type_it->second.empty())
    throw Error(ErrorCode::MissingRequestType, "");
  NormalizedRequest request;
  request.request_type = type_it->second;
  fields.erase(type_it);
  request.params.insert(fields.begin(), fields.end());
  request.client_format = format;
  return request;
}

OrderedFields decode_urlencoded(std::string_view raw) {
  OrderedFields fields;
  if (raw.empty()) return fields;
  for (auto pair : text::split(raw, '&')) {
    std::string_view key, value;
    if (!text::split_kv(pair, key, value)) bad_payload("missing '=' in '" + std::string(pair) + "'");
    std::string dkey, dvalue;
    if (!text::pct_decode(key, dkey) || !text::pct_decode(value, dvalue))
      bad_payload("bad percent encoding");
    if (dkey.empty()) bad_payload("empty key");
    if (!fields.emplace(std::move(dkey), std::move(dvalue)).second)
      bad_payload("duplicate key '" + std::string(key) + "'");
  }
  return fields;
}

OrderedFields decode_xml_request(std::string_view raw) {
  xml::Node root = [&] {
    try {
      return xml::parse(raw);
    } catch (const Error& e) {
      bad_payload(e.what());
    }
  }();
  if (root.name != "request") bad_payload("root element must be <request>");
  if (!root.children.empty()) bad_payload("<request> takes attributes only");
  OrderedFields fields;
  for (const auto& [key, value] : root.attrs) fields.emplace(key, value);
  return fields;
}

OrderedFields decode_json_request(std::string_view raw) {
  nlohmann::json doc = nlohmann::json::parse(raw, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) bad_payload("not a JSON object");
  OrderedFields fields;
  for (const auto& [key, value] : doc.items()) {
    if (value.is_string()) fields.emplace(key, value.get<std::string>());
    else if (value.is_boolean()) fields.emplace(key, value.get<bool>() ? "true" : "false");
    else if (value.is_number_integer()) fields.emplace(key, scalar_text(value.get<std::int64_t>()));
    else if (value.is_number_unsigned()) fields.emplace(key, std::to_string(value.get<std::uint64_t>()));
    else if (value.is_number_float()) fields.emplace(key, scalar_text(value.get<double>()));
    else bad_payload("field '" + key + "' is not a scalar");
  }
  return fields;
}

}  // namespace

NormalizedRequest normalize(std::string_view raw, ClientFormat format) {
  switch (format) {
    case ClientFormat::Urlencoded: return from_fields(decode_urlencoded(raw), format);
    case ClientFormat::Xml: return from_fields(decode_xml_request(raw), format);
    case ClientFormat::Json: return from_fields(decode_json_request(raw), format);
  }
  bad_payload("unknown format");
}

std::string format_request(const NormalizedRequest& request, ClientFormat format) {
  if (request.params.count("type"))
    bad_payload("param name 'type' is reserved");
  OrderedFields fields(request.params.begin(), request.params.end());
  fields.emplace("type", request.request_type);

  switch (format) {
    case ClientFormat::Urlencoded: {
      std::string out;
      for (const auto& [key, value] : fields) {
        if (!out.empty()) out += '&';
        out += text::pct_encode(key);
        out += '=';
        out += text::pct_encode(value);
      }
      return out;
    }
    case ClientFormat::Xml: {
      xml::Node root;
      root.name = "request";
      for (const auto& [key, value] : fields) {
        if (!xml::is_valid_name(key)) bad_payload("param '" + key + "' is not an XML name");
        root.attrs.emplace_back(key, value);
      }
      return xml::to_string(root);
    }
    case ClientFormat::Json: {
      nlohmann::json doc = nlohmann::json::object();
      for (const auto& [key, value] : fields) doc[key] = value;
      return doc.dump();
    }
  }
  bad_payload("unknown format");
}

namespace {

// slot -> "slot", record fields -> "slot.field"
std::map<std::string, Scalar> flatten_results(const NormalizedResponse& response) {
  std::map<std::string, Scalar> flat;
  for (const auto& [slot, value] : response.results) {
    if (const auto* scalar = std::get_if<Scalar>(&value)) {
      flat[slot] = *scalar;
    } else {
      for (const auto& [field, scalar] : std::get<Record>(value)) flat[slot + "." + field] = scalar;
    }
  }
  return flat;
}

}  // namespace

std::string format_response(const NormalizedResponse& response, ClientFormat format) {
  auto flat = flatten_results(response);
  const std::string status = response.ok ? "ok" : "error";

  switch (format) {
    case ClientFormat::Urlencoded: {
      std::map<std::string, std::string> fields;
      fields["status"] = status;
      if (!response.ok) fields["code"] = std::string(error_code_name(response.error));
      for (const auto& [key, value] : flat) fields[key] = scalar_text(value);
      std::string out;
      for (const auto& [key, value] : fields) {
        if (!out.empty()) out += '&';
        out += text::pct_encode(key);
        out += '=';
        out += text::pct_encode(value);
      }
      return out;
    }
    case ClientFormat::Xml: {
      xml::Node root;
      root.name = "response";
      root.attrs.emplace_back("status", status);
      if (!response.ok)
        root.attrs.emplace_back("code", std::string(error_code_name(response.error)));
      for (const auto& [key, value] : flat) root.attrs.emplace_back(key, scalar_text(value));
      return xml::to_string(root);
    }
    case ClientFormat::Json: {
      nlohmann::json doc = nlohmann::json::object();
      doc["status"] = status;
      if (!response.ok) doc["code"] = std::string(error_code_name(response.error));
      for (const auto& [key, value] : flat) {
        switch (value.index()) {
          case 0: doc[key] = std::get<std::string>(value); break;
          case 1: doc[key] = std::get<std::int64_t>(value); break;
          case 2: doc[key] = std::get<double>(value); break;
          default: doc[key] = std::get<bool>(value); break;
        }
      }
      return doc.dump();
    }
  }
  bad_payload("unknown format");
}

std::string_view client_format_name(ClientFormat format) {
  switch (format) {
    case ClientFormat::Urlencoded: return "urlencoded";
    case ClientFormat::Xml: return "xml";
    case ClientFormat::Json: return "json";
  }
  return "urlencoded";
}

std::optional<ClientFormat> client_format_from_name(std::string_view name) {
  if (name == "urlencoded") return ClientFormat::Urlencoded;
  if (name == "xml") return ClientFormat::Xml;
  if (name == "json") return ClientFormat::Json;
  return std::nullopt;
}

}  // namespace mwscm
