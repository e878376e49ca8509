#include "mwscm/values.hpp"

#include <charconv>
#include <cmath>

namespace mwscm {

ScalarKind kind_of(const Scalar& value) {
  switch (value.index()) {
    case 0: return ScalarKind::String;
    case 1: return ScalarKind::Int;
    case 2: return ScalarKind::Float;
    default: return ScalarKind::Bool;
  }
}

std::string_view kind_name(ScalarKind kind) {
  switch (kind) {
    case ScalarKind::String: return "string";
    case ScalarKind::Int: return "int";
    case ScalarKind::Float: return "float";
    case ScalarKind::Bool: return "bool";
  }
  return "string";
}

std::optional<ScalarKind> kind_from_name(std::string_view name) {
  if (name == "string") return ScalarKind::String;
  if (name == "int") return ScalarKind::Int;
  if (name == "float") return ScalarKind::Float;
  if (name == "bool") return ScalarKind::Bool;
  return std::nullopt;
}

namespace {

std::string double_text(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  std::string out(buf, ptr);
  // keep float texts self-identifying so the wire codecs re-type them right
  if (out.find_first_of(".eE") == std::string::npos &&
      out.find_first_not_of("-0123456789") == std::string::npos)
    out += ".0";
  return out;
}

std::optional<std::int64_t> parse_int(std::string_view text) {
  if (text.empty()) return std::nullopt;
  std::int64_t out = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  if (ec != std::errc() || ptr != text.data() + text.size()) return std::nullopt;
  return out;
}

std::optional<double> parse_double(std::string_view text) {
  if (text.empty()) return std::nullopt;
  double out = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  if (ec != std::errc() || ptr != text.data() + text.size()) return std::nullopt;
  if (!std::isfinite(out)) return std::nullopt;
  return out;
}

}  // namespace

std::string scalar_text(const Scalar& value) {
  switch (value.index()) {
    case 0: return std::get<std::string>(value);
    case 1: return std::to_string(std::get<std::int64_t>(value));
    case 2: return double_text(std::get<double>(value));
    default: return std::get<bool>(value) ? "true" : "false";
  }
}

std::optional<Scalar> scalar_from_text(std::string_view text, ScalarKind kind) {
  switch (kind) {
    case ScalarKind::String:
      return Scalar(std::string(text));
    case ScalarKind::Int: {
      auto v = parse_int(text);
      if (!v) return std::nullopt;
      return Scalar(*v);
    }
    case ScalarKind::Float: {
      auto v = parse_double(text);
      if (!v) return std::nullopt;
      return Scalar(*v);
    }
    case ScalarKind::Bool:
      if (text == "true") return Scalar(true);
      if (text == "false") return Scalar(false);
      return std::nullopt;
  }
  return std::nullopt;
}

Scalar sniff_scalar(std::string_view text) {
  if (text.size() >= 2 && text.front() == '\'' && text.back() == '\'')
    return Scalar(std::string(text.substr(1, text.size() - 2)));
  if (text == "true") return Scalar(true);
  if (text == "false") return Scalar(false);
  if (auto i = parse_int(text)) return Scalar(*i);
  if (text.find_first_of(".eE") != std::string_view::npos) {
    if (auto d = parse_double(text)) return Scalar(*d);
  }
  return Scalar(std::string(text));
}

std::string record_text(const Record& record) {
  std::string out;
  for (const auto& [key, value] : record) {
    if (!out.empty()) out += ';';
    out += key;
    out += '=';
    out += scalar_text(value);
  }
  return out;
}

}  // namespace mwscm
