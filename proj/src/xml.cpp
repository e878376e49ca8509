#include "xml.hpp"

#include "mwscm/errors.hpp"

namespace mwscm::xml {

namespace {

[[noreturn]] void fail(const std::string& what) {
  throw Error(ErrorCode::MalformedDocument, what);
}

bool name_start(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
}

bool name_char(char c) {
  return name_start(c) || (c >= '0' && c <= '9') || c == '-' || c == '.' || c == ':';
}

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  Node parse_document() {
    skip_ws();
    if (text_.substr(pos_, 5) == "<?xml") {
      auto end = text_.find("?>", pos_);
      if (end == std::string_view::npos) fail("unterminated declaration");
      pos_ = end + 2;
      skip_ws();
    }
    Node root = parse_element();
    skip_ws();
    if (pos_ != text_.size()) fail("trailing content after root element");
    return root;
  }

 private:
  void skip_ws() {
    while (pos_ < text_.size() &&
           (text_[pos_] == ' ' || text_[pos_] == '\t' || text_[pos_] == '\n' || text_[pos_] == '\r'))
      ++pos_;
  }

  char peek() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }

  void expect(char c) {
    if (peek() != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }

  std::string parse_name() {
    if (!name_start(peek())) fail("expected name");
    std::size_t start = pos_;
    while (pos_ < text_.size() && name_char(text_[pos_])) ++pos_;
    return std::string(text_.substr(start, pos_ - start));
  }

  std::string parse_attr_value() {
    expect('"');
    std::string out;
    while (true) {
      if (pos_ >= text_.size()) fail("unterminated attribute value");
      char c = text_[pos_];
      if (c == '"') {
        ++pos_;
        return out;
      }
      if (c == '<') fail("'<' in attribute value");
      if (c == '&') {
        out += parse_entity();
        continue;
      }
      out += c;
      ++pos_;
    }
  }

  char parse_entity() {
    auto end = text_.find(';', pos_);
    if (end == std::string_view::npos) fail("unterminated entity");
    auto ent = text_.substr(pos_, end - pos_ + 1);
    pos_ = end + 1;
    if (ent == "&amp;") return '&';
    if (ent == "&lt;") return '<';
    if (ent == "&gt;") return '>';
    if (ent == "&quot;") return '"';
    if (ent == "&apos;") return '\'';
    fail("unknown entity " + std::string(ent));
  }

  Node parse_element() {
    expect('<');
    Node node;
    node.name = parse_name();
    while (true) {
      bool had_ws = false;
      while (peek() == ' ' || peek() == '\t' || peek() == '\n' || peek() == '\r') {
        ++pos_;
        had_ws = true;
      }
      if (peek() == '/') {
        ++pos_;
        expect('>');
        return node;
      }
      if (peek() == '>') {
        ++pos_;
        break;
      }
      if (!had_ws) fail("expected whitespace before attribute in <" + node.name + ">");
      std::string key = parse_name();
      for (const auto& [k, v] : node.attrs)
        if (k == key) fail("duplicate attribute '" + key + "'");
      expect('=');
      node.attrs.emplace_back(std::move(key), parse_attr_value());
    }
    // children until matching close tag
    while (true) {
      skip_ws();
      if (pos_ >= text_.size()) fail("unterminated element <" + node.name + ">");
      if (text_[pos_] != '<') fail("text content is not allowed");
      if (pos_ + 1 < text_.size() && text_[pos_ + 1] == '/') {
        pos_ += 2;
        std::string close = parse_name();
        if (close != node.name)
          fail("mismatched close tag </" + close + "> for <" + node.name + ">");
        skip_ws();
        expect('>');
        return node;
      }
      node.children.push_back(parse_element());
    }
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace

const std::string* Node::attr(std::string_view key) const {
  for (const auto& [k, v] : attrs)
    if (k == key) return &v;
  return nullptr;
}

Node parse(std::string_view document) {
  if (document.find_first_not_of(" \t\r\n") == std::string_view::npos)
    fail("empty document");
  return Parser(document).parse_document();
}

bool is_valid_name(std::string_view name) {
  if (name.empty() || !name_start(name.front())) return false;
  for (char c : name)
    if (!name_char(c)) return false;
  return true;
}

std::string escape_attr(std::string_view raw) {
  std::string out;
  out.reserve(raw.size());
  for (char c : raw) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

void write(std::string& out, const Node& node) {
  out += '<';
  out += node.name;
  for (const auto& [key, value] : node.attrs) {
    out += ' ';
    out += key;
    out += "=\"";
    out += escape_attr(value);
    out += '"';
  }
  if (node.children.empty()) {
    out += "/>";
    return;
  }
  out += '>';
  for (const auto& child : node.children) write(out, child);
  out += "</";
  out += node.name;
  out += '>';
}

std::string to_string(const Node& node) {
  std::string out;
  write(out, node);
  return out;
}

}  // namespace mwscm::xml
