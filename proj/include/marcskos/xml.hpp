#pragma once

// Streaming pull parser for the XML subset needed by MARCXML ingest and the
// XHTML well-formedness checks: elements, attributes, character data, CDATA,
// comments, processing instructions, numeric and predefined entity
// references, and prefix/default namespace resolution. Non-validating; no
// DTD or external entity expansion. Input must be UTF-8.
//
// A small move-only DOM built on top of the pull API is included for
// consumers that want whole-document access (test oracles, RDFa walks).

#include <cstddef>
#include <cstdint>
#include <istream>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace marcskos::xml {

class ParseError : public std::runtime_error {
public:
  ParseError(const std::string& message, std::size_t line, std::size_t column)
      : std::runtime_error(message + " at line " + std::to_string(line) + ", column "
                           + std::to_string(column)),
        line_(line),
        column_(column) {}

  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

private:
  std::size_t line_;
  std::size_t column_;
};

struct Attribute {
  std::string name;  // qualified name as written
  std::string value; // entity-decoded, attribute-whitespace normalized
};

enum class TokenKind {
  start_element,
  end_element,
  text,
  eof,
};

struct Token {
  TokenKind kind = TokenKind::eof;
  std::string name;          // qualified element name
  std::string local_name;    // name with any prefix stripped
  std::string namespace_uri; // resolved; empty when unbound
  std::string text;          // character data for text tokens
  std::vector<Attribute> attributes;
  bool self_closing = false;
  std::size_t line = 0;
  std::size_t column = 0;

  const std::string* attribute(std::string_view attr_name) const {
    for (const auto& attr : attributes) {
      if (attr.name == attr_name)
        return &attr.value;
    }
    return nullptr;
  }
};

namespace detail {

inline void append_utf8(std::string& out, std::uint32_t cp) {
  if (cp <= 0x7F) {
    out += static_cast<char>(cp);
  } else if (cp <= 0x7FF) {
    out += static_cast<char>(0xC0 | (cp >> 6));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else if (cp <= 0xFFFF) {
    out += static_cast<char>(0xE0 | (cp >> 12));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else {
    out += static_cast<char>(0xF0 | (cp >> 18));
    out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  }
}

inline bool is_name_start(int c) {
  return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || c == '_' || c == ':' || c >= 0x80;
}

inline bool is_name_char(int c) {
  return is_name_start(c) || (c >= '0' && c <= '9') || c == '-' || c == '.';
}

} // namespace detail

/// Pull parser over an input stream. One token is buffered at a time, so
/// memory use does not grow with document size.
class Reader {
public:
  explicit Reader(std::istream& in) : in_(in) {
    // Skip a UTF-8 BOM if present.
    if (peek() == 0xEF) {
      get();
      if (get() != 0xBB || get() != 0xBF)
        fail("invalid byte order mark");
    }
  }

  Reader(const Reader&) = delete;
  Reader& operator=(const Reader&) = delete;

  const Token& token() const { return token_; }
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

  /// Advances to the next token. Returns false once the document has been
  /// fully consumed (token() then reports eof). Throws ParseError on any
  /// well-formedness violation.
  bool next() {
    if (pending_end_) {
      pending_end_ = false;
      emit_end(open_.back());
      return true;
    }
    for (;;) {
      if (open_.empty()) {
        if (!scan_prolog_or_epilog())
          return false;
        if (token_.kind != TokenKind::eof)
          return true;
        continue;
      }
      int c = peek();
      if (c == EOF)
        fail("unexpected end of input inside element '" + open_.back() + "'");
      if (c == '<') {
        if (try_markup())
          return true;
        continue; // comment or PI, skipped
      }
      read_text();
      if (!token_.text.empty())
        return true;
    }
  }

private:
  static constexpr std::size_t kMaxDepth = 512;

  std::istream& in_;
  Token token_;
  std::size_t line_ = 1;
  std::size_t column_ = 1;
  int lookahead_ = -2; // -2 = empty
  bool pending_end_ = false;
  bool seen_root_ = false;
  std::vector<std::string> open_; // qualified names of open elements
  // Namespace bindings as (prefix, uri), one frame per open element plus a
  // root frame with the xml: binding.
  std::vector<std::vector<std::pair<std::string, std::string>>> ns_stack_{
      {{"xml", "http://www.w3.org/XML/1998/namespace"}}};

  [[noreturn]] void fail(const std::string& message) const {
    throw ParseError(message, line_, column_);
  }

  int peek() {
    if (lookahead_ == -2)
      lookahead_ = raw_get();
    return lookahead_;
  }

  // Returns the next character with line endings normalized to '\n'.
  int get() {
    int c = lookahead_ == -2 ? raw_get() : std::exchange(lookahead_, -2);
    if (c == '\n') {
      ++line_;
      column_ = 1;
    } else if (c != EOF) {
      ++column_;
    }
    return c;
  }

  int raw_get() {
    int c = in_.rdbuf() ? in_.rdbuf()->sbumpc() : EOF;
    if (c == std::char_traits<char>::eof())
      return EOF;
    if (c == '\r') {
      int n = in_.rdbuf()->sgetc();
      if (n == '\n')
        in_.rdbuf()->sbumpc();
      return '\n';
    }
    return c;
  }

  void expect(char c, const char* what) {
    if (get() != c)
      fail(std::string("expected '") + c + "' " + what);
  }

  bool skip_if(std::string_view s) {
    // Only used where the first character has already been matched.
    for (char c : s) {
      if (peek() != c)
        return false;
      get();
    }
    return true;
  }

  void skip_whitespace() {
    int c;
    while ((c = peek()) == ' ' || c == '\t' || c == '\n')
      get();
  }

  std::string read_name() {
    int c = peek();
    if (!detail::is_name_start(c))
      fail("expected a name");
    std::string name;
    name += static_cast<char>(get());
    while (detail::is_name_char(peek()))
      name += static_cast<char>(get());
    return name;
  }

  std::uint32_t read_char_reference() {
    // Called after "&#".
    std::uint32_t cp = 0;
    int digits = 0;
    if (peek() == 'x' || peek() == 'X') {
      get();
      for (;;) {
        int c = peek();
        int v;
        if (c >= '0' && c <= '9')
          v = c - '0';
        else if (c >= 'a' && c <= 'f')
          v = c - 'a' + 10;
        else if (c >= 'A' && c <= 'F')
          v = c - 'A' + 10;
        else
          break;
        get();
        cp = cp * 16 + static_cast<std::uint32_t>(v);
        if (++digits > 6)
          fail("character reference out of range");
      }
    } else {
      while (peek() >= '0' && peek() <= '9') {
        cp = cp * 10 + static_cast<std::uint32_t>(get() - '0');
        if (++digits > 7)
          fail("character reference out of range");
      }
    }
    if (digits == 0)
      fail("malformed character reference");
    expect(';', "after character reference");
    if (cp == 0 || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF))
      fail("character reference out of range");
    return cp;
  }

  void read_entity(std::string& out) {
    // Called after '&'.
    if (peek() == '#') {
      get();
      detail::append_utf8(out, read_char_reference());
      return;
    }
    std::string name = read_name();
    expect(';', "after entity name");
    if (name == "amp")
      out += '&';
    else if (name == "lt")
      out += '<';
    else if (name == "gt")
      out += '>';
    else if (name == "quot")
      out += '"';
    else if (name == "apos")
      out += '\'';
    else
      fail("unknown entity '&" + name + ";'");
  }

  void read_text() {
    token_ = Token{};
    token_.kind = TokenKind::text;
    token_.line = line_;
    token_.column = column_;
    std::string& out = token_.text;
    for (;;) {
      int c = peek();
      if (c == EOF || c == '<')
        break;
      if (c == '&') {
        get();
        read_entity(out);
        continue;
      }
      if (c == ']') {
        // "]]>" must not appear bare in character data.
        get();
        if (peek() == ']') {
          get();
          if (peek() == '>')
            fail("']]>' in character data");
          out += "]]";
          continue;
        }
        out += ']';
        continue;
      }
      out += static_cast<char>(get());
    }
  }

  // Handles "<...": start tag, end tag, CDATA (as text), or skipped
  // comment/PI. Returns true when a token was produced.
  bool try_markup() {
    std::size_t mark_line = line_, mark_col = column_;
    get(); // '<'
    int c = peek();
    if (c == '/') {
      get();
      std::string name = read_name();
      skip_whitespace();
      expect('>', "to close end tag");
      if (open_.empty() || open_.back() != name)
        throw ParseError("mismatched end tag '</" + name + ">'", mark_line, mark_col);
      emit_end(name);
      return true;
    }
    if (c == '!') {
      get();
      if (skip_if("--")) {
        skip_comment();
        return false;
      }
      if (skip_if("[CDATA[")) {
        read_cdata(mark_line, mark_col);
        return true;
      }
      fail("unsupported '<!' construct inside document");
    }
    if (c == '?') {
      get();
      skip_processing_instruction();
      return false;
    }
    read_start_tag(mark_line, mark_col);
    return true;
  }

  void skip_comment() {
    for (;;) {
      int c = get();
      if (c == EOF)
        fail("unterminated comment");
      if (c == '-' && peek() == '-') {
        get();
        if (get() != '>')
          fail("'--' inside comment");
        return;
      }
    }
  }

  void skip_processing_instruction() {
    for (;;) {
      int c = get();
      if (c == EOF)
        fail("unterminated processing instruction");
      if (c == '?' && peek() == '>') {
        get();
        return;
      }
    }
  }

  void skip_doctype() {
    int bracket_depth = 0;
    for (;;) {
      int c = get();
      if (c == EOF)
        fail("unterminated DOCTYPE declaration");
      if (c == '[')
        ++bracket_depth;
      else if (c == ']')
        --bracket_depth;
      else if (c == '>' && bracket_depth == 0)
        return;
    }
  }

  void read_cdata(std::size_t mark_line, std::size_t mark_col) {
    token_ = Token{};
    token_.kind = TokenKind::text;
    token_.line = mark_line;
    token_.column = mark_col;
    for (;;) {
      int c = get();
      if (c == EOF)
        fail("unterminated CDATA section");
      if (c == ']' && peek() == ']') {
        get();
        if (peek() == '>') {
          get();
          return;
        }
        token_.text += "]]";
        continue;
      }
      token_.text += static_cast<char>(c);
    }
  }

  std::string read_attribute_value() {
    int quote = get();
    if (quote != '"' && quote != '\'')
      fail("attribute value must be quoted");
    std::string value;
    for (;;) {
      int c = peek();
      if (c == EOF)
        fail("unterminated attribute value");
      if (c == quote) {
        get();
        return value;
      }
      if (c == '<')
        fail("'<' in attribute value");
      if (c == '&') {
        get();
        read_entity(value);
        continue;
      }
      get();
      // Attribute-value normalization: whitespace becomes a space.
      value += (c == '\t' || c == '\n') ? ' ' : static_cast<char>(c);
    }
  }

  void read_start_tag(std::size_t mark_line, std::size_t mark_col) {
    if (open_.empty() && seen_root_)
      throw ParseError("content after document element", mark_line, mark_col);
    token_ = Token{};
    token_.kind = TokenKind::start_element;
    token_.line = mark_line;
    token_.column = mark_col;
    token_.name = read_name();
    for (;;) {
      int c = peek();
      bool had_space = (c == ' ' || c == '\t' || c == '\n');
      skip_whitespace();
      c = peek();
      if (c == '>') {
        get();
        break;
      }
      if (c == '/') {
        get();
        expect('>', "after '/' in empty-element tag");
        token_.self_closing = true;
        break;
      }
      if (c == EOF)
        fail("unterminated start tag");
      if (!had_space)
        fail("expected whitespace between attributes");
      std::string attr_name = read_name();
      skip_whitespace();
      expect('=', "after attribute name");
      skip_whitespace();
      std::string attr_value = read_attribute_value();
      for (const auto& existing : token_.attributes) {
        if (existing.name == attr_name)
          fail("duplicate attribute '" + attr_name + "'");
      }
      token_.attributes.push_back({std::move(attr_name), std::move(attr_value)});
    }
    if (open_.size() >= kMaxDepth)
      fail("maximum element nesting depth exceeded");
    seen_root_ = true;

    // New namespace frame from any xmlns declarations on this element.
    std::vector<std::pair<std::string, std::string>> frame;
    for (const auto& attr : token_.attributes) {
      if (attr.name == "xmlns")
        frame.emplace_back("", attr.value);
      else if (attr.name.rfind("xmlns:", 0) == 0)
        frame.emplace_back(attr.name.substr(6), attr.value);
    }
    ns_stack_.push_back(std::move(frame));
    open_.push_back(token_.name);
    resolve_element_name(token_);
    if (token_.self_closing)
      pending_end_ = true; // synthesize the matching end_element next
  }

  void emit_end(const std::string& name) {
    Token end;
    end.kind = TokenKind::end_element;
    end.name = name;
    end.line = line_;
    end.column = column_;
    resolve_element_name(end);
    token_ = std::move(end);
    ns_stack_.pop_back();
    open_.pop_back();
  }

  void resolve_element_name(Token& tok) {
    std::string_view name = tok.name;
    std::string prefix;
    if (auto pos = name.find(':'); pos != std::string_view::npos) {
      prefix = std::string(name.substr(0, pos));
      tok.local_name = std::string(name.substr(pos + 1));
    } else {
      tok.local_name = std::string(name);
    }
    if (prefix == "xml") {
      tok.namespace_uri = "http://www.w3.org/XML/1998/namespace";
      return;
    }
    const std::string* uri = lookup_namespace(prefix);
    if (!uri && !prefix.empty())
      fail("undeclared namespace prefix '" + prefix + "'");
    tok.namespace_uri = uri ? *uri : std::string();
  }

  const std::string* lookup_namespace(const std::string& prefix) const {
    for (auto frame = ns_stack_.rbegin(); frame != ns_stack_.rend(); ++frame) {
      for (auto binding = frame->rbegin(); binding != frame->rend(); ++binding) {
        if (binding->first == prefix)
          return &binding->second;
      }
    }
    return nullptr;
  }

  // Between-token handling outside the document element.
  bool scan_prolog_or_epilog() {
    for (;;) {
      int c = peek();
      if (c == EOF) {
        if (!seen_root_)
          fail("document has no root element");
        token_ = Token{};
        token_.kind = TokenKind::eof;
        return false;
      }
      if (c == ' ' || c == '\t' || c == '\n') {
        get();
        continue;
      }
      if (c != '<')
        fail("character data outside document element");
      std::size_t mark_line = line_, mark_col = column_;
      get();
      c = peek();
      if (c == '?') {
        get();
        skip_processing_instruction();
        continue;
      }
      if (c == '!') {
        get();
        if (skip_if("--")) {
          skip_comment();
          continue;
        }
        if (!seen_root_ && skip_if("DOCTYPE")) {
          skip_doctype();
          continue;
        }
        fail("unsupported '<!' construct");
      }
      if (seen_root_)
        throw ParseError("multiple root elements", mark_line, mark_col);
      read_start_tag(mark_line, mark_col);
      return true;
    }
  }
};

// ---------------------------------------------------------------------------
// Minimal DOM

struct Element;

struct Node {
  // Exactly one of the two is set: element, or text content.
  std::unique_ptr<Element> element;
  std::string text;
};

struct Element {
  std::string name;
  std::string local_name;
  std::string namespace_uri;
  std::vector<Attribute> attributes;
  std::vector<Node> children;

  const std::string* attribute(std::string_view attr_name) const {
    for (const auto& attr : attributes) {
      if (attr.name == attr_name)
        return &attr.value;
    }
    return nullptr;
  }

  /// Concatenated character data of all descendants, document order.
  std::string text_content() const {
    std::string out;
    append_text(out);
    return out;
  }

  void append_text(std::string& out) const {
    for (const auto& child : children) {
      if (child.element)
        child.element->append_text(out);
      else
        out += child.text;
    }
  }
};

/// Parses a whole document into a DOM tree rooted at its document element.
inline Element parse_document(std::istream& in) {
  Reader reader(in);
  std::vector<Element*> stack;
  Element root;
  bool have_root = false;
  while (reader.next()) {
    const Token& tok = reader.token();
    switch (tok.kind) {
    case TokenKind::start_element: {
      Element elem;
      elem.name = tok.name;
      elem.local_name = tok.local_name;
      elem.namespace_uri = tok.namespace_uri;
      elem.attributes = tok.attributes;
      if (stack.empty()) {
        root = std::move(elem);
        have_root = true;
        stack.push_back(&root);
      } else {
        Node node;
        node.element = std::make_unique<Element>(std::move(elem));
        stack.back()->children.push_back(std::move(node));
        stack.push_back(stack.back()->children.back().element.get());
      }
      break;
    }
    case TokenKind::end_element:
      stack.pop_back();
      break;
    case TokenKind::text: {
      if (!stack.empty()) {
        Node node;
        node.text = tok.text;
        stack.back()->children.push_back(std::move(node));
      }
      break;
    }
    case TokenKind::eof:
      break;
    }
  }
  if (!have_root)
    throw ParseError("document has no root element", reader.line(), reader.column());
  return root;
}

inline Element parse_document(std::string_view text) {
  struct view_buf : std::streambuf {
    explicit view_buf(std::string_view s) {
      char* p = const_cast<char*>(s.data());
      setg(p, p, p + s.size());
    }
  };
  view_buf buf(text);
  std::istream in(&buf);
  return parse_document(in);
}

} // namespace marcskos::xml
