#pragma once

// N-Triples rendering and parsing. Output is canonical: UTF-8, named
// escapes for quote/backslash/newline/return/tab, \u escapes for remaining
// control characters, one triple per line ending in " .". The parser
// recovers per line — a bad line yields an issue with its line number and
// parsing continues — mirroring how record-level damage is handled upstream.

#include <cstdint>
#include <cstdio>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "marcskos/rdf.hpp"

namespace marcskos::ntriples {

namespace detail {

inline void append_utf8(std::string& out, std::uint32_t cp) {
  if (cp <= 0x7f) {
    out += static_cast<char>(cp);
  } else if (cp <= 0x7ff) {
    out += static_cast<char>(0xc0 | (cp >> 6));
    out += static_cast<char>(0x80 | (cp & 0x3f));
  } else if (cp <= 0xffff) {
    out += static_cast<char>(0xe0 | (cp >> 12));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3f));
    out += static_cast<char>(0x80 | (cp & 0x3f));
  } else {
    out += static_cast<char>(0xf0 | (cp >> 18));
    out += static_cast<char>(0x80 | ((cp >> 12) & 0x3f));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3f));
    out += static_cast<char>(0x80 | (cp & 0x3f));
  }
}

inline int hex_value(char c) {
  if (c >= '0' && c <= '9')
    return c - '0';
  if (c >= 'a' && c <= 'f')
    return c - 'a' + 10;
  if (c >= 'A' && c <= 'F')
    return c - 'A' + 10;
  return -1;
}

} // namespace detail

inline void escape_literal_into(std::string& out, std::string_view lexical) {
  for (char raw : lexical) {
    unsigned char c = static_cast<unsigned char>(raw);
    switch (c) {
    case '"': out += "\\\""; break;
    case '\\': out += "\\\\"; break;
    case '\n': out += "\\n"; break;
    case '\r': out += "\\r"; break;
    case '\t': out += "\\t"; break;
    default:
      if (c < 0x20 || c == 0x7f) {
        char buf[8];
        std::snprintf(buf, sizeof buf, "\\u%04X", c);
        out += buf;
      } else {
        out += raw; // UTF-8 continuation and lead bytes pass through
      }
    }
  }
}

inline std::string render_iri(const rdf::Iri& iri) { return "<" + iri.value + ">"; }

inline std::string render_term(const rdf::Term& term) {
  if (rdf::is_iri(term))
    return render_iri(std::get<rdf::Iri>(term));
  const rdf::Literal& lit = std::get<rdf::Literal>(term);
  std::string out = "\"";
  escape_literal_into(out, lit.lexical);
  out += '"';
  if (!lit.language.empty()) {
    out += '@';
    out += lit.language;
  } else if (lit.datatype) {
    out += "^^";
    out += render_iri(*lit.datatype);
  }
  return out;
}

inline std::string render_triple(const rdf::Triple& triple) {
  return render_iri(triple.subject) + " " + render_iri(triple.predicate) + " "
         + render_term(triple.object) + " .";
}

inline void write_triple(std::ostream& out, const rdf::Triple& triple) {
  out << render_triple(triple) << '\n';
}

/// Whole graph in deterministic sorted order.
inline void write_graph(std::ostream& out, const rdf::Graph& graph) {
  for (const rdf::Triple& triple : graph.sorted_triples())
    write_triple(out, triple);
}

inline std::string serialize_graph(const rdf::Graph& graph) {
  std::string out;
  for (const rdf::Triple& triple : graph.sorted_triples()) {
    out += render_triple(triple);
    out += '\n';
  }
  return out;
}

struct ParseIssue {
  std::size_t line = 0;
  std::string message;
};

using ParsedItem = std::variant<rdf::Triple, ParseIssue>;

namespace detail {

struct Cursor {
  std::string_view s;
  std::size_t pos = 0;

  bool at_end() const { return pos >= s.size(); }
  char peek() const { return s[pos]; }
  void skip_ws() {
    while (pos < s.size() && (s[pos] == ' ' || s[pos] == '\t'))
      ++pos;
  }
};

// Decodes \uXXXX / \UXXXXXXXX after the backslash has been consumed and
// `kind` read. Returns false on malformed hex.
inline bool read_ucode(Cursor& c, char kind, std::string& out) {
  int digits = (kind == 'u') ? 4 : 8;
  std::uint32_t cp = 0;
  for (int i = 0; i < digits; ++i) {
    if (c.at_end())
      return false;
    int v = hex_value(c.s[c.pos]);
    if (v < 0)
      return false;
    cp = (cp << 4) | static_cast<std::uint32_t>(v);
    ++c.pos;
  }
  if (cp > 0x10ffff || (cp >= 0xd800 && cp <= 0xdfff))
    return false;
  append_utf8(out, cp);
  return true;
}

inline bool read_iriref(Cursor& c, std::string& out, std::string& error) {
  ++c.pos; // consume '<'
  while (!c.at_end()) {
    char ch = c.s[c.pos];
    if (ch == '>') {
      ++c.pos;
      return true;
    }
    if (ch == '\\') {
      ++c.pos;
      if (c.at_end() || (c.s[c.pos] != 'u' && c.s[c.pos] != 'U')) {
        error = "invalid escape in IRI";
        return false;
      }
      char kind = c.s[c.pos];
      ++c.pos;
      if (!read_ucode(c, kind, out)) {
        error = "invalid \\u escape in IRI";
        return false;
      }
      continue;
    }
    out += ch;
    ++c.pos;
  }
  error = "unterminated IRI";
  return false;
}

inline bool read_quoted(Cursor& c, std::string& out, std::string& error) {
  ++c.pos; // consume '"'
  while (!c.at_end()) {
    char ch = c.s[c.pos];
    if (ch == '"') {
      ++c.pos;
      return true;
    }
    if (ch == '\\') {
      ++c.pos;
      if (c.at_end()) {
        error = "dangling backslash in literal";
        return false;
      }
      char esc = c.s[c.pos];
      ++c.pos;
      switch (esc) {
      case 't': out += '\t'; break;
      case 'b': out += '\b'; break;
      case 'n': out += '\n'; break;
      case 'r': out += '\r'; break;
      case 'f': out += '\f'; break;
      case '"': out += '"'; break;
      case '\'': out += '\''; break;
      case '\\': out += '\\'; break;
      case 'u':
      case 'U':
        if (!read_ucode(c, esc, out)) {
          error = "invalid \\u escape in literal";
          return false;
        }
        break;
      default: error = "unknown escape in literal"; return false;
      }
      continue;
    }
    out += ch;
    ++c.pos;
  }
  error = "unterminated literal";
  return false;
}

} // namespace detail

/// Parses one line. Returns std::nullopt for blank and comment lines.
inline std::optional<ParsedItem> parse_line(std::string_view line, std::size_t line_no) {
  detail::Cursor c{line, 0};
  c.skip_ws();
  if (c.at_end() || c.peek() == '#')
    return std::nullopt;

  auto fail = [line_no](std::string message) {
    return ParsedItem(ParseIssue{line_no, std::move(message)});
  };

  // subject and predicate must be IRIs
  rdf::Iri parts[2];
  for (int i = 0; i < 2; ++i) {
    c.skip_ws();
    if (c.at_end())
      return fail("truncated triple");
    if (c.peek() == '_')
      return fail("blank nodes are not supported");
    if (c.peek() != '<')
      return fail(i == 0 ? "subject must be an IRI" : "predicate must be an IRI");
    std::string value, error;
    if (!detail::read_iriref(c, value, error))
      return fail(std::move(error));
    try {
      parts[i] = rdf::Iri(std::move(value));
    } catch (const std::invalid_argument& e) {
      return fail(e.what());
    }
  }

  c.skip_ws();
  if (c.at_end())
    return fail("truncated triple");
  rdf::Term object;
  if (c.peek() == '<') {
    std::string value, error;
    if (!detail::read_iriref(c, value, error))
      return fail(std::move(error));
    try {
      object = rdf::Iri(std::move(value));
    } catch (const std::invalid_argument& e) {
      return fail(e.what());
    }
  } else if (c.peek() == '"') {
    std::string lexical, error;
    if (!detail::read_quoted(c, lexical, error))
      return fail(std::move(error));
    if (!c.at_end() && c.peek() == '@') {
      ++c.pos;
      std::size_t start = c.pos;
      while (!c.at_end()
             && ((c.peek() >= 'a' && c.peek() <= 'z') || (c.peek() >= 'A' && c.peek() <= 'Z')
                 || (c.peek() >= '0' && c.peek() <= '9') || c.peek() == '-'))
        ++c.pos;
      if (c.pos == start)
        return fail("empty language tag");
      object = rdf::Literal::tagged(std::move(lexical), c.s.substr(start, c.pos - start));
    } else if (c.pos + 1 < c.s.size() && c.peek() == '^' && c.s[c.pos + 1] == '^') {
      c.pos += 2;
      if (c.at_end() || c.peek() != '<')
        return fail("datatype must be an IRI");
      std::string value, error;
      if (!detail::read_iriref(c, value, error))
        return fail(std::move(error));
      try {
        object = rdf::Literal::typed(std::move(lexical), rdf::Iri(std::move(value)));
      } catch (const std::invalid_argument& e) {
        return fail(e.what());
      }
    } else {
      object = rdf::Literal::plain(std::move(lexical));
    }
  } else if (c.peek() == '_') {
    return fail("blank nodes are not supported");
  } else {
    return fail("object must be an IRI or literal");
  }

  c.skip_ws();
  if (c.at_end() || c.peek() != '.')
    return fail("missing terminating '.'");
  ++c.pos;
  c.skip_ws();
  if (!c.at_end() && c.peek() != '#')
    return fail("trailing content after '.'");

  return ParsedItem(rdf::Triple{std::move(parts[0]), std::move(parts[1]), std::move(object)});
}

/// Parses a single term (IRI or literal) covering the whole input.
inline std::optional<rdf::Term> parse_term(std::string_view text) {
  detail::Cursor c{text, 0};
  c.skip_ws();
  if (c.at_end())
    return std::nullopt;
  rdf::Term term;
  if (c.peek() == '<') {
    std::string value, error;
    if (!detail::read_iriref(c, value, error))
      return std::nullopt;
    try {
      term = rdf::Iri(std::move(value));
    } catch (const std::invalid_argument&) {
      return std::nullopt;
    }
  } else if (c.peek() == '"') {
    std::string lexical, error;
    if (!detail::read_quoted(c, lexical, error))
      return std::nullopt;
    if (!c.at_end() && c.peek() == '@') {
      ++c.pos;
      std::size_t start = c.pos;
      while (!c.at_end()
             && ((c.peek() >= 'a' && c.peek() <= 'z') || (c.peek() >= 'A' && c.peek() <= 'Z')
                 || (c.peek() >= '0' && c.peek() <= '9') || c.peek() == '-'))
        ++c.pos;
      if (c.pos == start)
        return std::nullopt;
      term = rdf::Literal::tagged(std::move(lexical), c.s.substr(start, c.pos - start));
    } else if (c.pos + 1 < c.s.size() && c.peek() == '^' && c.s[c.pos + 1] == '^') {
      c.pos += 2;
      if (c.at_end() || c.peek() != '<')
        return std::nullopt;
      std::string value, error;
      if (!detail::read_iriref(c, value, error))
        return std::nullopt;
      try {
        term = rdf::Literal::typed(std::move(lexical), rdf::Iri(std::move(value)));
      } catch (const std::invalid_argument&) {
        return std::nullopt;
      }
    } else {
      term = rdf::Literal::plain(std::move(lexical));
    }
  } else {
    return std::nullopt;
  }
  c.skip_ws();
  if (!c.at_end())
    return std::nullopt;
  return term;
}

/// Lazy line-at-a-time parser over a stream.
class Parser {
public:
  explicit Parser(std::istream& in) : in_(in) {}

  std::optional<ParsedItem> next() {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_no_;
      if (!line.empty() && line.back() == '\r')
        line.pop_back();
      std::optional<ParsedItem> item = parse_line(line, line_no_);
      if (item)
        return item;
    }
    return std::nullopt;
  }

private:
  std::istream& in_;
  std::size_t line_no_ = 0;
};

struct ParseResult {
  std::vector<rdf::Triple> triples;
  std::vector<ParseIssue> issues;
};

inline ParseResult parse_all(std::istream& in) {
  ParseResult result;
  Parser parser(in);
  while (std::optional<ParsedItem> item = parser.next()) {
    if (rdf::Triple* triple = std::get_if<rdf::Triple>(&*item))
      result.triples.push_back(std::move(*triple));
    else
      result.issues.push_back(std::move(std::get<ParseIssue>(*item)));
  }
  return result;
}

inline ParseResult parse_all(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_all(in);
}

} // namespace marcskos::ntriples
