#pragma once

// MARC21 authority records parsed from MARCXML (the "slim" schema). The
// reader streams: it holds one record at a time regardless of file size.
// Record-level defects (bad tags, wrong namespace, stray content) are
// reported as RecordError items and parsing continues with the next record;
// XML well-formedness violations abort with xml::ParseError.

#include <cctype>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "marcskos/xml.hpp"

namespace marcskos::marc {

inline constexpr std::string_view kMarcXmlNamespace = "http://www.loc.gov/MARC21/slim";
inline constexpr std::size_t kLeaderLength = 24;

struct Subfield {
  char code;         // printable ASCII letter or digit
  std::string value; // whitespace-canonicalized, never empty
};

struct ControlField {
  std::string tag; // "001".."009"; value kept verbatim (008 positions matter)
  std::string value;
};

struct DataField {
  std::string tag; // three digits, >= "010"
  char indicator1 = ' ';
  char indicator2 = ' ';
  std::vector<Subfield> subfields; // document order

  /// Subfields whose code is in `codes`, in document order.
  std::vector<Subfield> subfield_values(std::string_view codes) const {
    std::vector<Subfield> out;
    for (const auto& sf : subfields) {
      if (codes.find(sf.code) != std::string_view::npos)
        out.push_back(sf);
    }
    return out;
  }

  /// First subfield with the given code, or null.
  const std::string* first_subfield(char code) const {
    for (const auto& sf : subfields) {
      if (sf.code == code)
        return &sf.value;
    }
    return nullptr;
  }
};

struct AuthorityRecord {
  std::string leader; // exactly 24 characters
  std::vector<ControlField> control_fields;
  std::vector<DataField> data_fields;
  std::vector<std::string> warnings; // leader padding and similar repairs

  const ControlField* control_field(std::string_view tag) const {
    for (const auto& field : control_fields) {
      if (field.tag == tag)
        return &field;
    }
    return nullptr;
  }

  const DataField* data_field(std::string_view tag) const {
    for (const auto& field : data_fields) {
      if (field.tag == tag)
        return &field;
    }
    return nullptr;
  }

  bool operator==(const AuthorityRecord& other) const {
    if (leader != other.leader || control_fields.size() != other.control_fields.size()
        || data_fields.size() != other.data_fields.size())
      return false;
    for (std::size_t i = 0; i < control_fields.size(); ++i) {
      if (control_fields[i].tag != other.control_fields[i].tag
          || control_fields[i].value != other.control_fields[i].value)
        return false;
    }
    for (std::size_t i = 0; i < data_fields.size(); ++i) {
      const DataField& a = data_fields[i];
      const DataField& b = other.data_fields[i];
      if (a.tag != b.tag || a.indicator1 != b.indicator1 || a.indicator2 != b.indicator2
          || a.subfields.size() != b.subfields.size())
        return false;
      for (std::size_t j = 0; j < a.subfields.size(); ++j) {
        if (a.subfields[j].code != b.subfields[j].code
            || a.subfields[j].value != b.subfields[j].value)
          return false;
      }
    }
    return true;
  }
};

/// Reference to the first field with a tag: control field, data field, or
/// absent (monostate).
using FieldRef = std::variant<std::monostate, const ControlField*, const DataField*>;

inline FieldRef first_field(const AuthorityRecord& record, std::string_view tag) {
  if (tag < "010") {
    if (const ControlField* field = record.control_field(tag))
      return field;
    return std::monostate{};
  }
  if (const DataField* field = record.data_field(tag))
    return field;
  return std::monostate{};
}

struct RecordError {
  std::size_t index = 0; // zero-based position of the record element
  std::size_t line = 0;
  std::size_t column = 0;
  std::string message;
};

using RecordItem = std::variant<AuthorityRecord, RecordError>;

/// Collapses internal whitespace runs to single spaces and trims both ends.
inline std::string canonical_text(std::string_view raw) {
  std::string out;
  out.reserve(raw.size());
  bool pending_space = false;
  for (char c : raw) {
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
      if (!out.empty())
        pending_space = true;
    } else {
      if (pending_space) {
        out += ' ';
        pending_space = false;
      }
      out += c;
    }
  }
  return out;
}

inline bool is_three_digit_tag(std::string_view tag) {
  return tag.size() == 3 && std::isdigit(static_cast<unsigned char>(tag[0]))
         && std::isdigit(static_cast<unsigned char>(tag[1]))
         && std::isdigit(static_cast<unsigned char>(tag[2]));
}

/// Streaming MARCXML reader. next() yields one item per `record` element —
/// either a parsed AuthorityRecord or a RecordError — and std::nullopt at
/// end of input. The underlying xml::Reader synthesizes end_element tokens
/// for self-closing tags, so depth bookkeeping below is uniform.
class MarcXmlReader {
public:
  explicit MarcXmlReader(std::istream& in) : reader_(in) {}

  std::optional<RecordItem> next() {
    if (done_)
      return std::nullopt;
    if (!started_) {
      started_ = true;
      if (!reader_.next()) {
        done_ = true;
        return std::nullopt;
      }
      const xml::Token& root = reader_.token();
      if (root.kind != xml::TokenKind::start_element)
        throw xml::ParseError("expected a document element", root.line, root.column);
      if (root.local_name == "collection" && root.namespace_uri == kMarcXmlNamespace) {
        in_collection_ = true;
        // fall through to the child loop
      } else if (root.local_name == "record" && root.namespace_uri == kMarcXmlNamespace) {
        RecordItem item = read_record(index_++);
        done_ = true;
        return item;
      } else {
        throw xml::ParseError("expected a MARCXML 'collection' or 'record' document element",
                              root.line, root.column);
      }
    }
    for (;;) {
      if (!reader_.next()) {
        done_ = true;
        return std::nullopt;
      }
      const xml::Token& tok = reader_.token();
      if (tok.kind == xml::TokenKind::end_element) {
        // The collection itself has ended.
        done_ = true;
        return std::nullopt;
      }
      if (tok.kind == xml::TokenKind::text) {
        if (canonical_text(tok.text).empty())
          continue;
        // Stray character data between records is not attributable to any
        // one record; treat as fatal structure damage.
        throw xml::ParseError("character data between record elements", tok.line, tok.column);
      }
      if (tok.kind != xml::TokenKind::start_element)
        continue;
      std::size_t index = index_++;
      if (tok.local_name != "record" || tok.namespace_uri != kMarcXmlNamespace) {
        RecordError err{index, tok.line, tok.column,
                        tok.local_name != "record"
                            ? "unexpected element '" + tok.name + "'"
                            : "record element in unknown namespace '" + tok.namespace_uri
                                  + "'"};
        skip_current_element();
        return RecordItem(std::move(err));
      }
      return read_record(index);
    }
  }

private:
  xml::Reader reader_;
  bool started_ = false;
  bool done_ = false;
  bool in_collection_ = false;
  std::size_t index_ = 0;

  // Consumes tokens until the element whose start token is current has
  // ended. Relies on synthesized end tokens for self-closing elements.
  void skip_current_element() {
    std::size_t depth = 1;
    while (depth > 0) {
      if (!reader_.next())
        return;
      if (reader_.token().kind == xml::TokenKind::start_element)
        ++depth;
      else if (reader_.token().kind == xml::TokenKind::end_element)
        --depth;
    }
  }

  struct RecordDefect {
    std::string message;
    std::size_t line = 0, column = 0;
  };

  // Reads the text content of the element whose start token is current.
  // Leaves the reader positioned on its end token. `clean` reports whether
  // the element was free of child elements.
  std::string read_element_text(bool* clean = nullptr) {
    if (clean)
      *clean = true;
    std::string value;
    std::size_t depth = 1;
    while (depth > 0) {
      if (!reader_.next())
        throw xml::ParseError("unexpected end of input inside field", reader_.line(),
                              reader_.column());
      const xml::Token& tok = reader_.token();
      if (tok.kind == xml::TokenKind::start_element) {
        if (clean)
          *clean = false;
        ++depth;
      } else if (tok.kind == xml::TokenKind::end_element) {
        --depth;
      } else if (tok.kind == xml::TokenKind::text && depth == 1) {
        value += tok.text;
      }
    }
    return value;
  }

  RecordItem read_record(std::size_t index) {
    AuthorityRecord record;
    std::optional<RecordDefect> defect;
    bool saw_leader = false;
    std::size_t depth = 1;

    while (depth > 0) {
      if (!reader_.next())
        throw xml::ParseError("unexpected end of input inside record", reader_.line(),
                              reader_.column());
      const xml::Token& tok = reader_.token();
      if (tok.kind == xml::TokenKind::end_element) {
        --depth;
        continue;
      }
      if (tok.kind == xml::TokenKind::text) {
        if (!defect && depth == 1 && !canonical_text(tok.text).empty())
          defect = RecordDefect{"character data inside record", tok.line, tok.column};
        continue;
      }
      if (tok.kind != xml::TokenKind::start_element)
        continue;
      if (defect || depth > 1) {
        ++depth; // drain damaged or unexpected nested content
        continue;
      }
      if (tok.namespace_uri != kMarcXmlNamespace) {
        defect =
            RecordDefect{"element '" + tok.name + "' in unknown namespace", tok.line, tok.column};
        ++depth;
        continue;
      }
      if (tok.local_name == "leader") {
        std::string value = read_element_text();
        if (saw_leader) {
          record.warnings.push_back("duplicate leader ignored");
        } else {
          saw_leader = true;
          record.leader = std::move(value);
        }
      } else if (tok.local_name == "controlfield") {
        read_control_field(record, tok, defect);
      } else if (tok.local_name == "datafield") {
        read_data_field(record, tok, defect);
      } else {
        defect = RecordDefect{"unexpected element '" + tok.name + "' in record", tok.line,
                              tok.column};
        ++depth;
      }
    }

    if (defect)
      return RecordError{index, defect->line, defect->column, defect->message};

    if (record.leader.size() != kLeaderLength) {
      if (record.leader.size() < kLeaderLength) {
        record.warnings.push_back(saw_leader ? "short leader padded to 24 characters"
                                             : "missing leader replaced with blanks");
        record.leader.resize(kLeaderLength, ' ');
      } else {
        record.warnings.push_back("overlong leader truncated to 24 characters");
        record.leader.resize(kLeaderLength);
      }
    }
    return RecordItem(std::move(record));
  }

  void read_control_field(AuthorityRecord& record, const xml::Token& tok,
                          std::optional<RecordDefect>& defect) {
    std::size_t line = tok.line, column = tok.column;
    const std::string* tag = tok.attribute("tag");
    std::string tag_value = tag ? *tag : std::string();
    bool clean = true;
    std::string value = read_element_text(&clean);
    if (!is_three_digit_tag(tag_value) || tag_value >= "010") {
      defect = RecordDefect{"invalid controlfield tag '" + tag_value + "'", line, column};
      return;
    }
    if (!clean) {
      defect = RecordDefect{"controlfield " + tag_value + " contains child elements", line,
                            column};
      return;
    }
    // Control field values are positional; keep them verbatim.
    record.control_fields.push_back({std::move(tag_value), std::move(value)});
  }

  void read_data_field(AuthorityRecord& record, const xml::Token& tok,
                       std::optional<RecordDefect>& defect) {
    DataField field;
    std::size_t line = tok.line, column = tok.column;
    const std::string* tag = tok.attribute("tag");
    field.tag = tag ? *tag : std::string();
    if (const std::string* ind = tok.attribute("ind1"); ind && !ind->empty())
      field.indicator1 = (*ind)[0];
    if (const std::string* ind = tok.attribute("ind2"); ind && !ind->empty())
      field.indicator2 = (*ind)[0];

    bool bad = false;
    std::string bad_message;
    if (!is_three_digit_tag(field.tag) || field.tag < "010") {
      bad = true;
      bad_message = "invalid datafield tag '" + field.tag + "'";
    }

    std::size_t depth = 1;
    while (depth > 0) {
      if (!reader_.next())
        throw xml::ParseError("unexpected end of input inside datafield", reader_.line(),
                              reader_.column());
      const xml::Token& sub = reader_.token();
      if (sub.kind == xml::TokenKind::end_element) {
        --depth;
        continue;
      }
      if (sub.kind == xml::TokenKind::text) {
        if (!bad && depth == 1 && !canonical_text(sub.text).empty()) {
          bad = true;
          bad_message = "character data inside datafield " + field.tag;
        }
        continue;
      }
      if (sub.kind != xml::TokenKind::start_element)
        continue;
      if (bad || depth > 1) {
        ++depth;
        continue;
      }
      if (sub.local_name != "subfield" || sub.namespace_uri != kMarcXmlNamespace) {
        bad = true;
        bad_message = "unexpected element '" + sub.name + "' in datafield " + field.tag;
        ++depth;
        continue;
      }
      const std::string* code = sub.attribute("code");
      std::string code_value = code ? *code : std::string();
      bool clean = true;
      std::string raw = read_element_text(&clean);
      if (code_value.size() != 1
          || !std::isalnum(static_cast<unsigned char>(code_value[0]))) {
        bad = true;
        bad_message = "subfield with invalid code in datafield " + field.tag;
        continue;
      }
      if (!clean) {
        bad = true;
        bad_message = "subfield contains child elements in datafield " + field.tag;
        continue;
      }
      std::string value = canonical_text(raw);
      if (!value.empty())
        field.subfields.push_back({code_value[0], std::move(value)});
      // Empty subfields are dropped.
    }

    if (bad) {
      defect = RecordDefect{bad_message, line, column};
      return;
    }
    record.data_fields.push_back(std::move(field));
  }
};

// ---------------------------------------------------------------------------
// Canonical MARCXML output

namespace detail {

inline void write_escaped(std::ostream& out, std::string_view text, bool in_attribute) {
  for (char c : text) {
    switch (c) {
    case '&': out << "&amp;"; break;
    case '<': out << "&lt;"; break;
    case '>': out << "&gt;"; break;
    case '"':
      if (in_attribute)
        out << "&quot;";
      else
        out << c;
      break;
    default: out << c;
    }
  }
}

} // namespace detail

/// Writes records one at a time inside a `collection` element, so arbitrarily
/// large files can be produced with constant memory.
class MarcXmlWriter {
public:
  explicit MarcXmlWriter(std::ostream& out) : out_(out) {
    out_ << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out_ << "<collection xmlns=\"" << kMarcXmlNamespace << "\">\n";
  }

  ~MarcXmlWriter() { close(); }

  void write(const AuthorityRecord& record) {
    out_ << "  <record>\n";
    out_ << "    <leader>";
    detail::write_escaped(out_, record.leader, false);
    out_ << "</leader>\n";
    for (const auto& field : record.control_fields) {
      out_ << "    <controlfield tag=\"" << field.tag << "\">";
      detail::write_escaped(out_, field.value, false);
      out_ << "</controlfield>\n";
    }
    for (const auto& field : record.data_fields) {
      out_ << "    <datafield tag=\"" << field.tag << "\" ind1=\"";
      detail::write_escaped(out_, std::string_view(&field.indicator1, 1), true);
      out_ << "\" ind2=\"";
      detail::write_escaped(out_, std::string_view(&field.indicator2, 1), true);
      out_ << "\">\n";
      for (const auto& sf : field.subfields) {
        out_ << "      <subfield code=\"";
        detail::write_escaped(out_, std::string_view(&sf.code, 1), true);
        out_ << "\">";
        detail::write_escaped(out_, sf.value, false);
        out_ << "</subfield>\n";
      }
      out_ << "    </datafield>\n";
    }
    out_ << "  </record>\n";
  }

  void close() {
    if (!closed_) {
      out_ << "</collection>\n";
      closed_ = true;
    }
  }

private:
  std::ostream& out_;
  bool closed_ = false;
};

inline void write_marcxml(const std::vector<AuthorityRecord>& records, std::ostream& out) {
  MarcXmlWriter writer(out);
  for (const auto& record : records)
    writer.write(record);
  writer.close();
}

} // namespace marcskos::marc
