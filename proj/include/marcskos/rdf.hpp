#pragma once

// A small in-memory RDF model: IRIs, literals (plain, language-tagged, or
// typed), triples, and an interning Graph with set semantics and
// deterministic ordering. Blank nodes are deliberately absent — every node
// the converter produces is named.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <variant>
#include <vector>

namespace marcskos::rdf {

struct Iri {
  std::string value;

  Iri() = default;
  explicit Iri(std::string v) : value(std::move(v)) {
    if (!looks_like_iri(value))
      throw std::invalid_argument("not an IRI: '" + value + "'");
  }

  static bool looks_like_iri(std::string_view v) {
    // Require an absolute IRI: a scheme followed by ':', and none of the
    // characters that would break angle-bracket serialization.
    std::size_t colon = v.find(':');
    if (colon == std::string_view::npos || colon == 0)
      return false;
    for (std::size_t i = 0; i < colon; ++i) {
      char c = v[i];
      bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z')
                || (i > 0 && ((c >= '0' && c <= '9') || c == '+' || c == '-' || c == '.'));
      if (!ok)
        return false;
    }
    for (char c : v) {
      if (c == '<' || c == '>' || c == '"' || c == ' ' || c == '\t' || c == '\n' || c == '\r'
          || c == '{' || c == '}' || c == '|' || c == '\\' || c == '^' || c == '`')
        return false;
    }
    return true;
  }

  bool operator==(const Iri& other) const { return value == other.value; }
  bool operator!=(const Iri& other) const { return value != other.value; }
  bool operator<(const Iri& other) const { return value < other.value; }
};

struct Literal {
  std::string lexical;
  std::string language;        // BCP47 tag, stored lowercase; empty if none
  std::optional<Iri> datatype; // mutually exclusive with language

  Literal() = default;

  static Literal plain(std::string lexical) {
    Literal lit;
    lit.lexical = std::move(lexical);
    return lit;
  }

  static Literal tagged(std::string lexical, std::string_view language) {
    if (language.empty())
      throw std::invalid_argument("language tag must be non-empty");
    Literal lit;
    lit.lexical = std::move(lexical);
    lit.language.reserve(language.size());
    for (char c : language)
      lit.language += static_cast<char>((c >= 'A' && c <= 'Z') ? c - 'A' + 'a' : c);
    return lit;
  }

  static Literal typed(std::string lexical, Iri datatype) {
    Literal lit;
    lit.lexical = std::move(lexical);
    lit.datatype = std::move(datatype);
    return lit;
  }

  bool operator==(const Literal& other) const {
    return lexical == other.lexical && language == other.language
           && datatype == other.datatype;
  }
  bool operator!=(const Literal& other) const { return !(*this == other); }

  bool operator<(const Literal& other) const {
    if (lexical != other.lexical)
      return lexical < other.lexical;
    if (language != other.language)
      return language < other.language;
    const std::string empty;
    const std::string& a = datatype ? datatype->value : empty;
    const std::string& b = other.datatype ? other.datatype->value : empty;
    return a < b;
  }
};

using Term = std::variant<Iri, Literal>;

inline bool is_iri(const Term& t) { return std::holds_alternative<Iri>(t); }
inline bool is_literal(const Term& t) { return std::holds_alternative<Literal>(t); }

/// Total order over terms: all IRIs sort before all literals.
inline bool term_less(const Term& a, const Term& b) {
  if (a.index() != b.index())
    return a.index() < b.index();
  if (is_iri(a))
    return std::get<Iri>(a) < std::get<Iri>(b);
  return std::get<Literal>(a) < std::get<Literal>(b);
}

struct Triple {
  Iri subject;
  Iri predicate;
  Term object;

  bool operator==(const Triple& other) const {
    return subject == other.subject && predicate == other.predicate && object == other.object;
  }
};

inline bool triple_less(const Triple& a, const Triple& b) {
  if (a.subject != b.subject)
    return a.subject < b.subject;
  if (a.predicate != b.predicate)
    return a.predicate < b.predicate;
  return term_less(a.object, b.object);
}

namespace vocab {

inline constexpr std::string_view kSkos = "http://www.w3.org/2004/02/skos/core#";
inline constexpr std::string_view kDcTerms = "http://purl.org/dc/terms/";
inline constexpr std::string_view kRdf = "http://www.w3.org/1999/02/22-rdf-syntax-ns#";
inline constexpr std::string_view kXsd = "http://www.w3.org/2001/XMLSchema#";

inline const Iri& rdf_type() {
  static const Iri iri(std::string(kRdf) + "type");
  return iri;
}
inline const Iri& concept_class() {
  static const Iri iri(std::string(kSkos) + "Concept");
  return iri;
}
inline const Iri& pref_label() {
  static const Iri iri(std::string(kSkos) + "prefLabel");
  return iri;
}
inline const Iri& alt_label() {
  static const Iri iri(std::string(kSkos) + "altLabel");
  return iri;
}
inline const Iri& broader() {
  static const Iri iri(std::string(kSkos) + "broader");
  return iri;
}
inline const Iri& narrower() {
  static const Iri iri(std::string(kSkos) + "narrower");
  return iri;
}
inline const Iri& related() {
  static const Iri iri(std::string(kSkos) + "related");
  return iri;
}
inline const Iri& in_scheme() {
  static const Iri iri(std::string(kSkos) + "inScheme");
  return iri;
}
inline const Iri& note() {
  static const Iri iri(std::string(kSkos) + "note");
  return iri;
}
inline const Iri& editorial_note() {
  static const Iri iri(std::string(kSkos) + "editorialNote");
  return iri;
}
inline const Iri& definition() {
  static const Iri iri(std::string(kSkos) + "definition");
  return iri;
}
inline const Iri& scope_note() {
  static const Iri iri(std::string(kSkos) + "scopeNote");
  return iri;
}
inline const Iri& example() {
  static const Iri iri(std::string(kSkos) + "example");
  return iri;
}
inline const Iri& change_note() {
  static const Iri iri(std::string(kSkos) + "changeNote");
  return iri;
}
inline const Iri& history_note() {
  static const Iri iri(std::string(kSkos) + "historyNote");
  return iri;
}
inline const Iri& dc_source() {
  static const Iri iri(std::string(kDcTerms) + "source");
  return iri;
}
inline const Iri& dc_created() {
  static const Iri iri(std::string(kDcTerms) + "created");
  return iri;
}
inline const Iri& dc_modified() {
  static const Iri iri(std::string(kDcTerms) + "modified");
  return iri;
}
inline const Iri& dc_lcc() {
  static const Iri iri(std::string(kDcTerms) + "lcc");
  return iri;
}
inline const Iri& xsd_date() {
  static const Iri iri(std::string(kXsd) + "date");
  return iri;
}
inline const Iri& xsd_date_time() {
  static const Iri iri(std::string(kXsd) + "dateTime");
  return iri;
}

} // namespace vocab

/// Interning triple set. Terms are stored once in an arena; triples are
/// (subject-id, predicate-id, object-id) tuples kept in a hash set for
/// set semantics and O(1) duplicate rejection. Pattern matching scans;
/// callers needing indexed lookup use the disk store instead.
class Graph {
public:
  bool insert(const Triple& triple) {
    return insert(triple.subject, triple.predicate, triple.object);
  }

  bool insert(const Iri& subject, const Iri& predicate, const Term& object) {
    std::uint32_t s = intern(Term(subject));
    std::uint32_t p = intern(Term(predicate));
    std::uint32_t o = intern(object);
    Key key{s, p, o};
    auto [it, inserted] = triple_set_.insert(key);
    if (inserted)
      triples_.push_back(key);
    return inserted;
  }

  bool contains(const Triple& triple) const {
    std::optional<std::uint32_t> s = find(Term(triple.subject));
    std::optional<std::uint32_t> p = find(Term(triple.predicate));
    std::optional<std::uint32_t> o = find(triple.object);
    if (!s || !p || !o)
      return false;
    return triple_set_.count(Key{*s, *p, *o}) != 0;
  }

  std::size_t size() const { return triples_.size(); }
  bool empty() const { return triples_.empty(); }

  /// Triples matching a pattern; std::nullopt is a wildcard.
  std::vector<Triple> match(const std::optional<Iri>& subject, const std::optional<Iri>& predicate,
                            const std::optional<Term>& object) const {
    std::vector<Triple> out;
    std::optional<std::uint32_t> s = subject ? find(Term(*subject)) : std::nullopt;
    std::optional<std::uint32_t> p = predicate ? find(Term(*predicate)) : std::nullopt;
    std::optional<std::uint32_t> o = object ? find(*object) : std::nullopt;
    if ((subject && !s) || (predicate && !p) || (object && !o))
      return out;
    for (const Key& key : triples_) {
      if (s && key.s != *s)
        continue;
      if (p && key.p != *p)
        continue;
      if (o && key.o != *o)
        continue;
      out.push_back(materialize(key));
    }
    return out;
  }

  /// All triples, sorted subject / predicate / object (IRIs before literals).
  std::vector<Triple> sorted_triples() const {
    std::vector<Triple> out;
    out.reserve(triples_.size());
    for (const Key& key : triples_)
      out.push_back(materialize(key));
    std::sort(out.begin(), out.end(), triple_less);
    return out;
  }

  /// All distinct subjects, sorted.
  std::vector<Iri> subjects() const {
    std::vector<Iri> out;
    std::vector<bool> seen(terms_.size(), false);
    for (const Key& key : triples_) {
      if (!seen[key.s]) {
        seen[key.s] = true;
        out.push_back(std::get<Iri>(terms_[key.s]));
      }
    }
    std::sort(out.begin(), out.end());
    return out;
  }

private:
  struct Key {
    std::uint32_t s, p, o;
    bool operator==(const Key& other) const {
      return s == other.s && p == other.p && o == other.o;
    }
  };
  struct KeyHash {
    std::size_t operator()(const Key& k) const {
      std::uint64_t h = 1469598103934665603ull;
      for (std::uint32_t part : {k.s, k.p, k.o}) {
        h ^= part;
        h *= 1099511628211ull;
      }
      return static_cast<std::size_t>(h);
    }
  };

  static std::string term_key(const Term& t) {
    // Injective encoding: kind byte, then components separated by '\x01'
    // (which cannot appear in IRIs and is vanishingly rare in literals;
    // a literal lexical containing it still encodes uniquely because the
    // kind byte and field order are fixed).
    if (is_iri(t))
      return "I" + std::get<Iri>(t).value;
    const Literal& lit = std::get<Literal>(t);
    std::string key = "L";
    key += lit.language;
    key += '\x01';
    key += lit.datatype ? lit.datatype->value : "";
    key += '\x01';
    key += lit.lexical;
    return key;
  }

  std::uint32_t intern(const Term& t) {
    std::string key = term_key(t);
    auto it = term_ids_.find(key);
    if (it != term_ids_.end())
      return it->second;
    std::uint32_t id = static_cast<std::uint32_t>(terms_.size());
    terms_.push_back(t);
    term_ids_.emplace(std::move(key), id);
    return id;
  }

  std::optional<std::uint32_t> find(const Term& t) const {
    auto it = term_ids_.find(term_key(t));
    if (it == term_ids_.end())
      return std::nullopt;
    return it->second;
  }

  Triple materialize(const Key& key) const {
    return Triple{std::get<Iri>(terms_[key.s]), std::get<Iri>(terms_[key.p]), terms_[key.o]};
  }

  std::vector<Term> terms_;
  std::unordered_map<std::string, std::uint32_t> term_ids_;
  std::unordered_set<Key, KeyHash> triple_set_;
  std::vector<Key> triples_; // insertion order
};

} // namespace marcskos::rdf
