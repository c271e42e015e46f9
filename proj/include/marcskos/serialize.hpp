#pragma once

// Machine-readable serializations of graphs and single-concept
// descriptions: RDF/XML (one rdf:Description per subject), N3 restricted to
// the Turtle-compatible subset, RDF/JSON, and N-Triples. All output is
// deterministic — triples sorted, fixed prefix table — so golden-file and
// cross-format tests are byte-stable. XHTML+RDFa is per-concept only and
// lives in rdfa.hpp.

#include <algorithm>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "marcskos/ntriples.hpp"
#include "marcskos/rdf.hpp"

namespace marcskos::serialize {

enum class Representation { rdfxml, n3, xhtml_rdfa, json, ntriples };

inline std::string_view media_type(Representation kind) {
  switch (kind) {
  case Representation::rdfxml: return "application/rdf+xml";
  case Representation::n3: return "text/n3";
  case Representation::xhtml_rdfa: return "application/xhtml+xml";
  case Representation::json: return "application/json";
  case Representation::ntriples: return "application/n-triples";
  }
  return "application/octet-stream"; // unreachable
}

/// URL extension → forced representation (.rdf/.n3/.json/.html).
inline std::optional<Representation> representation_for_extension(std::string_view ext) {
  if (ext == "rdf")
    return Representation::rdfxml;
  if (ext == "n3")
    return Representation::n3;
  if (ext == "json")
    return Representation::json;
  if (ext == "html")
    return Representation::xhtml_rdfa;
  return std::nullopt;
}

struct UnsupportedCombination : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Everything known about one concept, ordered for deterministic rendering.
struct ConceptDescription {
  rdf::Iri subject; // the concept's hash URI
  std::vector<std::pair<rdf::Iri, rdf::Term>> properties; // sorted (predicate, object)
  rdf::Iri document_uri; // concept URI with its #fragment removed

  std::vector<rdf::Triple> triples() const {
    std::vector<rdf::Triple> out;
    out.reserve(properties.size());
    for (const auto& [predicate, object] : properties)
      out.push_back({subject, predicate, object});
    return out;
  }
};

inline rdf::Iri document_uri_of(const rdf::Iri& concept_uri) {
  std::size_t hash = concept_uri.value.find('#');
  if (hash == std::string::npos)
    return concept_uri;
  return rdf::Iri(concept_uri.value.substr(0, hash));
}

/// Builds a description from the triples about one subject (any order).
inline ConceptDescription make_description(const rdf::Iri& concept_uri,
                                           const std::vector<rdf::Triple>& triples) {
  ConceptDescription description;
  description.subject = concept_uri;
  description.document_uri = document_uri_of(concept_uri);
  for (const rdf::Triple& triple : triples) {
    if (triple.subject == concept_uri)
      description.properties.emplace_back(triple.predicate, triple.object);
  }
  std::sort(description.properties.begin(), description.properties.end(),
            [](const auto& a, const auto& b) {
              if (!(a.first == b.first))
                return a.first < b.first;
              return rdf::term_less(a.second, b.second);
            });
  description.properties.erase(
      std::unique(description.properties.begin(), description.properties.end(),
                  [](const auto& a, const auto& b) {
                    return a.first == b.first && !rdf::term_less(a.second, b.second)
                           && !rdf::term_less(b.second, a.second);
                  }),
      description.properties.end());
  return description;
}

namespace detail {

struct Prefix {
  std::string_view prefix;
  std::string_view ns;
};

inline const std::vector<Prefix>& fixed_prefixes() {
  static const std::vector<Prefix> table = {
      {"rdf", rdf::vocab::kRdf},
      {"skos", rdf::vocab::kSkos},
      {"dcterms", rdf::vocab::kDcTerms},
  };
  return table;
}

inline bool is_name_start(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
}

inline bool is_name_char(char c) {
  return is_name_start(c) || (c >= '0' && c <= '9') || c == '-' || c == '.';
}

/// Conservative NCName check (valid in both XML element names and Turtle
/// prefixed-name local parts).
inline bool is_ncname(std::string_view s) {
  if (s.empty() || !is_name_start(s[0]))
    return false;
  for (char c : s) {
    if (!is_name_char(c))
      return false;
  }
  return s.back() != '.';
}

/// skos:prefLabel style name when the IRI sits in the fixed prefix table.
inline std::optional<std::string> qname_for(const std::string& iri) {
  for (const Prefix& entry : fixed_prefixes()) {
    if (iri.size() > entry.ns.size() && std::string_view(iri).substr(0, entry.ns.size()) == entry.ns) {
      std::string_view local = std::string_view(iri).substr(entry.ns.size());
      if (is_ncname(local))
        return std::string(entry.prefix) + ":" + std::string(local);
    }
  }
  return std::nullopt;
}

/// Splits an IRI into (namespace, local) at the last '#' or '/'. Local part
/// must be a valid name; callers reject the IRI otherwise.
inline std::optional<std::pair<std::string, std::string>> split_iri(const std::string& iri) {
  std::size_t cut = iri.find_last_of("#/");
  if (cut == std::string::npos || cut + 1 >= iri.size())
    return std::nullopt;
  std::string local = iri.substr(cut + 1);
  if (!is_ncname(local))
    return std::nullopt;
  return std::make_pair(iri.substr(0, cut + 1), std::move(local));
}

inline void xml_escape_text(std::string& out, std::string_view text) {
  for (char c : text) {
    switch (c) {
    case '&': out += "&amp;"; break;
    case '<': out += "&lt;"; break;
    case '>': out += "&gt;"; break;
    default: out += c;
    }
  }
}

inline void xml_escape_attr(std::string& out, std::string_view text) {
  for (char c : text) {
    switch (c) {
    case '&': out += "&amp;"; break;
    case '<': out += "&lt;"; break;
    case '>': out += "&gt;"; break;
    case '"': out += "&quot;"; break;
    default: out += c;
    }
  }
}

inline std::vector<rdf::Triple> sorted_copy(std::vector<rdf::Triple> triples) {
  std::sort(triples.begin(), triples.end(), rdf::triple_less);
  triples.erase(std::unique(triples.begin(), triples.end()), triples.end());
  return triples;
}

// --- RDF/XML ---------------------------------------------------------------

inline std::string to_rdfxml(const std::vector<rdf::Triple>& sorted) {
  // Predicates outside the fixed table get numbered namespace prefixes,
  // assigned in sorted order for determinism.
  std::map<std::string, std::string> extra_ns; // namespace → prefix
  for (const rdf::Triple& triple : sorted) {
    const std::string& p = triple.predicate.value;
    if (qname_for(p))
      continue;
    std::optional<std::pair<std::string, std::string>> split = split_iri(p);
    if (!split)
      throw UnsupportedCombination("predicate IRI not expressible as an XML name: " + p);
    extra_ns.emplace(split->first, "");
  }
  std::size_t counter = 0;
  for (auto& [ns, prefix] : extra_ns)
    prefix = "ns" + std::to_string(++counter);

  std::string out = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out += "<rdf:RDF xmlns:rdf=\"";
  out += rdf::vocab::kRdf;
  out += "\" xmlns:skos=\"";
  out += rdf::vocab::kSkos;
  out += "\" xmlns:dcterms=\"";
  out += rdf::vocab::kDcTerms;
  out += "\"";
  for (const auto& [ns, prefix] : extra_ns) {
    out += " xmlns:" + prefix + "=\"";
    xml_escape_attr(out, ns);
    out += "\"";
  }
  out += ">\n";

  auto element_name = [&extra_ns](const std::string& predicate) -> std::string {
    if (std::optional<std::string> qname = qname_for(predicate))
      return *qname;
    std::pair<std::string, std::string> split = *split_iri(predicate);
    return extra_ns.at(split.first) + ":" + split.second;
  };

  std::size_t i = 0;
  while (i < sorted.size()) {
    const rdf::Iri& subject = sorted[i].subject;
    out += "  <rdf:Description rdf:about=\"";
    xml_escape_attr(out, subject.value);
    out += "\">\n";
    for (; i < sorted.size() && sorted[i].subject == subject; ++i) {
      std::string name = element_name(sorted[i].predicate.value);
      out += "    <" + name;
      const rdf::Term& object = sorted[i].object;
      if (rdf::is_iri(object)) {
        out += " rdf:resource=\"";
        xml_escape_attr(out, std::get<rdf::Iri>(object).value);
        out += "\"/>\n";
      } else {
        const rdf::Literal& lit = std::get<rdf::Literal>(object);
        if (!lit.language.empty()) {
          out += " xml:lang=\"";
          xml_escape_attr(out, lit.language);
          out += "\"";
        } else if (lit.datatype) {
          out += " rdf:datatype=\"";
          xml_escape_attr(out, lit.datatype->value);
          out += "\"";
        }
        out += ">";
        xml_escape_text(out, lit.lexical);
        out += "</" + name + ">\n";
      }
    }
    out += "  </rdf:Description>\n";
  }
  out += "</rdf:RDF>\n";
  return out;
}

// --- N3 (Turtle-compatible subset) ------------------------------------------

inline std::string turtle_term(const rdf::Term& term) {
  if (rdf::is_iri(term)) {
    const std::string& iri = std::get<rdf::Iri>(term).value;
    if (std::optional<std::string> qname = qname_for(iri))
      return *qname;
    return "<" + iri + ">";
  }
  const rdf::Literal& lit = std::get<rdf::Literal>(term);
  std::string out = "\"";
  ntriples::escape_literal_into(out, lit.lexical);
  out += '"';
  if (!lit.language.empty()) {
    out += '@';
    out += lit.language;
  } else if (lit.datatype) {
    out += "^^";
    if (std::optional<std::string> qname = qname_for(lit.datatype->value))
      out += *qname;
    else
      out += "<" + lit.datatype->value + ">";
  }
  return out;
}

inline std::string to_n3(const std::vector<rdf::Triple>& sorted) {
  std::string out;
  out += "@prefix rdf: <";
  out += rdf::vocab::kRdf;
  out += "> .\n@prefix skos: <";
  out += rdf::vocab::kSkos;
  out += "> .\n@prefix dcterms: <";
  out += rdf::vocab::kDcTerms;
  out += "> .\n";

  std::size_t i = 0;
  while (i < sorted.size()) {
    const rdf::Iri& subject = sorted[i].subject;
    out += "\n<" + subject.value + ">";
    bool first_predicate = true;
    while (i < sorted.size() && sorted[i].subject == subject) {
      const rdf::Iri& predicate = sorted[i].predicate;
      if (first_predicate) {
        out += " ";
        first_predicate = false;
      } else {
        out += " ;\n    ";
      }
      out += turtle_term(rdf::Term(predicate));
      bool first_object = true;
      for (; i < sorted.size() && sorted[i].subject == subject
             && sorted[i].predicate == predicate;
           ++i) {
        out += first_object ? " " : " , ";
        first_object = false;
        out += turtle_term(sorted[i].object);
      }
    }
    out += " .\n";
  }
  return out;
}

// --- RDF/JSON ----------------------------------------------------------------

inline nlohmann::ordered_json json_object_term(const rdf::Term& term) {
  nlohmann::ordered_json node;
  if (rdf::is_iri(term)) {
    node["type"] = "uri";
    node["value"] = std::get<rdf::Iri>(term).value;
  } else {
    const rdf::Literal& lit = std::get<rdf::Literal>(term);
    node["type"] = "literal";
    node["value"] = lit.lexical;
    if (!lit.language.empty())
      node["lang"] = lit.language;
    if (lit.datatype)
      node["datatype"] = lit.datatype->value;
  }
  return node;
}

inline std::string to_rdf_json(const std::vector<rdf::Triple>& sorted) {
  nlohmann::ordered_json root = nlohmann::ordered_json::object();
  std::size_t i = 0;
  while (i < sorted.size()) {
    const rdf::Iri& subject = sorted[i].subject;
    nlohmann::ordered_json predicates = nlohmann::ordered_json::object();
    while (i < sorted.size() && sorted[i].subject == subject) {
      const rdf::Iri& predicate = sorted[i].predicate;
      nlohmann::ordered_json objects = nlohmann::ordered_json::array();
      for (; i < sorted.size() && sorted[i].subject == subject
             && sorted[i].predicate == predicate;
           ++i)
        objects.push_back(json_object_term(sorted[i].object));
      predicates[predicate.value] = std::move(objects);
    }
    root[subject.value] = std::move(predicates);
  }
  return root.dump(2) + "\n";
}

inline std::string to_ntriples(const std::vector<rdf::Triple>& sorted) {
  std::string out;
  for (const rdf::Triple& triple : sorted) {
    out += ntriples::render_triple(triple);
    out += '\n';
  }
  return out;
}

} // namespace detail

/// Serializes a triple set (sorted and de-duplicated internally).
/// XHTML+RDFa is per-concept and is rejected here.
inline std::string serialize_triples(std::vector<rdf::Triple> triples, Representation kind) {
  std::vector<rdf::Triple> sorted = detail::sorted_copy(std::move(triples));
  switch (kind) {
  case Representation::rdfxml: return detail::to_rdfxml(sorted);
  case Representation::n3: return detail::to_n3(sorted);
  case Representation::json: return detail::to_rdf_json(sorted);
  case Representation::ntriples: return detail::to_ntriples(sorted);
  case Representation::xhtml_rdfa:
    throw UnsupportedCombination("XHTML+RDFa rendering is per-concept, not whole-graph");
  }
  throw UnsupportedCombination("unknown representation");
}

inline std::string serialize_graph(const rdf::Graph& graph, Representation kind) {
  return serialize_triples(graph.sorted_triples(), kind);
}

inline std::string serialize_description(const ConceptDescription& description,
                                         Representation kind) {
  return serialize_triples(description.triples(), kind);
}

} // namespace marcskos::serialize
