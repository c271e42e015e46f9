#pragma once

// XHTML page for one concept with RDFa markup. The page is both the
// human-readable representation and a machine-readable one: the concept's
// container carries about/typeof, literal properties are elements with
// `property`, IRI-valued properties are hyperlinks with `rel` whose href is
// the exact object IRI (browsers strip the #fragment when following the
// link, which lands on the target's document — "follow your nose").
// Typed literals carry a `datatype` CURIE so extraction recovers the exact
// triple set; language-tagged ones carry xml:lang.

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "marcskos/rdf.hpp"
#include "marcskos/serialize.hpp"

namespace marcskos::rdfa {

struct PageConfig {
  std::string site_name = "Concept scheme";
};

namespace detail {

inline const std::vector<serialize::detail::Prefix>& rdfa_prefixes() {
  static const std::vector<serialize::detail::Prefix> table = {
      {"rdf", rdf::vocab::kRdf},
      {"skos", rdf::vocab::kSkos},
      {"dcterms", rdf::vocab::kDcTerms},
      {"xsd", rdf::vocab::kXsd},
  };
  return table;
}

inline std::optional<std::string> curie_for(const std::string& iri) {
  for (const auto& entry : rdfa_prefixes()) {
    if (iri.size() > entry.ns.size()
        && std::string_view(iri).substr(0, entry.ns.size()) == entry.ns) {
      std::string_view local = std::string_view(iri).substr(entry.ns.size());
      if (serialize::detail::is_ncname(local))
        return std::string(entry.prefix) + ":" + std::string(local);
    }
  }
  return std::nullopt;
}

inline bool is_note_predicate(const rdf::Iri& predicate) {
  return predicate == rdf::vocab::note() || predicate == rdf::vocab::editorial_note()
         || predicate == rdf::vocab::definition() || predicate == rdf::vocab::scope_note()
         || predicate == rdf::vocab::example() || predicate == rdf::vocab::change_note()
         || predicate == rdf::vocab::history_note();
}

/// Short human label for a predicate: the IRI's local name.
inline std::string predicate_label(const rdf::Iri& predicate) {
  std::size_t cut = predicate.value.find_last_of("#/");
  if (cut == std::string::npos || cut + 1 >= predicate.value.size())
    return predicate.value;
  return predicate.value.substr(cut + 1);
}

} // namespace detail

/// Renders the description as a complete XHTML+RDFa document.
inline std::string render_xhtml_rdfa(const serialize::ConceptDescription& description,
                                     const PageConfig& config = {}) {
  using serialize::detail::xml_escape_attr;
  using serialize::detail::xml_escape_text;

  // Assign generated prefixes for any predicate/datatype namespace outside
  // the fixed table (deterministic: sorted).
  std::map<std::string, std::string> extra_ns;
  auto note_iri = [&extra_ns](const std::string& iri) {
    if (detail::curie_for(iri))
      return;
    std::optional<std::pair<std::string, std::string>> split = serialize::detail::split_iri(iri);
    if (!split)
      throw serialize::UnsupportedCombination("IRI not expressible as a CURIE: " + iri);
    extra_ns.emplace(split->first, "");
  };
  for (const auto& [predicate, object] : description.properties) {
    note_iri(predicate.value);
    if (rdf::is_literal(object)) {
      const rdf::Literal& lit = std::get<rdf::Literal>(object);
      if (lit.datatype)
        note_iri(lit.datatype->value);
    }
  }
  std::size_t counter = 0;
  for (auto& [ns, prefix] : extra_ns)
    prefix = "ns" + std::to_string(++counter);

  auto curie = [&extra_ns](const std::string& iri) -> std::string {
    if (std::optional<std::string> c = detail::curie_for(iri))
      return *c;
    std::pair<std::string, std::string> split = *serialize::detail::split_iri(iri);
    return extra_ns.at(split.first) + ":" + split.second;
  };

  // Partition properties into page sections. The first preferred label
  // becomes the page heading; every other property is rendered in exactly
  // one section so RDFa extraction recovers the full triple set.
  const std::string* title = nullptr;
  std::vector<const std::pair<rdf::Iri, rdf::Term>*> types, labels, links, notes, metadata;
  for (const auto& property : description.properties) {
    const auto& [predicate, object] = property;
    if (predicate == rdf::vocab::rdf_type() && rdf::is_iri(object)) {
      types.push_back(&property);
    } else if (predicate == rdf::vocab::pref_label() && rdf::is_literal(object) && !title) {
      title = &std::get<rdf::Literal>(object).lexical;
    } else if ((predicate == rdf::vocab::pref_label() || predicate == rdf::vocab::alt_label())
               && rdf::is_literal(object)) {
      labels.push_back(&property);
    } else if (rdf::is_iri(object)) {
      links.push_back(&property);
    } else if (detail::is_note_predicate(predicate)) {
      notes.push_back(&property);
    } else {
      metadata.push_back(&property);
    }
  }

  std::string page_title = title ? *title : description.subject.value;

  std::string out;
  out += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out += "<!DOCTYPE html PUBLIC \"-//W3C//DTD XHTML+RDFa 1.0//EN\" "
         "\"http://www.w3.org/MarkUp/DTD/xhtml-rdfa-1.dtd\">\n";
  out += "<html xmlns=\"http://www.w3.org/1999/xhtml\"";
  for (const auto& entry : detail::rdfa_prefixes()) {
    out += " xmlns:";
    out += entry.prefix;
    out += "=\"";
    out += entry.ns;
    out += "\"";
  }
  for (const auto& [ns, prefix] : extra_ns) {
    out += " xmlns:" + prefix + "=\"";
    xml_escape_attr(out, ns);
    out += "\"";
  }
  out += ">\n<head>\n  <title>";
  xml_escape_text(out, page_title);
  out += " — ";
  xml_escape_text(out, config.site_name);
  out += "</title>\n</head>\n<body>\n";

  // Concept container: everything extractable lives inside it.
  out += "  <div about=\"";
  xml_escape_attr(out, description.subject.value);
  out += "\"";
  if (!types.empty()) {
    out += " typeof=\"";
    bool first = true;
    for (const auto* property : types) {
      if (!first)
        out += ' ';
      first = false;
      out += curie(std::get<rdf::Iri>(property->second).value);
    }
    out += "\"";
  }
  out += ">\n";

  auto literal_attrs = [&out, &curie](const rdf::Literal& lit) {
    if (!lit.language.empty()) {
      out += " xml:lang=\"";
      xml_escape_attr(out, lit.language);
      out += "\"";
    } else if (lit.datatype) {
      out += " datatype=\"" + curie(lit.datatype->value) + "\"";
    }
  };

  if (title) {
    out += "    <h1 property=\"skos:prefLabel\">";
    xml_escape_text(out, *title);
    out += "</h1>\n";
  } else {
    out += "    <h1>";
    xml_escape_text(out, page_title);
    out += "</h1>\n";
  }

  if (!labels.empty()) {
    out += "    <div class=\"labels\">\n      <h2>Other labels</h2>\n      <ul>\n";
    for (const auto* property : labels) {
      const rdf::Literal& lit = std::get<rdf::Literal>(property->second);
      out += "        <li property=\"" + curie(property->first.value) + "\"";
      literal_attrs(lit);
      out += ">";
      xml_escape_text(out, lit.lexical);
      out += "</li>\n";
    }
    out += "      </ul>\n    </div>\n";
  }

  if (!links.empty()) {
    out += "    <div class=\"links\">\n      <h2>Related concepts</h2>\n      <ul>\n";
    for (const auto* property : links) {
      const rdf::Iri& target = std::get<rdf::Iri>(property->second);
      out += "        <li>";
      xml_escape_text(out, detail::predicate_label(property->first));
      out += ": <a rel=\"" + curie(property->first.value) + "\" href=\"";
      xml_escape_attr(out, target.value);
      out += "\">";
      xml_escape_text(out, target.value);
      out += "</a></li>\n";
    }
    out += "      </ul>\n    </div>\n";
  }

  if (!notes.empty()) {
    out += "    <div class=\"notes\">\n      <h2>Notes</h2>\n      <dl>\n";
    for (const auto* property : notes) {
      const rdf::Literal& lit = std::get<rdf::Literal>(property->second);
      out += "        <dt>";
      xml_escape_text(out, detail::predicate_label(property->first));
      out += "</dt>\n        <dd property=\"" + curie(property->first.value) + "\"";
      literal_attrs(lit);
      out += ">";
      xml_escape_text(out, lit.lexical);
      out += "</dd>\n";
    }
    out += "      </dl>\n    </div>\n";
  }

  if (!metadata.empty()) {
    out += "    <div class=\"metadata\">\n      <h2>Record details</h2>\n      <dl>\n";
    for (const auto* property : metadata) {
      const rdf::Literal& lit = std::get<rdf::Literal>(property->second);
      out += "        <dt>";
      xml_escape_text(out, detail::predicate_label(property->first));
      out += "</dt>\n        <dd property=\"" + curie(property->first.value) + "\"";
      literal_attrs(lit);
      out += ">";
      xml_escape_text(out, lit.lexical);
      out += "</dd>\n";
    }
    out += "      </dl>\n    </div>\n";
  }

  out += "  </div>\n";
  out += "  <div class=\"footer\"><p>";
  xml_escape_text(out, config.site_name);
  out += "</p></div>\n</body>\n</html>\n";
  return out;
}

} // namespace marcskos::rdfa
