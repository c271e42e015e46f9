#pragma once

// Authority-record → SKOS conversion. Pass 1 (Converter::add) mints a hash
// URI per record from its normalized control number, emits the field-mapped
// triples, and registers the preferred label in a lookup index. Pass 2
// (Converter::finish) resolves textual see-also references against that
// index: resolved broader references materialize both skos:broader and the
// inverse skos:narrower; unresolvable references are reported, never
// guessed.

#include <algorithm>
#include <cstdio>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "marcskos/lccn.hpp"
#include "marcskos/marc.hpp"
#include "marcskos/rdf.hpp"

namespace marcskos::convert {

struct ConversionConfig {
  std::string base_uri;             // concept URI prefix, must end with '/'
  std::string fragment = "concept"; // hash-fragment naming the concept
  std::optional<rdf::Iri> scheme_uri; // emitted as skos:inScheme when set
  std::string subdivision_separator = "--";
  int century_pivot = 50;    // two-digit year >= pivot → 19xx, else 20xx
  bool extended_tags = false; // also map 148/155 family (chronological, genre/form)

  void validate() const {
    if (base_uri.empty() || base_uri.back() != '/')
      throw std::invalid_argument("base URI must end with '/': '" + base_uri + "'");
    if (!rdf::Iri::looks_like_iri(base_uri))
      throw std::invalid_argument("base URI is not an absolute IRI: '" + base_uri + "'");
    if (fragment.find('#') != std::string::npos)
      throw std::invalid_argument("fragment must not contain '#': '" + fragment + "'");
    if (century_pivot < 0 || century_pivot > 99)
      throw std::invalid_argument("century pivot must be a two-digit year");
  }
};

/// Canonical key for matching heading text: whitespace collapsed, all
/// trailing periods/spaces removed, case preserved. Idempotent.
inline std::string label_key(std::string_view label) {
  std::string key = marc::canonical_text(label);
  while (!key.empty() && (key.back() == '.' || key.back() == ' '))
    key.pop_back();
  return key;
}

enum class RefRelation { broader, related };

/// A see-also reference waiting for pass-2 resolution: the source concept
/// points at a target identified only by heading text.
struct HeadingRef {
  rdf::Iri source_concept;
  std::string target_label; // label_key form, non-empty
  RefRelation relation = RefRelation::related;
  std::string source_tag;
};

struct FieldDefect {
  std::size_t record_position = 0;
  std::string tag;
  std::string message;
};

struct SkippedRecord {
  std::size_t record_position = 0;
  std::string reason;
};

struct ConversionReport {
  std::size_t records_in = 0;
  std::size_t concepts_out = 0;
  std::size_t triples_out = 0;
  std::vector<HeadingRef> unresolved_refs;
  std::vector<SkippedRecord> skipped_records;
  std::vector<FieldDefect> field_defects; // dropped fields (bad dates etc.)
};

/// label_key text → sorted list of concept URIs carrying that preferred
/// label. Deterministic iteration (sorted keys) so it can be persisted
/// byte-stably.
class LabelIndex {
public:
  void add(const std::string& key, const rdf::Iri& uri) {
    std::vector<rdf::Iri>& list = entries_[key];
    auto it = std::lower_bound(list.begin(), list.end(), uri);
    if (it == list.end() || !(*it == uri))
      list.insert(it, uri);
  }

  /// Lookup by an already-canonicalized key.
  const std::vector<rdf::Iri>* find_key(std::string_view key) const {
    auto it = entries_.find(key);
    if (it == entries_.end())
      return nullptr;
    return &it->second;
  }

  /// Lookup by raw label text (canonicalized here).
  std::vector<rdf::Iri> lookup(std::string_view raw_label) const {
    const std::vector<rdf::Iri>* found = find_key(label_key(raw_label));
    return found ? *found : std::vector<rdf::Iri>{};
  }

  const std::map<std::string, std::vector<rdf::Iri>, std::less<>>& entries() const {
    return entries_;
  }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

private:
  std::map<std::string, std::vector<rdf::Iri>, std::less<>> entries_;
};

namespace detail {

inline bool is_heading_tag(std::string_view tag, const ConversionConfig& config) {
  if (tag == "150" || tag == "151")
    return true;
  return config.extended_tags && (tag == "148" || tag == "155");
}

inline bool is_variant_tag(std::string_view tag, const ConversionConfig& config) {
  if (tag == "450" || tag == "451")
    return true;
  return config.extended_tags && (tag == "448" || tag == "455");
}

inline bool is_link_tag(std::string_view tag, const ConversionConfig& config) {
  if (tag == "550" || tag == "551")
    return true;
  return config.extended_tags && (tag == "548" || tag == "555");
}

struct NoteRule {
  const char* tag;
  const rdf::Iri& (*predicate)();
  const char* codes; // subfields joined with single spaces, document order
};

inline const NoteRule* note_rule(std::string_view tag) {
  static const NoteRule rules[] = {
      {"667", rdf::vocab::note, "a"},          {"670", rdf::vocab::dc_source, "abu"},
      {"675", rdf::vocab::editorial_note, "a"}, {"678", rdf::vocab::definition, "abu"},
      {"680", rdf::vocab::scope_note, "ai"},    {"681", rdf::vocab::example, "ai"},
      {"682", rdf::vocab::change_note, "ai"},   {"688", rdf::vocab::history_note, "a"},
  };
  for (const NoteRule& rule : rules) {
    if (tag == rule.tag)
      return &rule;
  }
  return nullptr;
}

inline bool all_digits(std::string_view s) {
  for (char c : s) {
    if (c < '0' || c > '9')
      return false;
  }
  return !s.empty();
}

} // namespace detail

/// Flattens a heading field: subfield a, each b appended with a space, then
/// each of v/x/y/z in document order appended with the subdivision
/// separator. Returns std::nullopt when subfield a is absent or empty.
inline std::optional<std::string> build_label(const marc::DataField& field,
                                              const ConversionConfig& config) {
  const std::string* a = field.first_subfield('a');
  if (!a || a->empty())
    return std::nullopt;
  std::string out = *a;
  for (const auto& sf : field.subfields) {
    if (sf.code == 'b') {
      out += ' ';
      out += sf.value;
    }
  }
  for (const auto& sf : field.subfields) {
    if (sf.code == 'v' || sf.code == 'x' || sf.code == 'y' || sf.code == 'z') {
      out += config.subdivision_separator;
      out += sf.value;
    }
  }
  return out;
}

/// First six characters of the 008 field (yymmdd) → ISO date, century
/// chosen by the pivot. std::nullopt when not six leading digits.
inline std::optional<std::string> map_created_date(std::string_view field_008, int pivot) {
  if (field_008.size() < 6 || !detail::all_digits(field_008.substr(0, 6)))
    return std::nullopt;
  int yy = (field_008[0] - '0') * 10 + (field_008[1] - '0');
  int year = (yy >= pivot ? 1900 : 2000) + yy;
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%c%c-%c%c", year, field_008[2], field_008[3],
                field_008[4], field_008[5]);
  return std::string(buf);
}

/// 005 value (yyyymmddhhmmss with optional .fraction) → ISO dateTime,
/// fraction dropped. std::nullopt when the shape is wrong.
inline std::optional<std::string> map_modified_date(std::string_view field_005) {
  if (field_005.size() < 14 || !detail::all_digits(field_005.substr(0, 14)))
    return std::nullopt;
  if (field_005.size() > 14) {
    if (field_005[14] != '.' || !detail::all_digits(field_005.substr(15)))
      return std::nullopt;
  }
  std::string out;
  out.reserve(19);
  out.append(field_005.substr(0, 4));
  out += '-';
  out.append(field_005.substr(4, 2));
  out += '-';
  out.append(field_005.substr(6, 2));
  out += 'T';
  out.append(field_005.substr(8, 2));
  out += ':';
  out.append(field_005.substr(10, 2));
  out += ':';
  out.append(field_005.substr(12, 2));
  return out;
}

struct MappedRecord {
  lccn::Lccn control_number;
  rdf::Iri concept_uri;
  std::string pref_label;
  std::vector<rdf::Triple> triples;
  std::vector<HeadingRef> refs;
  std::vector<FieldDefect> defects; // record_position filled by the caller
};

struct Skip {
  std::string reason;
};

using MapResult = std::variant<MappedRecord, Skip>;

/// Applies the field mapping to one record. Pure; see-also references come
/// back unresolved for the caller's pass 2.
inline MapResult map_record(const marc::AuthorityRecord& record,
                            const ConversionConfig& config) {
  // Control number: 010 subfield a preferred, 001 as fallback.
  std::optional<std::string> raw_number;
  if (const marc::DataField* f010 = record.data_field("010")) {
    if (const std::string* a = f010->first_subfield('a'))
      raw_number = *a;
  }
  if (!raw_number) {
    if (const marc::ControlField* f001 = record.control_field("001")) {
      std::string value = marc::canonical_text(f001->value);
      if (!value.empty())
        raw_number = std::move(value);
    }
  }
  if (!raw_number)
    return Skip{"no control number (010 subfield a or 001)"};
  std::optional<lccn::Lccn> number = lccn::normalize(*raw_number);
  if (!number)
    return Skip{"control number '" + *raw_number + "' does not normalize to a valid LCCN"};

  MappedRecord out;
  out.control_number = *number;
  out.concept_uri = lccn::mint_concept_uri(*number, config.base_uri, config.fragment);

  // Authorized heading → prefLabel. First usable heading field wins; spares
  // are dropped (and reported) to keep prefLabel unique per concept.
  bool have_pref = false;
  for (const auto& field : record.data_fields) {
    if (!detail::is_heading_tag(field.tag, config))
      continue;
    std::optional<std::string> label = build_label(field, config);
    if (!label) {
      out.defects.push_back({0, field.tag, "heading field without subfield a dropped"});
      continue;
    }
    if (have_pref) {
      out.defects.push_back({0, field.tag, "additional authorized heading dropped"});
      continue;
    }
    have_pref = true;
    out.pref_label = *label;
  }
  if (!have_pref)
    return Skip{"no authorized heading"};

  auto emit = [&out](const rdf::Iri& predicate, rdf::Term object) {
    out.triples.push_back({out.concept_uri, predicate, std::move(object)});
  };

  emit(rdf::vocab::rdf_type(), rdf::Term(rdf::vocab::concept_class()));
  if (config.scheme_uri)
    emit(rdf::vocab::in_scheme(), rdf::Term(*config.scheme_uri));
  emit(rdf::vocab::pref_label(), rdf::Term(rdf::Literal::plain(out.pref_label)));

  for (const auto& field : record.data_fields) {
    if (detail::is_variant_tag(field.tag, config)) {
      std::optional<std::string> label = build_label(field, config);
      if (!label) {
        out.defects.push_back({0, field.tag, "variant heading without subfield a dropped"});
        continue;
      }
      emit(rdf::vocab::alt_label(), rdf::Term(rdf::Literal::plain(*label)));
    } else if (detail::is_link_tag(field.tag, config)) {
      const std::string* w = field.first_subfield('w');
      if (w && !w->empty() && (*w)[0] == 'h')
        continue; // narrower is reconstructed from the partner's broader
      RefRelation relation = (w && !w->empty() && (*w)[0] == 'g') ? RefRelation::broader
                                                                  : RefRelation::related;
      std::optional<std::string> label = build_label(field, config);
      if (!label) {
        out.defects.push_back({0, field.tag, "see-also field without subfield a dropped"});
        continue;
      }
      std::string key = label_key(*label);
      if (key.empty()) {
        out.defects.push_back({0, field.tag, "see-also heading is empty after canonicalization"});
        continue;
      }
      out.refs.push_back({out.concept_uri, std::move(key), relation, field.tag});
    } else if (field.tag == "053") {
      if (const std::string* a = field.first_subfield('a'))
        emit(rdf::vocab::dc_lcc(), rdf::Term(rdf::Literal::plain(*a)));
    } else if (const detail::NoteRule* rule = detail::note_rule(field.tag)) {
      std::string joined;
      for (const auto& sf : field.subfield_values(rule->codes)) {
        if (!joined.empty())
          joined += ' ';
        joined += sf.value;
      }
      if (!joined.empty())
        emit(rule->predicate(), rdf::Term(rdf::Literal::plain(std::move(joined))));
    }
  }

  if (const marc::ControlField* f008 = record.control_field("008")) {
    std::optional<std::string> created = map_created_date(f008->value, config.century_pivot);
    if (created)
      emit(rdf::vocab::dc_created(),
           rdf::Term(rdf::Literal::typed(std::move(*created), rdf::vocab::xsd_date())));
    else
      out.defects.push_back({0, "008", "malformed creation date dropped"});
  }
  if (const marc::ControlField* f005 = record.control_field("005")) {
    std::optional<std::string> modified = map_modified_date(f005->value);
    if (modified)
      emit(rdf::vocab::dc_modified(),
           rdf::Term(rdf::Literal::typed(std::move(*modified), rdf::vocab::xsd_date_time())));
    else
      out.defects.push_back({0, "005", "malformed modification date dropped"});
  }

  return MapResult(std::move(out));
}

struct ConversionResult {
  rdf::Graph graph;
  LabelIndex labels;
  ConversionReport report;
};

/// Streaming two-pass driver: feed records one at a time with add(), then
/// call finish() once to resolve references and take the result.
class Converter {
public:
  explicit Converter(ConversionConfig config) : config_(std::move(config)) {
    config_.validate();
  }

  const ConversionConfig& config() const { return config_; }

  void add(const marc::AuthorityRecord& record) {
    std::size_t position = report_.records_in++;
    MapResult result = map_record(record, config_);
    if (Skip* skip = std::get_if<Skip>(&result)) {
      report_.skipped_records.push_back({position, std::move(skip->reason)});
      return;
    }
    MappedRecord& mapped = std::get<MappedRecord>(result);
    if (!seen_numbers_.insert(mapped.control_number.value).second) {
      report_.skipped_records.push_back(
          {position, "duplicate LCCN '" + mapped.control_number.value + "'"});
      return;
    }
    for (FieldDefect& defect : mapped.defects) {
      defect.record_position = position;
      report_.field_defects.push_back(std::move(defect));
    }
    for (const rdf::Triple& triple : mapped.triples)
      graph_.insert(triple);
    labels_.add(label_key(mapped.pref_label), mapped.concept_uri);
    for (HeadingRef& ref : mapped.refs)
      refs_.push_back(std::move(ref));
    ++report_.concepts_out;
  }

  /// Pass 2. A reference resolves only when exactly one concept carries the
  /// target label; zero or several candidates make it unresolved (linking
  /// to an arbitrary candidate would be a guess).
  ConversionResult finish() {
    for (HeadingRef& ref : refs_) {
      const std::vector<rdf::Iri>* candidates = labels_.find_key(ref.target_label);
      if (candidates && candidates->size() == 1) {
        const rdf::Iri& target = candidates->front();
        if (ref.relation == RefRelation::broader) {
          graph_.insert(ref.source_concept, rdf::vocab::broader(), rdf::Term(target));
          graph_.insert(target, rdf::vocab::narrower(), rdf::Term(ref.source_concept));
        } else {
          graph_.insert(ref.source_concept, rdf::vocab::related(), rdf::Term(target));
        }
      } else {
        report_.unresolved_refs.push_back(std::move(ref));
      }
    }
    refs_.clear();
    report_.triples_out = graph_.size();
    return ConversionResult{std::move(graph_), std::move(labels_), std::move(report_)};
  }

private:
  ConversionConfig config_;
  rdf::Graph graph_;
  LabelIndex labels_;
  ConversionReport report_;
  std::vector<HeadingRef> refs_;
  std::set<std::string> seen_numbers_;
};

inline ConversionResult convert_records(const std::vector<marc::AuthorityRecord>& records,
                                        const ConversionConfig& config) {
  Converter converter(config);
  for (const marc::AuthorityRecord& record : records)
    converter.add(record);
  return converter.finish();
}

} // namespace marcskos::convert
