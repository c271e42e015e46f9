#pragma once

// Accept-header negotiation over a fixed, ordered table of supported media
// types. Each table entry's effective quality is taken from the most
// specific client range that matches it (exact beats type/*); the winner is
// the entry with the highest quality, ties broken by table order. The
// wildcard */* range selects the table's own */* entry — the served default
// for clients that accept anything.

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "marcskos/serialize.hpp"

namespace marcskos::negotiate {

struct TableEntry {
  std::string_view media_type;
  serialize::Representation representation;
};

inline const std::vector<TableEntry>& negotiation_table() {
  using serialize::Representation;
  static const std::vector<TableEntry> table = {
      {"application/rdf+xml", Representation::rdfxml},
      {"text/n3", Representation::n3},
      {"text/rdf+n3", Representation::n3},
      {"application/xhtml+xml", Representation::xhtml_rdfa},
      {"text/html", Representation::xhtml_rdfa},
      {"application/json", Representation::json},
      {"*/*", Representation::xhtml_rdfa},
  };
  return table;
}

inline constexpr serialize::Representation kDefaultRepresentation =
    serialize::Representation::xhtml_rdfa;

struct MediaRange {
  std::string type;    // lowercased; "*" for wildcard
  std::string subtype; // lowercased; "*" for wildcard
  double q = 1.0;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t'))
    s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t'))
    s.remove_suffix(1);
  return s;
}

inline std::string lower(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s)
    out += static_cast<char>((c >= 'A' && c <= 'Z') ? c - 'A' + 'a' : c);
  return out;
}

inline std::optional<double> parse_q(std::string_view value) {
  // qvalue = ("0" ["." 0*3DIGIT]) / ("1" ["." 0*3("0")])
  if (value.empty() || value.size() > 5)
    return std::nullopt;
  if (value[0] != '0' && value[0] != '1')
    return std::nullopt;
  double result = value[0] - '0';
  if (value.size() > 1) {
    if (value[1] != '.')
      return std::nullopt;
    double scale = 0.1;
    for (std::size_t i = 2; i < value.size(); ++i) {
      if (value[i] < '0' || value[i] > '9')
        return std::nullopt;
      result += (value[i] - '0') * scale;
      scale /= 10;
    }
  }
  if (result > 1.0)
    return std::nullopt;
  return result;
}

} // namespace detail

/// Parses an Accept header into media ranges. Malformed list members are
/// dropped; the caller decides what an empty result means.
inline std::vector<MediaRange> parse_accept(std::string_view header) {
  std::vector<MediaRange> ranges;
  std::size_t start = 0;
  while (start <= header.size()) {
    std::size_t comma = header.find(',', start);
    std::string_view item = header.substr(
        start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
    start = comma == std::string_view::npos ? header.size() + 1 : comma + 1;

    // split off parameters
    std::size_t semi = item.find(';');
    std::string_view range_part = detail::trim(item.substr(0, semi));
    if (range_part.empty())
      continue;

    std::size_t slash = range_part.find('/');
    if (slash == std::string_view::npos || slash == 0 || slash + 1 >= range_part.size())
      continue;
    MediaRange range;
    range.type = detail::lower(range_part.substr(0, slash));
    range.subtype = detail::lower(range_part.substr(slash + 1));
    if (range.type.find_first_of(" \t") != std::string::npos
        || range.subtype.find_first_of(" \t") != std::string::npos)
      continue;
    if (range.type == "*" && range.subtype != "*")
      continue; // */subtype is not a valid range

    bool valid = true;
    while (semi != std::string_view::npos) {
      std::size_t next = item.find(';', semi + 1);
      std::string_view param = detail::trim(item.substr(
          semi + 1, next == std::string_view::npos ? std::string_view::npos : next - semi - 1));
      semi = next;
      std::size_t eq = param.find('=');
      if (eq == std::string_view::npos)
        continue; // bare parameter — ignore
      std::string name = detail::lower(detail::trim(param.substr(0, eq)));
      std::string_view value = detail::trim(param.substr(eq + 1));
      if (name == "q") {
        std::optional<double> q = detail::parse_q(value);
        if (!q) {
          valid = false; // malformed quality — drop the whole range
          break;
        }
        range.q = *q;
        break; // parameters after q are accept-ext; irrelevant here
      }
    }
    if (valid)
      ranges.push_back(std::move(range));
  }
  return ranges;
}

/// Chooses the representation for an Accept header. Absent header → the
/// default. std::nullopt means no supported type is acceptable (HTTP 406).
inline std::optional<serialize::Representation>
negotiate(const std::optional<std::string>& accept_header) {
  if (!accept_header)
    return kDefaultRepresentation;
  std::string_view header = detail::trim(*accept_header);
  if (header.empty())
    return kDefaultRepresentation; // lenient: empty header treated as absent

  std::vector<MediaRange> ranges = parse_accept(header);
  if (ranges.empty())
    return std::nullopt; // present but unparseable → nothing acceptable

  const std::vector<TableEntry>& table = negotiation_table();
  double best_q = -1.0;
  std::optional<serialize::Representation> best;
  for (const TableEntry& entry : table) {
    std::string_view media = entry.media_type;
    std::size_t slash = media.find('/');
    std::string_view entry_type = media.substr(0, slash);
    std::string_view entry_subtype = media.substr(slash + 1);

    int best_specificity = 0;
    double q = 0.0;
    for (const MediaRange& range : ranges) {
      int specificity = 0;
      if (range.type == entry_type && range.subtype == entry_subtype)
        specificity = 2; // exact (this is how */* selects the */* entry)
      else if (range.subtype == "*" && range.type == entry_type && entry_subtype != "*")
        specificity = 1; // type/* covers the type's concrete entries
      if (specificity > best_specificity) {
        best_specificity = specificity;
        q = range.q;
      }
    }
    if (best_specificity == 0 || q <= 0.0)
      continue;
    if (q > best_q + 1e-9) { // strictly higher quality wins; ties keep table order
      best_q = q;
      best = entry.representation;
    }
  }
  return best;
}

/// Plain-text list of supported media types for 406 responses.
inline std::string supported_types_text() {
  std::string out = "Supported media types:\n";
  for (const TableEntry& entry : negotiation_table()) {
    if (entry.media_type == "*/*")
      continue;
    out += "  ";
    out += entry.media_type;
    out += '\n';
  }
  return out;
}

} // namespace marcskos::negotiate
