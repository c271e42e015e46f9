#pragma once

// Library of Congress Control Number normalization and concept-URI minting.
// Raw control numbers arrive with embedded spaces ("sh 85148236") and
// sometimes a "/..." revision suffix; the normalized form is the stable key
// that concept URIs are built from.

#include <optional>
#include <string>
#include <string_view>

#include "marcskos/rdf.hpp"

namespace marcskos::lccn {

/// Normalized control number: `[a-z]{0,3}[0-9]{8,10}`.
struct Lccn {
  std::string value;

  bool operator==(const Lccn& other) const { return value == other.value; }
  bool operator<(const Lccn& other) const { return value < other.value; }
};

inline bool is_normalized(std::string_view v) {
  std::size_t i = 0;
  while (i < v.size() && v[i] >= 'a' && v[i] <= 'z')
    ++i;
  if (i > 3)
    return false;
  std::size_t digits = 0;
  while (i < v.size() && v[i] >= '0' && v[i] <= '9') {
    ++i;
    ++digits;
  }
  return i == v.size() && digits >= 8 && digits <= 10;
}

/// Strips all whitespace, lowercases the alphabetic prefix, and truncates
/// any `/...` revision suffix. Returns std::nullopt when the residue does
/// not satisfy the Lccn pattern.
inline std::optional<Lccn> normalize(std::string_view raw) {
  std::string out;
  out.reserve(raw.size());
  for (char c : raw) {
    if (c == '/')
      break;
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r')
      continue;
    if (c >= 'A' && c <= 'Z')
      c = static_cast<char>(c - 'A' + 'a');
    out += c;
  }
  if (!is_normalized(out))
    return std::nullopt;
  return Lccn{std::move(out)};
}

/// `{base_uri}{lccn}#{fragment}` — e.g. http://lcsh.info/sh85148236#concept
inline rdf::Iri mint_concept_uri(const Lccn& lccn, std::string_view base_uri,
                                 std::string_view fragment) {
  std::string uri;
  uri.reserve(base_uri.size() + lccn.value.size() + 1 + fragment.size());
  uri += base_uri;
  uri += lccn.value;
  uri += '#';
  uri += fragment;
  return rdf::Iri(std::move(uri));
}

} // namespace marcskos::lccn
