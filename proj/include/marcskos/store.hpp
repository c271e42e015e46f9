#pragma once

// On-disk triple store. Layout: a term dictionary (one N-Triples-rendered
// term per line, line number = stable id) plus three binary index files
// holding the same triple set sorted in subject/predicate/object,
// predicate/object/subject, and object/subject/predicate orders, all tied
// together by a small text manifest. Loads are atomic: a new generation of
// files is written and fsynced first, then the manifest is renamed into
// place — a crash in between leaves the previous generation fully intact.
//
// "Sorted" means by term value (IRIs before literals), not by dictionary
// id: ranks are recomputed from the dictionary on open, so dumps stream in
// canonical order straight off the SPO index.

#include <algorithm>
#include <array>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <fcntl.h>
#include <unistd.h>

#include "marcskos/convert.hpp"
#include "marcskos/ntriples.hpp"
#include "marcskos/rdf.hpp"

namespace marcskos::store {

inline constexpr int kFormatVersion = 1;
inline constexpr std::string_view kChecksumAlgorithm = "fnv1a64";

enum class StoreErrorKind { version_mismatch, corrupt, io };

class StoreError : public std::runtime_error {
public:
  StoreError(StoreErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}
  StoreErrorKind kind() const { return kind_; }

private:
  StoreErrorKind kind_;
};

/// Conversion settings the server needs to reconstruct concept URIs from
/// URL paths; persisted in the manifest.
struct StoreOptions {
  std::string base_uri;
  std::string fragment = "concept";
};

namespace detail {

struct Fnv64 {
  std::uint64_t hash = 1469598103934665603ull;
  void update(std::string_view bytes) {
    for (unsigned char c : bytes) {
      hash ^= c;
      hash *= 1099511628211ull;
    }
  }
};

inline std::string hex64(std::uint64_t value) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
  return buf;
}

struct IdTriple {
  std::uint32_t s, p, o;
  bool operator==(const IdTriple& other) const {
    return s == other.s && p == other.p && o == other.o;
  }
};

inline void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i)
    out += static_cast<char>((v >> (8 * i)) & 0xff);
}

inline void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i)
    out += static_cast<char>((v >> (8 * i)) & 0xff);
}

inline std::uint64_t get_u64(const unsigned char* p) {
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i)
    v = (v << 8) | p[i];
  return v;
}

inline std::uint32_t get_u32(const unsigned char* p) {
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i)
    v = (v << 8) | p[i];
  return v;
}

inline void fsync_path(const std::filesystem::path& path) {
  int fd = ::open(path.c_str(), O_RDONLY);
  if (fd >= 0) {
    ::fsync(fd);
    ::close(fd);
  }
}

inline void write_file(const std::filesystem::path& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
    throw StoreError(StoreErrorKind::io, "cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  out.flush();
  if (!out)
    throw StoreError(StoreErrorKind::io, "short write to " + path.string());
  out.close();
  fsync_path(path);
}

inline std::string read_file(const std::filesystem::path& path, StoreErrorKind missing_kind) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw StoreError(missing_kind, "cannot read " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return bytes;
}

inline constexpr std::string_view kIndexMagic = "MSIDX1\n";

inline std::string encode_index(const std::vector<IdTriple>& triples) {
  std::string out(kIndexMagic);
  put_u64(out, triples.size());
  for (const IdTriple& t : triples) {
    put_u32(out, t.s);
    put_u32(out, t.p);
    put_u32(out, t.o);
  }
  return out;
}

inline std::vector<IdTriple> decode_index(const std::string& bytes, const std::string& name) {
  if (bytes.size() < kIndexMagic.size() + 8
      || std::string_view(bytes).substr(0, kIndexMagic.size()) != kIndexMagic)
    throw StoreError(StoreErrorKind::corrupt, name + ": bad index header");
  const unsigned char* p = reinterpret_cast<const unsigned char*>(bytes.data());
  std::uint64_t count = get_u64(p + kIndexMagic.size());
  if (bytes.size() != kIndexMagic.size() + 8 + count * 12)
    throw StoreError(StoreErrorKind::corrupt, name + ": truncated index");
  std::vector<IdTriple> out;
  out.reserve(count);
  const unsigned char* q = p + kIndexMagic.size() + 8;
  for (std::uint64_t i = 0; i < count; ++i, q += 12)
    out.push_back({get_u32(q), get_u32(q + 4), get_u32(q + 8)});
  return out;
}

} // namespace detail

class TripleStore {
  struct State; // in-memory image of one committed generation (defined below)

public:
  /// Initializes a store in `dir` (absent or empty) and commits generation 1.
  static TripleStore create(const std::filesystem::path& dir, StoreOptions options = {}) {
    std::error_code ec;
    if (std::filesystem::exists(dir, ec)) {
      if (!std::filesystem::is_directory(dir, ec))
        throw StoreError(StoreErrorKind::io, dir.string() + " exists and is not a directory");
      if (!std::filesystem::is_empty(dir, ec))
        throw StoreError(StoreErrorKind::io, dir.string() + " is not empty");
    } else if (!std::filesystem::create_directories(dir, ec)) {
      throw StoreError(StoreErrorKind::io, "cannot create " + dir.string() + ": " + ec.message());
    }
    TripleStore store;
    store.dir_ = dir;
    store.state_ = std::make_shared<State>(); // generation 0, empty
    store.state_->options = options;
    State initial;
    initial.options = std::move(options);
    initial.generation = 1;
    initial.checksum = initial.content_checksum();
    Staged staged = store.stage_state(std::move(initial));
    staged.commit();
    return store;
  }

  /// Opens an existing store, verifying version and checksum.
  static TripleStore open(const std::filesystem::path& dir) {
    TripleStore store;
    store.dir_ = dir;
    store.state_ = load_state(dir);
    return store;
  }

  std::size_t size() const { return state_->spo.size(); }
  std::uint64_t generation() const { return state_->generation; }
  const StoreOptions& options() const { return state_->options; }
  std::string checksum_hex() const { return detail::hex64(state_->checksum); }

  /// A staged (written but uncommitted) load. Destroying without commit()
  /// leaves the store exactly as before — the crash-safety seam.
  class Staged {
  public:
    std::size_t new_triples() const { return new_triples_; }

    void commit() {
      if (committed_)
        return;
      std::filesystem::path tmp = dir_ / "manifest.tmp";
      detail::write_file(tmp, manifest_);
      std::error_code ec;
      std::filesystem::rename(tmp, dir_ / "manifest", ec);
      if (ec)
        throw StoreError(StoreErrorKind::io, "manifest commit failed: " + ec.message());
      detail::fsync_path(dir_);
      committed_ = true;
      if (owner_)
        owner_->state_ = state_;
      // Previous-generation files are now garbage; best-effort cleanup.
      for (const std::string& name : stale_files_)
        std::filesystem::remove(dir_ / name, ec);
    }

  private:
    friend class TripleStore;
    TripleStore* owner_ = nullptr;
    std::filesystem::path dir_;
    std::string manifest_;
    std::shared_ptr<State> state_;
    std::vector<std::string> stale_files_;
    std::size_t new_triples_ = 0;
    bool committed_ = false;
  };

  /// Writes the next generation's files for the current content plus
  /// `triples`, without committing. Set semantics; duplicate triples in the
  /// input or already present are not counted.
  Staged stage_insert(const std::vector<rdf::Triple>& triples) {
    State next;
    next.options = state_->options;
    next.generation = state_->generation + 1;
    next.terms = state_->terms;
    next.term_ids = state_->term_ids;

    auto intern = [&next](const rdf::Term& term) -> std::uint32_t {
      std::string rendered = ntriples::render_term(term);
      auto it = next.term_ids.find(rendered);
      if (it != next.term_ids.end())
        return it->second;
      std::uint32_t id = static_cast<std::uint32_t>(next.terms.size());
      next.terms.push_back(term);
      next.term_ids.emplace(std::move(rendered), id);
      return id;
    };

    std::vector<detail::IdTriple> merged = state_->spo;
    for (const rdf::Triple& triple : triples) {
      detail::IdTriple id{intern(rdf::Term(triple.subject)), intern(rdf::Term(triple.predicate)),
                          intern(triple.object)};
      merged.push_back(id);
    }
    next.compute_ranks();
    next.sort_as_spo(merged);
    merged.erase(std::unique(merged.begin(), merged.end()), merged.end());
    std::size_t inserted = merged.size() - state_->spo.size();
    next.spo = std::move(merged);
    next.pos = next.spo;
    next.sort_as_pos(next.pos);
    next.osp = next.spo;
    next.sort_as_osp(next.osp);
    next.checksum = next.content_checksum();
    next.build_label_index();

    Staged staged = stage_state(std::move(next));
    staged.new_triples_ = inserted;
    return staged;
  }

  /// Stage + commit in one step. Returns the number of new triples.
  std::size_t bulk_insert(const std::vector<rdf::Triple>& triples) {
    Staged staged = stage_insert(triples);
    staged.commit();
    return staged.new_triples();
  }

  /// Lazily yields triples matching the pattern, in the order of the index
  /// chosen for the pattern (subject-bound → SPO, predicate-bound → POS,
  /// object-bound → OSP, nothing bound → full SPO scan).
  class Cursor {
  public:
    bool next(rdf::Triple& out) {
      while (pos_ < end_) {
        const detail::IdTriple& t = (*index_)[pos_++];
        if (filter_p_ && t.p != *filter_p_)
          continue;
        if (filter_o_ && t.o != *filter_o_)
          continue;
        out = rdf::Triple{std::get<rdf::Iri>(state_->terms[t.s]),
                          std::get<rdf::Iri>(state_->terms[t.p]), state_->terms[t.o]};
        return true;
      }
      return false;
    }

  private:
    friend class TripleStore;
    std::shared_ptr<const State> state_;
    const std::vector<detail::IdTriple>* index_ = nullptr;
    std::size_t pos_ = 0, end_ = 0;
    std::optional<std::uint32_t> filter_p_, filter_o_;
  };

  Cursor match(const std::optional<rdf::Iri>& s, const std::optional<rdf::Iri>& p,
               const std::optional<rdf::Term>& o) const {
    Cursor cursor;
    cursor.state_ = state_;
    cursor.index_ = &state_->spo;

    std::optional<std::uint32_t> sid, pid, oid;
    if (s) {
      sid = state_->find(rdf::Term(*s));
      if (!sid)
        return cursor; // empty: pos_ == end_ == 0
    }
    if (p) {
      pid = state_->find(rdf::Term(*p));
      if (!pid)
        return cursor;
    }
    if (o) {
      oid = state_->find(*o);
      if (!oid)
        return cursor;
    }

    const State& st = *state_;
    if (sid) {
      auto [lo, hi] = st.range_spo(*sid, pid, oid);
      cursor.index_ = &st.spo;
      cursor.pos_ = lo;
      cursor.end_ = hi;
      if (!pid && oid)
        cursor.filter_o_ = oid; // (s,*,o): prefix on s, filter o
    } else if (pid) {
      auto [lo, hi] = st.range_pos(*pid, oid);
      cursor.index_ = &st.pos;
      cursor.pos_ = lo;
      cursor.end_ = hi;
    } else if (oid) {
      auto [lo, hi] = st.range_osp(*oid);
      cursor.index_ = &st.osp;
      cursor.pos_ = lo;
      cursor.end_ = hi;
    } else {
      cursor.pos_ = 0;
      cursor.end_ = st.spo.size();
    }
    return cursor;
  }

  std::vector<rdf::Triple> match_all(const std::optional<rdf::Iri>& s,
                                     const std::optional<rdf::Iri>& p,
                                     const std::optional<rdf::Term>& o) const {
    std::vector<rdf::Triple> out;
    Cursor cursor = match(s, p, o);
    rdf::Triple triple;
    while (cursor.next(triple))
      out.push_back(triple);
    return out;
  }

  /// Concept URIs whose preferred label matches label_key(label) exactly.
  std::vector<rdf::Iri> lookup_by_pref_label(std::string_view label) const {
    return state_->labels.lookup(label);
  }

  const convert::LabelIndex& label_index() const { return state_->labels; }

  /// Streams every triple as sorted N-Triples; returns the line count.
  std::size_t dump(std::ostream& out) const {
    std::size_t count = 0;
    for (const detail::IdTriple& t : state_->spo) {
      out << state_->render(t) << '\n';
      ++count;
    }
    return count;
  }

  /// Distinct predicates with their triple counts (for stats reporting).
  std::map<std::string, std::size_t> predicate_counts() const {
    std::map<std::string, std::size_t> counts;
    for (const detail::IdTriple& t : state_->pos)
      ++counts[std::get<rdf::Iri>(state_->terms[t.p]).value];
    return counts;
  }

private:
  struct State {
    StoreOptions options;
    std::uint64_t generation = 0;
    std::vector<rdf::Term> terms; // id → term
    std::unordered_map<std::string, std::uint32_t> term_ids; // rendered → id
    std::vector<std::uint32_t> rank; // id → position in term_less order
    std::vector<detail::IdTriple> spo, pos, osp;
    std::uint64_t checksum = 0;
    convert::LabelIndex labels;

    std::optional<std::uint32_t> find(const rdf::Term& term) const {
      auto it = term_ids.find(ntriples::render_term(term));
      if (it == term_ids.end())
        return std::nullopt;
      return it->second;
    }

    std::string render(const detail::IdTriple& t) const {
      return ntriples::render_iri(std::get<rdf::Iri>(terms[t.s])) + " "
             + ntriples::render_iri(std::get<rdf::Iri>(terms[t.p])) + " "
             + ntriples::render_term(terms[t.o]) + " .";
    }

    void compute_ranks() {
      std::vector<std::uint32_t> order(terms.size());
      for (std::uint32_t i = 0; i < order.size(); ++i)
        order[i] = i;
      std::sort(order.begin(), order.end(), [this](std::uint32_t a, std::uint32_t b) {
        return rdf::term_less(terms[a], terms[b]);
      });
      rank.assign(terms.size(), 0);
      for (std::uint32_t r = 0; r < order.size(); ++r)
        rank[order[r]] = r;
    }

    void sort_as_spo(std::vector<detail::IdTriple>& v) const {
      std::sort(v.begin(), v.end(), [this](const detail::IdTriple& a, const detail::IdTriple& b) {
        return key_spo(a) < key_spo(b);
      });
    }
    void sort_as_pos(std::vector<detail::IdTriple>& v) const {
      std::sort(v.begin(), v.end(), [this](const detail::IdTriple& a, const detail::IdTriple& b) {
        return key_pos(a) < key_pos(b);
      });
    }
    void sort_as_osp(std::vector<detail::IdTriple>& v) const {
      std::sort(v.begin(), v.end(), [this](const detail::IdTriple& a, const detail::IdTriple& b) {
        return key_osp(a) < key_osp(b);
      });
    }

    std::array<std::uint32_t, 3> key_spo(const detail::IdTriple& t) const {
      return {rank[t.s], rank[t.p], rank[t.o]};
    }
    std::array<std::uint32_t, 3> key_pos(const detail::IdTriple& t) const {
      return {rank[t.p], rank[t.o], rank[t.s]};
    }
    std::array<std::uint32_t, 3> key_osp(const detail::IdTriple& t) const {
      return {rank[t.o], rank[t.s], rank[t.p]};
    }

    // equal_range over an index for a 1- or 2-term rank prefix
    std::pair<std::size_t, std::size_t> range_spo(std::uint32_t sid,
                                                  std::optional<std::uint32_t> pid,
                                                  std::optional<std::uint32_t> oid) const {
      return prefix_range(spo, {rank[sid], pid ? std::optional(rank[*pid]) : std::nullopt,
                                pid && oid ? std::optional(rank[*oid]) : std::nullopt},
                          [this](const detail::IdTriple& t) { return key_spo(t); });
    }
    std::pair<std::size_t, std::size_t> range_pos(std::uint32_t pid,
                                                  std::optional<std::uint32_t> oid) const {
      return prefix_range(pos, {rank[pid], oid ? std::optional(rank[*oid]) : std::nullopt,
                                std::nullopt},
                          [this](const detail::IdTriple& t) { return key_pos(t); });
    }
    std::pair<std::size_t, std::size_t> range_osp(std::uint32_t oid) const {
      return prefix_range(osp, {rank[oid], std::nullopt, std::nullopt},
                          [this](const detail::IdTriple& t) { return key_osp(t); });
    }

    template <typename KeyFn>
    static std::pair<std::size_t, std::size_t>
    prefix_range(const std::vector<detail::IdTriple>& index,
                 std::array<std::optional<std::uint32_t>, 3> prefix, KeyFn key_of) {
      auto cmp_lower = [&](const detail::IdTriple& t) {
        std::array<std::uint32_t, 3> k = key_of(t);
        for (int i = 0; i < 3; ++i) {
          if (!prefix[i])
            return false; // equal on all bound positions → not less
          if (k[i] != *prefix[i])
            return k[i] < *prefix[i];
        }
        return false;
      };
      auto cmp_upper = [&](const detail::IdTriple& t) {
        std::array<std::uint32_t, 3> k = key_of(t);
        for (int i = 0; i < 3; ++i) {
          if (!prefix[i])
            return false;
          if (k[i] != *prefix[i])
            return k[i] > *prefix[i];
        }
        return false; // equal → belongs to the range
      };
      std::size_t lo =
          std::partition_point(index.begin(), index.end(), cmp_lower) - index.begin();
      std::size_t hi = index.size()
                       - (std::partition_point(index.rbegin(), index.rend(), cmp_upper)
                          - index.rbegin());
      return {lo, hi};
    }

    std::uint64_t content_checksum() const {
      detail::Fnv64 hasher;
      for (const detail::IdTriple& t : spo) {
        hasher.update(render(t));
        hasher.update("\n");
      }
      return hasher.hash;
    }

    void build_label_index() {
      labels = convert::LabelIndex();
      const std::optional<std::uint32_t> pid = find(rdf::Term(rdf::vocab::pref_label()));
      if (!pid)
        return;
      auto [lo, hi] = range_pos(*pid, std::nullopt);
      for (std::size_t i = lo; i < hi; ++i) {
        const detail::IdTriple& t = pos[i];
        if (!rdf::is_literal(terms[t.o]))
          continue;
        labels.add(convert::label_key(std::get<rdf::Literal>(terms[t.o]).lexical),
                   std::get<rdf::Iri>(terms[t.s]));
      }
    }
  };

  std::filesystem::path dir_;
  std::shared_ptr<State> state_;

  static std::string file_name(std::string_view kind, std::uint64_t generation) {
    return std::string(kind) + "." + std::to_string(generation);
  }

  Staged stage_state(State next) {
    std::uint64_t gen = next.generation;
    auto state = std::make_shared<State>(std::move(next));

    std::string terms_bytes;
    for (const rdf::Term& term : state->terms) {
      terms_bytes += ntriples::render_term(term);
      terms_bytes += '\n';
    }
    detail::write_file(dir_ / file_name("terms", gen), terms_bytes);
    detail::write_file(dir_ / file_name("spo", gen), detail::encode_index(state->spo));
    detail::write_file(dir_ / file_name("pos", gen), detail::encode_index(state->pos));
    detail::write_file(dir_ / file_name("osp", gen), detail::encode_index(state->osp));

    std::string manifest;
    manifest += "version=" + std::to_string(kFormatVersion) + "\n";
    manifest += "triples=" + std::to_string(state->spo.size()) + "\n";
    manifest += "checksum=" + std::string(kChecksumAlgorithm) + ":"
                + detail::hex64(state->checksum) + "\n";
    manifest += "generation=" + std::to_string(gen) + "\n";
    manifest += "terms=" + std::to_string(state->terms.size()) + "\n";
    manifest += "base_uri=" + state->options.base_uri + "\n";
    manifest += "fragment=" + state->options.fragment + "\n";

    Staged staged;
    staged.owner_ = this;
    staged.dir_ = dir_;
    staged.manifest_ = std::move(manifest);
    staged.state_ = state;
    if (state_->generation > 0) {
      for (std::string_view kind : {"terms", "spo", "pos", "osp"})
        staged.stale_files_.push_back(file_name(kind, state_->generation));
    }
    return staged;
  }

  static std::shared_ptr<State> load_state(const std::filesystem::path& dir) {
    std::string manifest = detail::read_file(dir / "manifest", StoreErrorKind::corrupt);
    std::map<std::string, std::string> fields;
    std::size_t start = 0;
    while (start < manifest.size()) {
      std::size_t end = manifest.find('\n', start);
      if (end == std::string::npos)
        end = manifest.size();
      std::string line = manifest.substr(start, end - start);
      start = end + 1;
      std::size_t eq = line.find('=');
      if (eq != std::string::npos)
        fields[line.substr(0, eq)] = line.substr(eq + 1);
    }

    auto field = [&fields](const std::string& key) -> const std::string& {
      auto it = fields.find(key);
      if (it == fields.end())
        throw StoreError(StoreErrorKind::corrupt, "manifest missing '" + key + "'");
      return it->second;
    };
    auto numeric_field = [&field](const std::string& key) -> std::uint64_t {
      const std::string& value = field(key);
      try {
        std::size_t consumed = 0;
        std::uint64_t parsed = std::stoull(value, &consumed);
        if (consumed != value.size())
          throw std::invalid_argument(value);
        return parsed;
      } catch (const std::exception&) {
        throw StoreError(StoreErrorKind::corrupt, "manifest field '" + key + "' is not a number");
      }
    };

    if (field("version") != std::to_string(kFormatVersion))
      throw StoreError(StoreErrorKind::version_mismatch,
                       "store format version " + field("version") + ", expected "
                           + std::to_string(kFormatVersion));
    std::string checksum_field = field("checksum");
    std::string expected_prefix = std::string(kChecksumAlgorithm) + ":";
    if (checksum_field.size() != expected_prefix.size() + 16
        || checksum_field.compare(0, expected_prefix.size(), expected_prefix) != 0)
      throw StoreError(StoreErrorKind::corrupt, "unrecognized checksum field");

    auto state = std::make_shared<State>();
    state->generation = numeric_field("generation");
    state->options.base_uri = fields.count("base_uri") ? fields["base_uri"] : "";
    state->options.fragment = fields.count("fragment") ? fields["fragment"] : "concept";

    std::uint64_t term_count = numeric_field("terms");
    std::uint64_t triple_count = numeric_field("triples");

    std::string terms_bytes =
        detail::read_file(dir / file_name("terms", state->generation), StoreErrorKind::corrupt);
    std::size_t pos_in = 0;
    while (pos_in < terms_bytes.size()) {
      std::size_t end = terms_bytes.find('\n', pos_in);
      if (end == std::string::npos)
        throw StoreError(StoreErrorKind::corrupt, "term dictionary missing final newline");
      std::string_view line(terms_bytes.data() + pos_in, end - pos_in);
      std::optional<rdf::Term> term = ntriples::parse_term(line);
      if (!term)
        throw StoreError(StoreErrorKind::corrupt,
                         "term dictionary entry " + std::to_string(state->terms.size())
                             + " unparseable");
      state->term_ids.emplace(std::string(line), static_cast<std::uint32_t>(state->terms.size()));
      state->terms.push_back(std::move(*term));
      pos_in = end + 1;
    }
    if (state->terms.size() != term_count)
      throw StoreError(StoreErrorKind::corrupt, "term dictionary count mismatch");

    state->spo = detail::decode_index(
        detail::read_file(dir / file_name("spo", state->generation), StoreErrorKind::corrupt),
        "spo");
    state->pos = detail::decode_index(
        detail::read_file(dir / file_name("pos", state->generation), StoreErrorKind::corrupt),
        "pos");
    state->osp = detail::decode_index(
        detail::read_file(dir / file_name("osp", state->generation), StoreErrorKind::corrupt),
        "osp");
    if (state->spo.size() != triple_count || state->pos.size() != triple_count
        || state->osp.size() != triple_count)
      throw StoreError(StoreErrorKind::corrupt, "index triple count mismatch");

    for (const auto* index : {&state->spo, &state->pos, &state->osp}) {
      for (const detail::IdTriple& t : *index) {
        if (t.s >= state->terms.size() || t.p >= state->terms.size()
            || t.o >= state->terms.size())
          throw StoreError(StoreErrorKind::corrupt, "triple id out of dictionary range");
        if (!rdf::is_iri(state->terms[t.s]) || !rdf::is_iri(state->terms[t.p]))
          throw StoreError(StoreErrorKind::corrupt, "non-IRI in subject/predicate position");
      }
    }

    state->compute_ranks();
    auto sorted_by = [&state](const std::vector<detail::IdTriple>& v, auto key_of) {
      for (std::size_t i = 1; i < v.size(); ++i) {
        if (key_of(v[i]) < key_of(v[i - 1]))
          return false;
      }
      return true;
    };
    if (!sorted_by(state->spo, [&](const detail::IdTriple& t) { return state->key_spo(t); })
        || !sorted_by(state->pos, [&](const detail::IdTriple& t) { return state->key_pos(t); })
        || !sorted_by(state->osp, [&](const detail::IdTriple& t) { return state->key_osp(t); }))
      throw StoreError(StoreErrorKind::corrupt, "index out of order");

    state->checksum = state->content_checksum();
    if (detail::hex64(state->checksum) != checksum_field.substr(expected_prefix.size()))
      throw StoreError(StoreErrorKind::corrupt, "content checksum mismatch");

    state->build_label_index();
    return state;
  }
};

} // namespace marcskos::store
