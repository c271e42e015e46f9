// Disk triple store: pattern matching checked against the in-memory graph
// as oracle, generation/commit semantics, the crash-safety seam, label
// lookups, and corruption detection over deliberately damaged files.
#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "marcskos/convert.hpp"
#include "marcskos/ntriples.hpp"
#include "marcskos/rdf.hpp"
#include "marcskos/store.hpp"
#include "support/generators.hpp"
#include "support/test_util.hpp"

using namespace marcskos;
namespace fs = std::filesystem;

namespace {

std::set<std::string> rendered(const std::vector<rdf::Triple>& triples) {
  std::set<std::string> out;
  for (const rdf::Triple& t : triples)
    out.insert(ntriples::render_triple(t));
  return out;
}

store::TripleStore corpus_store(const fs::path& dir) {
  store::StoreOptions options;
  options.base_uri = "http://lcsh.info/";
  auto st = store::TripleStore::create(dir, options);
  st.bulk_insert(testutil::corpus_result().graph.sorted_triples());
  return st;
}

std::string read_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_bytes(const fs::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  REQUIRE(out.good());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

store::StoreErrorKind open_failure(const fs::path& dir) {
  try {
    store::TripleStore::open(dir);
  } catch (const store::StoreError& e) {
    return e.kind();
  }
  FAIL("expected opening " << dir << " to fail");
  return store::StoreErrorKind::io; // unreachable
}

} // namespace

TEST_CASE("create initializes an empty committed generation") {
  testutil::TempDir tmp("store-create");
  store::StoreOptions options;
  options.base_uri = "http://x.test/";
  options.fragment = "about";

  auto st = store::TripleStore::create(tmp.sub("s"), options);
  CHECK(st.size() == 0);
  CHECK(st.generation() == 1);
  CHECK(st.options().base_uri == "http://x.test/");
  CHECK(st.options().fragment == "about");

  auto reopened = store::TripleStore::open(tmp.sub("s"));
  CHECK(reopened.size() == 0);
  CHECK(reopened.generation() == 1);
  CHECK(reopened.options().base_uri == "http://x.test/");
  CHECK(reopened.options().fragment == "about");
  CHECK(reopened.checksum_hex() == st.checksum_hex());
}

TEST_CASE("create refuses a non-empty directory but accepts an empty one") {
  testutil::TempDir tmp("store-nonempty");
  fs::create_directories(tmp.sub("busy"));
  write_bytes(tmp.sub("busy") / "file.txt", "occupied");
  CHECK_THROWS_AS(store::TripleStore::create(tmp.sub("busy")), store::StoreError);

  fs::create_directories(tmp.sub("vacant"));
  CHECK_NOTHROW(store::TripleStore::create(tmp.sub("vacant")));

  write_bytes(tmp.sub("afile"), "not a directory");
  CHECK_THROWS_AS(store::TripleStore::create(tmp.sub("afile")), store::StoreError);
}

TEST_CASE("every match pattern agrees with the in-memory graph") {
  testutil::TempDir tmp("store-match");
  auto records = gen::random_records(31, 200);
  convert::ConversionConfig config;
  config.base_uri = "http://x.test/";
  auto result = convert::convert_records(records, config);
  rdf::Graph graph = result.graph;
  for (const rdf::Triple& t : testutil::corpus_result().graph.sorted_triples())
    graph.insert(t);

  auto st = store::TripleStore::create(tmp.sub("s"));
  st.bulk_insert(graph.sorted_triples());
  REQUIRE(st.size() == graph.size());

  // Sample terms actually present plus terms that are absent.
  std::vector<std::optional<rdf::Iri>> subjects = {std::nullopt};
  for (const rdf::Iri& s : graph.subjects()) {
    if (subjects.size() >= 6)
      break;
    subjects.emplace_back(s);
  }
  subjects.emplace_back(rdf::Iri("http://x.test/absent#concept"));

  std::vector<std::optional<rdf::Iri>> predicates = {
      std::nullopt, rdf::vocab::pref_label(), rdf::vocab::broader(),
      rdf::vocab::rdf_type(), rdf::Iri("http://x.test/nopredicate")};

  std::vector<std::optional<rdf::Term>> objects = {
      std::nullopt, rdf::Term(rdf::vocab::concept_class()),
      rdf::Literal::plain("Topic 7"), rdf::Literal::plain("never a label"),
      rdf::Term(rdf::Iri("http://x.test/absent#concept"))};
  for (const rdf::Triple& t : graph.sorted_triples()) {
    if (rdf::is_iri(t.object)) { // one real object IRI from the data
      objects.emplace_back(t.object);
      break;
    }
  }

  std::size_t combinations = 0;
  for (const auto& s : subjects) {
    for (const auto& p : predicates) {
      for (const auto& o : objects) {
        CHECK(rendered(st.match_all(s, p, o)) == rendered(graph.match(s, p, o)));
        ++combinations;
      }
    }
  }
  CHECK(combinations == subjects.size() * predicates.size() * objects.size());

  // The unfiltered cursor streams in exactly dump order.
  std::ostringstream dumped;
  st.dump(dumped);
  std::string streamed;
  for (const rdf::Triple& t : st.match_all(std::nullopt, std::nullopt, std::nullopt))
    streamed += ntriples::render_triple(t) + "\n";
  CHECK(streamed == dumped.str());
}

TEST_CASE("a drained cursor stays exhausted") {
  testutil::TempDir tmp("store-cursor");
  auto st = corpus_store(tmp.sub("s"));
  auto cursor = st.match(std::nullopt, rdf::vocab::pref_label(), std::nullopt);
  rdf::Triple t;
  std::size_t n = 0;
  while (cursor.next(t))
    ++n;
  CHECK(n == 11);
  CHECK_FALSE(cursor.next(t));
  CHECK_FALSE(cursor.next(t));
}

TEST_CASE("the dump replays the conversion output byte for byte") {
  testutil::TempDir tmp("store-dump");
  auto st = corpus_store(tmp.sub("s"));
  std::ostringstream out;
  std::size_t lines = st.dump(out);
  CHECK(lines == 83);
  CHECK(out.str() == ntriples::serialize_graph(testutil::corpus_result().graph));
  CHECK(out.str() == testutil::slurp(testutil::fixture("golden.nt")));
}

TEST_CASE("incremental inserts merge as a set and advance the generation") {
  testutil::TempDir tmp("store-incr");
  auto st = store::TripleStore::create(tmp.sub("s"));
  const rdf::Iri s1("http://x.test/a#concept");
  const rdf::Iri s2("http://x.test/b#concept");
  const rdf::Triple t1{s1, rdf::vocab::pref_label(), rdf::Literal::plain("A")};
  const rdf::Triple t2{s2, rdf::vocab::pref_label(), rdf::Literal::plain("B")};
  const rdf::Triple t3{s1, rdf::vocab::related(), rdf::Term(s2)};

  CHECK(st.bulk_insert({t1, t2}) == 2);
  CHECK(st.generation() == 2);
  std::string checksum_before = st.checksum_hex();

  // Re-inserting existing triples plus one new one counts only the new one.
  CHECK(st.bulk_insert({t1, t2, t3, t3}) == 1);
  CHECK(st.generation() == 3);
  CHECK(st.size() == 3);
  CHECK(st.checksum_hex() != checksum_before);

  // Stale generation-2 files were cleaned up; generation-3 files exist.
  CHECK_FALSE(fs::exists(tmp.sub("s") / "terms.2"));
  CHECK(fs::exists(tmp.sub("s") / "terms.3"));
  CHECK(fs::exists(tmp.sub("s") / "spo.3"));
  CHECK(fs::exists(tmp.sub("s") / "pos.3"));
  CHECK(fs::exists(tmp.sub("s") / "osp.3"));

  auto reopened = store::TripleStore::open(tmp.sub("s"));
  CHECK(reopened.size() == 3);
  CHECK(reopened.generation() == 3);
  CHECK(reopened.checksum_hex() == st.checksum_hex());
  CHECK(rendered(reopened.match_all(std::nullopt, std::nullopt, std::nullopt))
        == rendered({t1, t2, t3}));
}

TEST_CASE("an abandoned staged load leaves the store untouched") {
  testutil::TempDir tmp("store-crash");
  auto st = corpus_store(tmp.sub("s"));
  const std::string checksum = st.checksum_hex();
  REQUIRE(st.generation() == 2);

  {
    auto staged = st.stage_insert({{rdf::Iri("http://x.test/new#concept"),
                                    rdf::vocab::pref_label(),
                                    rdf::Literal::plain("Never committed")}});
    CHECK(staged.new_triples() == 1);
    // Simulated crash: the staged generation is written but never committed.
    CHECK(fs::exists(tmp.sub("s") / "terms.3"));
  }

  // The in-memory handle still serves the old generation…
  CHECK(st.generation() == 2);
  CHECK(st.size() == 83);
  CHECK(st.checksum_hex() == checksum);

  // …and a fresh open sees only the committed generation.
  auto reopened = store::TripleStore::open(tmp.sub("s"));
  CHECK(reopened.generation() == 2);
  CHECK(reopened.size() == 83);
  CHECK(reopened.checksum_hex() == checksum);
  CHECK(reopened.lookup_by_pref_label("Never committed").empty());

  // Committing a later stage replaces the leftovers.
  st.bulk_insert({{rdf::Iri("http://x.test/new2#concept"), rdf::vocab::pref_label(),
                   rdf::Literal::plain("Committed")}});
  CHECK(st.generation() == 3);
  CHECK(store::TripleStore::open(tmp.sub("s")).size() == 84);
}

TEST_CASE("label lookup canonicalizes the query") {
  testutil::TempDir tmp("store-label");
  auto st = corpus_store(tmp.sub("s"));

  auto exact = st.lookup_by_pref_label("World Wide Web");
  REQUIRE(exact.size() == 1);
  CHECK(exact[0].value == "http://lcsh.info/sh85148236#concept");

  CHECK(st.lookup_by_pref_label("  World   Wide Web. ") == exact);
  CHECK(st.lookup_by_pref_label("world wide web").empty()); // case matters
  CHECK(st.lookup_by_pref_label("No such heading").empty());

  // Alternative labels are not in the lookup index.
  CHECK(st.lookup_by_pref_label("W3").empty());

  // Subdivided headings are looked up by their flattened label.
  CHECK(st.lookup_by_pref_label("Drama--17th century").size() == 1);
}

TEST_CASE("label lookup returns every concept sharing a label") {
  testutil::TempDir tmp("store-multilabel");
  auto st = store::TripleStore::create(tmp.sub("s"));
  auto records = gen::random_records(5, 100); // >80 records → shared labels
  convert::ConversionConfig config;
  config.base_uri = "http://x.test/";
  st.bulk_insert(convert::convert_records(records, config).graph.sorted_triples());

  CHECK(st.lookup_by_pref_label("Topic 0").size() == 2);
  CHECK(st.lookup_by_pref_label("Topic 40").size() == 2);
  CHECK(st.lookup_by_pref_label("Topic 2").size() == 1);
}

TEST_CASE("reopening yields an identical store") {
  testutil::TempDir tmp("store-reopen");
  auto st = corpus_store(tmp.sub("s"));
  auto reopened = store::TripleStore::open(tmp.sub("s"));
  CHECK(reopened.size() == st.size());
  CHECK(reopened.generation() == st.generation());
  CHECK(reopened.checksum_hex() == st.checksum_hex());
  CHECK(reopened.options().base_uri == "http://lcsh.info/");
  CHECK(reopened.options().fragment == "concept");

  std::ostringstream a, b;
  st.dump(a);
  reopened.dump(b);
  CHECK(a.str() == b.str());
  CHECK(reopened.predicate_counts() == st.predicate_counts());
}

TEST_CASE("predicate counts match the graph") {
  testutil::TempDir tmp("store-counts");
  auto st = corpus_store(tmp.sub("s"));
  auto counts = st.predicate_counts();
  std::map<std::string, std::size_t> expected;
  for (const rdf::Triple& t : testutil::corpus_result().graph.sorted_triples())
    ++expected[t.predicate.value];
  CHECK(counts == expected);
  CHECK(counts.at("http://www.w3.org/2004/02/skos/core#prefLabel") == 11);
}

TEST_CASE("damaged store files are refused with the right diagnosis") {
  testutil::TempDir tmp("store-damage");

  auto fresh = [&tmp](const std::string& name) {
    fs::path dir = tmp.sub(name);
    corpus_store(dir);
    return dir;
  };

  SECTION("a missing manifest is corruption") {
    fs::path dir = fresh("m1");
    fs::remove(dir / "manifest");
    CHECK(open_failure(dir) == store::StoreErrorKind::corrupt);
  }
  SECTION("a future format version is a version mismatch") {
    fs::path dir = fresh("m2");
    std::string manifest = read_bytes(dir / "manifest");
    write_bytes(dir / "manifest",
                "version=2\n" + manifest.substr(manifest.find('\n') + 1));
    CHECK(open_failure(dir) == store::StoreErrorKind::version_mismatch);
  }
  SECTION("a non-numeric count is corruption") {
    fs::path dir = fresh("m3");
    std::string manifest = read_bytes(dir / "manifest");
    std::size_t at = manifest.find("triples=");
    REQUIRE(at != std::string::npos);
    manifest.replace(at, std::string("triples=83").size(), "triples=js");
    write_bytes(dir / "manifest", manifest);
    CHECK(open_failure(dir) == store::StoreErrorKind::corrupt);
  }
  SECTION("a missing manifest field is corruption") {
    fs::path dir = fresh("m4");
    std::string manifest = read_bytes(dir / "manifest");
    std::size_t at = manifest.find("generation=");
    REQUIRE(at != std::string::npos);
    std::size_t end = manifest.find('\n', at);
    manifest.erase(at, end - at + 1);
    write_bytes(dir / "manifest", manifest);
    CHECK(open_failure(dir) == store::StoreErrorKind::corrupt);
  }
  SECTION("an unknown checksum algorithm is corruption") {
    fs::path dir = fresh("m5");
    std::string manifest = read_bytes(dir / "manifest");
    std::size_t at = manifest.find("fnv1a64:");
    REQUIRE(at != std::string::npos);
    manifest.replace(at, 8, "crc32xx:");
    write_bytes(dir / "manifest", manifest);
    CHECK(open_failure(dir) == store::StoreErrorKind::corrupt);
  }
  SECTION("a wrong checksum value is corruption") {
    fs::path dir = fresh("m6");
    std::string manifest = read_bytes(dir / "manifest");
    std::size_t at = manifest.find("fnv1a64:");
    REQUIRE(at != std::string::npos);
    char& digit = manifest[at + 8];
    digit = (digit == '0') ? '1' : '0';
    write_bytes(dir / "manifest", manifest);
    CHECK(open_failure(dir) == store::StoreErrorKind::corrupt);
  }
  SECTION("a flipped byte in the term dictionary is caught") {
    fs::path dir = fresh("t1");
    std::string terms = read_bytes(dir / "terms.2");
    std::size_t at = terms.find("World Wide Web");
    REQUIRE(at != std::string::npos);
    terms[at] = 'X';
    write_bytes(dir / "terms.2", terms);
    CHECK(open_failure(dir) == store::StoreErrorKind::corrupt);
  }
  SECTION("an unparseable dictionary entry is caught") {
    fs::path dir = fresh("t2");
    std::string terms = read_bytes(dir / "terms.2");
    write_bytes(dir / "terms.2", "not a term\n" + terms);
    CHECK(open_failure(dir) == store::StoreErrorKind::corrupt);
  }
  SECTION("a dictionary without its final newline is caught") {
    fs::path dir = fresh("t3");
    std::string terms = read_bytes(dir / "terms.2");
    REQUIRE(!terms.empty());
    terms.pop_back();
    write_bytes(dir / "terms.2", terms);
    CHECK(open_failure(dir) == store::StoreErrorKind::corrupt);
  }
  SECTION("an extra dictionary entry breaks the declared count") {
    fs::path dir = fresh("t4");
    std::string terms = read_bytes(dir / "terms.2");
    terms += "<http://x.test/extra>\n";
    write_bytes(dir / "terms.2", terms);
    CHECK(open_failure(dir) == store::StoreErrorKind::corrupt);
  }
  SECTION("a truncated index is caught") {
    fs::path dir = fresh("i1");
    std::string spo = read_bytes(dir / "spo.2");
    spo.resize(spo.size() - 5);
    write_bytes(dir / "spo.2", spo);
    CHECK(open_failure(dir) == store::StoreErrorKind::corrupt);
  }
  SECTION("a damaged index header is caught") {
    fs::path dir = fresh("i2");
    std::string spo = read_bytes(dir / "spo.2");
    spo[0] = 'X';
    write_bytes(dir / "spo.2", spo);
    CHECK(open_failure(dir) == store::StoreErrorKind::corrupt);
  }
  SECTION("an out-of-range triple id is caught") {
    fs::path dir = fresh("i3");
    std::string spo = read_bytes(dir / "spo.2");
    const std::size_t header = 7 + 8; // "MSIDX1\n" + count
    for (int i = 0; i < 4; ++i)
      spo[header + i] = '\xff';
    write_bytes(dir / "spo.2", spo);
    CHECK(open_failure(dir) == store::StoreErrorKind::corrupt);
  }
  SECTION("a missing index file is caught") {
    fs::path dir = fresh("i4");
    fs::remove(dir / "pos.2");
    CHECK(open_failure(dir) == store::StoreErrorKind::corrupt);
  }
  SECTION("an out-of-order index is caught") {
    fs::path dir = fresh("i5");
    std::string osp = read_bytes(dir / "osp.2");
    const std::size_t header = 7 + 8;
    REQUIRE(osp.size() >= header + 24);
    for (int i = 0; i < 12; ++i)
      std::swap(osp[header + i], osp[header + 12 + i]);
    write_bytes(dir / "osp.2", osp);
    CHECK(open_failure(dir) == store::StoreErrorKind::corrupt);
  }
  SECTION("an index entry count disagreeing with the manifest is caught") {
    fs::path dir = fresh("i6");
    std::string pos = read_bytes(dir / "pos.2");
    const std::size_t header = 7 + 8;
    REQUIRE(pos.size() >= header + 12);
    // Drop the last entry and patch the little-endian count to match.
    pos.resize(pos.size() - 12);
    std::uint64_t count = 0;
    for (int i = 7; i >= 0; --i)
      count = (count << 8) | static_cast<unsigned char>(pos[7 + i]);
    --count;
    for (int i = 0; i < 8; ++i)
      pos[7 + i] = static_cast<char>((count >> (8 * i)) & 0xff);
    write_bytes(dir / "pos.2", pos);
    CHECK(open_failure(dir) == store::StoreErrorKind::corrupt);
  }
}

TEST_CASE("unknown terms give empty results without errors") {
  testutil::TempDir tmp("store-unknown");
  auto st = corpus_store(tmp.sub("s"));
  CHECK(st.match_all(rdf::Iri("http://lcsh.info/none#concept"), std::nullopt,
                     std::nullopt)
            .empty());
  CHECK(st.match_all(std::nullopt, rdf::Iri("http://x.test/nopred"), std::nullopt)
            .empty());
  CHECK(st.match_all(std::nullopt, std::nullopt,
                     rdf::Term(rdf::Literal::plain("no such literal")))
            .empty());
}
