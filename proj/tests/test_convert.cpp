// Authority-to-SKOS conversion: heading flattening, label keys, every
// documentation-field rule, date mapping with the century pivot, two-pass
// reference resolution, and the conversion report. Expected triples are
// written out literally so the mapping contract is restated independently
// of the code that implements it.
#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "marcskos/convert.hpp"
#include "marcskos/marc.hpp"
#include "marcskos/ntriples.hpp"
#include "marcskos/rdf.hpp"
#include "support/generators.hpp"
#include "support/test_util.hpp"

using namespace marcskos;

namespace {

marc::DataField field(const std::string& tag, std::vector<marc::Subfield> subfields) {
  marc::DataField f;
  f.tag = tag;
  f.subfields = std::move(subfields);
  return f;
}

marc::AuthorityRecord record_with(const std::string& lccn,
                                  std::vector<marc::DataField> fields) {
  marc::AuthorityRecord record;
  record.leader = "00000nz  a2200000n  4500";
  record.control_fields.push_back({"001", lccn});
  record.data_fields.push_back(field("010", {{'a', lccn}}));
  for (auto& f : fields)
    record.data_fields.push_back(std::move(f));
  return record;
}

convert::ConversionConfig plain_config() {
  convert::ConversionConfig config;
  config.base_uri = "http://x.test/";
  return config;
}

/// Object literals of (subject, predicate) in sorted order.
std::vector<std::string> literals_of(const rdf::Graph& graph, const std::string& subject,
                                     const rdf::Iri& predicate) {
  std::vector<std::string> out;
  for (const rdf::Triple& t :
       graph.match(rdf::Iri(subject), predicate, std::nullopt)) {
    if (rdf::is_literal(t.object))
      out.push_back(std::get<rdf::Literal>(t.object).lexical);
  }
  std::sort(out.begin(), out.end());
  return out;
}

} // namespace

TEST_CASE("label keys collapse whitespace and strip trailing periods") {
  CHECK(convert::label_key("World Wide Web") == "World Wide Web");
  CHECK(convert::label_key("  World   Wide Web  ") == "World Wide Web");
  CHECK(convert::label_key("Information retrieval.") == "Information retrieval");
  CHECK(convert::label_key("Ends with dots...") == "Ends with dots");
  CHECK(convert::label_key("Dot. inside. stays.") == "Dot. inside. stays");
  CHECK(convert::label_key("Trailing mix. . ") == "Trailing mix");
  CHECK(convert::label_key("...") == "");
  CHECK(convert::label_key("") == "");
}

TEST_CASE("label keys are idempotent over random input") {
  std::mt19937 rng(42);
  const std::string alphabet = "ab .\t\n.";
  std::uniform_int_distribution<std::size_t> pick(0, alphabet.size() - 1);
  std::uniform_int_distribution<int> len(0, 24);
  for (int i = 0; i < 2000; ++i) {
    std::string raw;
    int n = len(rng);
    for (int j = 0; j < n; ++j)
      raw += alphabet[pick(rng)];
    std::string once = convert::label_key(raw);
    CHECK(convert::label_key(once) == once);
  }
}

TEST_CASE("heading labels flatten subdivisions in document order") {
  convert::ConversionConfig config = plain_config();

  SECTION("subject with one chronological subdivision") {
    auto f = field("150", {{'a', "Drama"}, {'y', "17th century"}});
    CHECK(convert::build_label(f, config) == "Drama--17th century");
  }
  SECTION("general and geographic subdivisions in order") {
    auto f = field("150", {{'a', "Science"},
                           {'x', "Study and teaching"},
                           {'z', "France"},
                           {'v', "Periodicals"}});
    CHECK(convert::build_label(f, config)
          == "Science--Study and teaching--France--Periodicals");
  }
  SECTION("document order wins over code order") {
    auto f = field("150", {{'a', "Art"}, {'z', "Italy"}, {'x', "History"}});
    CHECK(convert::build_label(f, config) == "Art--Italy--History");
  }
  SECTION("subfield b attaches with a space") {
    auto f = field("150", {{'a', "Alpha"}, {'b', "beta"}, {'x', "gamma"}});
    CHECK(convert::build_label(f, config) == "Alpha beta--gamma");
  }
  SECTION("missing subfield a yields nothing") {
    auto f = field("150", {{'x', "History"}});
    CHECK(convert::build_label(f, config) == std::nullopt);
  }
  SECTION("a custom separator is honoured") {
    config.subdivision_separator = " — ";
    auto f = field("150", {{'a', "Drama"}, {'y', "17th century"}});
    CHECK(convert::build_label(f, config) == "Drama — 17th century");
  }
}

TEST_CASE("one record maps to the documented triples") {
  auto record = record_with(
      "sh85000001",
      {field("150", {{'a', "Alpha"}}), field("450", {{'a', "Beginning"}}),
       field("667", {{'a', "General note."}}),
       field("670", {{'a', "Found in X"}, {'b', "(info)"}, {'u', "http://e.test/"}}),
       field("675", {{'a', "Not found in Y"}}),
       field("678", {{'a', "Alpha is first"}, {'b', "of all"}, {'u', "http://d.test/"}}),
       field("680", {{'i', "Use for"}, {'a', "beginnings."}}),
       field("681", {{'i', "Note under"}, {'a', "Beta"}}),
       field("682", {{'i', "Replaced by"}, {'a', "Omega"}}),
       field("688", {{'a', "Earlier form: A."}}),
       field("053", {{'a', "QA1"}})});
  record.control_fields.push_back({"005", "20010203040506.0"});
  record.control_fields.push_back({"008", "860211|| extra"});

  auto result = convert::convert_records({record}, plain_config());
  const std::string s = "http://x.test/sh85000001#concept";

  std::set<std::string> expected = {
      "<" + s + "> <http://www.w3.org/1999/02/22-rdf-syntax-ns#type> "
          "<http://www.w3.org/2004/02/skos/core#Concept> .",
      "<" + s + "> <http://www.w3.org/2004/02/skos/core#prefLabel> \"Alpha\" .",
      "<" + s + "> <http://www.w3.org/2004/02/skos/core#altLabel> \"Beginning\" .",
      "<" + s + "> <http://www.w3.org/2004/02/skos/core#note> \"General note.\" .",
      "<" + s + "> <http://purl.org/dc/terms/source> \"Found in X (info) http://e.test/\" .",
      "<" + s + "> <http://www.w3.org/2004/02/skos/core#editorialNote> \"Not found in Y\" .",
      "<" + s + "> <http://www.w3.org/2004/02/skos/core#definition> "
          "\"Alpha is first of all http://d.test/\" .",
      "<" + s + "> <http://www.w3.org/2004/02/skos/core#scopeNote> \"Use for beginnings.\" .",
      "<" + s + "> <http://www.w3.org/2004/02/skos/core#example> \"Note under Beta\" .",
      "<" + s + "> <http://www.w3.org/2004/02/skos/core#changeNote> \"Replaced by Omega\" .",
      "<" + s + "> <http://www.w3.org/2004/02/skos/core#historyNote> \"Earlier form: A.\" .",
      "<" + s + "> <http://purl.org/dc/terms/lcc> \"QA1\" .",
      "<" + s + "> <http://purl.org/dc/terms/created> "
          "\"1986-02-11\"^^<http://www.w3.org/2001/XMLSchema#date> .",
      "<" + s + "> <http://purl.org/dc/terms/modified> "
          "\"2001-02-03T04:05:06\"^^<http://www.w3.org/2001/XMLSchema#dateTime> .",
  };

  std::set<std::string> actual;
  for (const rdf::Triple& t : result.graph.sorted_triples())
    actual.insert(ntriples::render_triple(t));
  CHECK(actual == expected);
  CHECK(result.report.concepts_out == 1);
  CHECK(result.report.triples_out == result.graph.size());
}

TEST_CASE("the scheme URI adds an inScheme triple only when configured") {
  auto record = record_with("sh85000002", {field("150", {{'a', "Beta"}})});

  auto without = convert::convert_records({record}, plain_config());
  CHECK(without.graph
            .match(std::nullopt, rdf::vocab::in_scheme(), std::nullopt)
            .empty());

  auto config = plain_config();
  config.scheme_uri = rdf::Iri("http://x.test/#scheme");
  auto with = convert::convert_records({record}, config);
  auto in_scheme = with.graph.match(std::nullopt, rdf::vocab::in_scheme(), std::nullopt);
  REQUIRE(in_scheme.size() == 1);
  CHECK(std::get<rdf::Iri>(in_scheme[0].object).value == "http://x.test/#scheme");
}

TEST_CASE("see-also links follow the control-subfield rules") {
  auto target = record_with("sh85000010", {field("150", {{'a', "Target"}})});
  const std::string source_uri = "http://x.test/sh85000011#concept";
  const std::string target_uri = "http://x.test/sh85000010#concept";

  auto run = [&](std::vector<marc::Subfield> link_subfields) {
    auto source = record_with("sh85000011", {field("150", {{'a', "Source"}}),
                                             field("550", std::move(link_subfields))});
    return convert::convert_records({target, source}, plain_config());
  };

  SECTION("w starting with g becomes broader plus inverse narrower") {
    auto result = run({{'w', "g"}, {'a', "Target"}});
    CHECK(result.graph.contains({rdf::Iri(source_uri), rdf::vocab::broader(),
                                 rdf::Iri(target_uri)}));
    CHECK(result.graph.contains({rdf::Iri(target_uri), rdf::vocab::narrower(),
                                 rdf::Iri(source_uri)}));
    CHECK(result.report.unresolved_refs.empty());
  }
  SECTION("gn also counts as broader") {
    auto result = run({{'w', "gn"}, {'a', "Target"}});
    CHECK(result.graph.contains({rdf::Iri(source_uri), rdf::vocab::broader(),
                                 rdf::Iri(target_uri)}));
  }
  SECTION("absent w becomes one-way related") {
    auto result = run({{'a', "Target"}});
    CHECK(result.graph.contains({rdf::Iri(source_uri), rdf::vocab::related(),
                                 rdf::Iri(target_uri)}));
    CHECK(result.graph
              .match(rdf::Iri(target_uri), rdf::vocab::related(), std::nullopt)
              .empty());
  }
  SECTION("other w values also become related") {
    auto result = run({{'w', "nne"}, {'a', "Target"}});
    CHECK(result.graph.contains({rdf::Iri(source_uri), rdf::vocab::related(),
                                 rdf::Iri(target_uri)}));
  }
  SECTION("w starting with h produces nothing at all") {
    auto result = run({{'w', "h"}, {'a', "Target"}});
    CHECK(result.graph
              .match(rdf::Iri(source_uri), rdf::vocab::related(), std::nullopt)
              .empty());
    CHECK(result.graph
              .match(rdf::Iri(source_uri), rdf::vocab::broader(), std::nullopt)
              .empty());
    CHECK(result.report.unresolved_refs.empty());
  }
  SECTION("link without subfield a produces nothing") {
    auto result = run({{'w', "g"}});
    CHECK(result.graph
              .match(rdf::Iri(source_uri), rdf::vocab::broader(), std::nullopt)
              .empty());
  }
}

TEST_CASE("references resolve only to a unique preferred label") {
  SECTION("no candidate stays unresolved and is reported") {
    auto source = record_with("sh85000020", {field("150", {{'a', "Source"}}),
                                             field("550", {{'w', "g"}, {'a', "Missing"}})});
    auto result = convert::convert_records({source}, plain_config());
    CHECK(result.graph.match(std::nullopt, rdf::vocab::broader(), std::nullopt).empty());
    REQUIRE(result.report.unresolved_refs.size() == 1);
    CHECK(result.report.unresolved_refs[0].target_label == "Missing");
    CHECK(result.report.unresolved_refs[0].relation == convert::RefRelation::broader);
    CHECK(result.report.unresolved_refs[0].source_tag == "550");
  }
  SECTION("two candidates with the same label stay unresolved") {
    auto a = record_with("sh85000021", {field("150", {{'a', "Shared"}})});
    auto b = record_with("sh85000022", {field("150", {{'a', "Shared"}})});
    auto source = record_with("sh85000023", {field("150", {{'a', "Source"}}),
                                             field("550", {{'w', "g"}, {'a', "Shared"}})});
    auto result = convert::convert_records({a, b, source}, plain_config());
    CHECK(result.graph.match(std::nullopt, rdf::vocab::broader(), std::nullopt).empty());
    REQUIRE(result.report.unresolved_refs.size() == 1);
  }
  SECTION("trailing periods and spacing do not block a match") {
    auto target = record_with("sh85000024", {field("150", {{'a', "Exact Label"}})});
    auto source = record_with("sh85000025",
                              {field("150", {{'a', "Source"}}),
                               field("550", {{'w', "g"}, {'a', "Exact   Label."}})});
    auto result = convert::convert_records({target, source}, plain_config());
    CHECK(result.graph.contains({rdf::Iri("http://x.test/sh85000025#concept"),
                                 rdf::vocab::broader(),
                                 rdf::Iri("http://x.test/sh85000024#concept")}));
  }
  SECTION("a reference to the record's own label resolves to itself") {
    auto self = record_with("sh85000026", {field("150", {{'a', "Selfsame"}}),
                                           field("550", {{'w', "g"}, {'a', "Selfsame"}})});
    auto result = convert::convert_records({self}, plain_config());
    const rdf::Iri uri("http://x.test/sh85000026#concept");
    CHECK(result.graph.contains({uri, rdf::vocab::broader(), uri}));
    CHECK(result.graph.contains({uri, rdf::vocab::narrower(), uri}));
  }
}

TEST_CASE("creation dates use the two-digit-year pivot") {
  auto convert_with_008 = [](const std::string& f008, int pivot) {
    auto record = record_with("sh85000030", {field("150", {{'a', "Dated"}})});
    record.control_fields.push_back({"008", f008});
    auto config = plain_config();
    config.century_pivot = pivot;
    return convert::convert_records({record}, config);
  };

  auto created = [](const convert::ConversionResult& result) -> std::optional<std::string> {
    auto triples =
        result.graph.match(std::nullopt, rdf::vocab::dc_created(), std::nullopt);
    if (triples.empty())
      return std::nullopt;
    return std::get<rdf::Literal>(triples[0].object).lexical;
  };

  CHECK(created(convert_with_008("860211 rest ignored", 50)) == "1986-02-11");
  CHECK(created(convert_with_008("500101", 50)) == "1950-01-01");
  CHECK(created(convert_with_008("490101", 50)) == "2049-01-01");
  CHECK(created(convert_with_008("000211", 50)) == "2000-02-11");
  CHECK(created(convert_with_008("700101", 70)) == "1970-01-01");
  CHECK(created(convert_with_008("690101", 70)) == "2069-01-01");

  SECTION("malformed values are dropped with a defect") {
    auto result = convert_with_008("8602", 50); // too short
    CHECK(created(result) == std::nullopt);
    REQUIRE(result.report.field_defects.size() == 1);
    CHECK(result.report.field_defects[0].tag == "008");

    auto letters = convert_with_008("86021x|||", 50);
    CHECK(created(letters) == std::nullopt);
    CHECK(letters.report.field_defects.size() == 1);
  }
  SECTION("an absent 008 is not a defect") {
    auto record = record_with("sh85000031", {field("150", {{'a', "Undated"}})});
    auto result = convert::convert_records({record}, plain_config());
    CHECK(result.report.field_defects.empty());
    CHECK(result.graph.match(std::nullopt, rdf::vocab::dc_created(), std::nullopt).empty());
  }
}

TEST_CASE("modification timestamps require fourteen digits") {
  auto convert_with_005 = [](const std::string& f005) {
    auto record = record_with("sh85000032", {field("150", {{'a', "Stamped"}})});
    record.control_fields.push_back({"005", f005});
    return convert::convert_records({record}, plain_config());
  };
  auto modified = [](const convert::ConversionResult& result) -> std::optional<std::string> {
    auto triples =
        result.graph.match(std::nullopt, rdf::vocab::dc_modified(), std::nullopt);
    if (triples.empty())
      return std::nullopt;
    return std::get<rdf::Literal>(triples[0].object).lexical;
  };

  CHECK(modified(convert_with_005("20010304093716.0")) == "2001-03-04T09:37:16");
  CHECK(modified(convert_with_005("19991109112333")) == "1999-11-09T11:23:33");
  CHECK(modified(convert_with_005("20010304093716.55")) == "2001-03-04T09:37:16");

  for (const std::string bad : {"1999", "200103040937160", "2001030409371x.0",
                                "20010304093716.x", "20010304093716extra"}) {
    auto result = convert_with_005(bad);
    CHECK(modified(result) == std::nullopt);
    CHECK(result.report.field_defects.size() == 1);
  }
}

TEST_CASE("classification numbers map one triple per field occurrence") {
  auto record = record_with("sh85000033", {field("150", {{'a', "Classified"}}),
                                           field("053", {{'a', "PN1801"}, {'a', "IGNORED"}}),
                                           field("053", {{'a', "PN1821"}}),
                                           field("053", {{'b', "no a"}})});
  auto result = convert::convert_records({record}, plain_config());
  CHECK(literals_of(result.graph, "http://x.test/sh85000033#concept", rdf::vocab::dc_lcc())
        == std::vector<std::string>{"PN1801", "PN1821"});
}

TEST_CASE("records without a usable identity or heading are skipped") {
  SECTION("no 010 and no 001") {
    marc::AuthorityRecord record;
    record.leader = "00000nz  a2200000n  4500";
    record.data_fields.push_back(field("150", {{'a', "Orphan"}}));
    auto result = convert::convert_records({record}, plain_config());
    CHECK(result.report.concepts_out == 0);
    REQUIRE(result.report.skipped_records.size() == 1);
  }
  SECTION("010 falls back to 001") {
    marc::AuthorityRecord record;
    record.leader = "00000nz  a2200000n  4500";
    record.control_fields.push_back({"001", "sh 85000034"});
    record.data_fields.push_back(field("150", {{'a', "From001"}}));
    auto result = convert::convert_records({record}, plain_config());
    CHECK(result.report.concepts_out == 1);
    CHECK(result.graph.contains({rdf::Iri("http://x.test/sh85000034#concept"),
                                 rdf::vocab::pref_label(),
                                 rdf::Literal::plain("From001")}));
  }
  SECTION("an unusable control number is skipped with its reason") {
    auto record = record_with("not a number", {field("150", {{'a', "X"}})});
    auto result = convert::convert_records({record}, plain_config());
    CHECK(result.report.concepts_out == 0);
    REQUIRE(result.report.skipped_records.size() == 1);
    CHECK(result.report.skipped_records[0].reason.find("not a number")
          != std::string::npos);
  }
  SECTION("duplicate control numbers keep the first record") {
    auto first = record_with("sh85000035", {field("150", {{'a', "First"}})});
    auto second = record_with("sh 85000035", {field("150", {{'a', "Second"}})});
    auto result = convert::convert_records({first, second}, plain_config());
    CHECK(result.report.concepts_out == 1);
    REQUIRE(result.report.skipped_records.size() == 1);
    CHECK(result.report.skipped_records[0].record_position == 1);
    CHECK(result.graph.contains({rdf::Iri("http://x.test/sh85000035#concept"),
                                 rdf::vocab::pref_label(),
                                 rdf::Literal::plain("First")}));
  }
  SECTION("no heading field") {
    auto record = record_with("sh85000036", {field("667", {{'a', "Only a note"}})});
    auto result = convert::convert_records({record}, plain_config());
    CHECK(result.report.concepts_out == 0);
    CHECK(result.report.skipped_records.size() == 1);
  }
  SECTION("extra headings are dropped with a defect") {
    auto record = record_with("sh85000037", {field("150", {{'a', "Kept"}}),
                                             field("151", {{'a', "Dropped"}})});
    auto result = convert::convert_records({record}, plain_config());
    CHECK(result.report.concepts_out == 1);
    REQUIRE(result.report.field_defects.size() == 1);
    CHECK(result.report.field_defects[0].tag == "151");
    auto labels = result.graph.match(std::nullopt, rdf::vocab::pref_label(), std::nullopt);
    REQUIRE(labels.size() == 1);
    CHECK(std::get<rdf::Literal>(labels[0].object).lexical == "Kept");
  }
}

TEST_CASE("the extended-tag families are off by default") {
  auto genre = record_with("gf2011026028", {field("155", {{'a', "Western films"}}),
                                            field("455", {{'a', "Cowboy films"}}),
                                            field("555", {{'w', "g"}, {'a', "Motion pictures"}})});

  auto off = convert::convert_records({genre}, plain_config());
  CHECK(off.report.concepts_out == 0);
  CHECK(off.report.skipped_records.size() == 1);

  auto config = plain_config();
  config.extended_tags = true;
  auto on = convert::convert_records({genre}, config);
  CHECK(on.report.concepts_out == 1);
  const rdf::Iri uri("http://x.test/gf2011026028#concept");
  CHECK(on.graph.contains({uri, rdf::vocab::pref_label(),
                           rdf::Literal::plain("Western films")}));
  CHECK(on.graph.contains({uri, rdf::vocab::alt_label(),
                           rdf::Literal::plain("Cowboy films")}));
  REQUIRE(on.report.unresolved_refs.size() == 1);
  CHECK(on.report.unresolved_refs[0].source_tag == "555");
}

TEST_CASE("empty documentation fields emit nothing") {
  auto record = record_with("sh85000038", {field("150", {{'a', "Quiet"}}),
                                           field("667", {{'b', "wrong code"}}),
                                           field("680", {{'u', "also wrong"}})});
  auto result = convert::convert_records({record}, plain_config());
  CHECK(result.graph.match(std::nullopt, rdf::vocab::note(), std::nullopt).empty());
  CHECK(result.graph.match(std::nullopt, rdf::vocab::scope_note(), std::nullopt).empty());
}

TEST_CASE("converting the corpus matches its reviewed report") {
  const auto& result = testutil::corpus_result();
  CHECK(result.report.records_in == 16);
  CHECK(result.report.concepts_out == 11);
  CHECK(result.report.triples_out == 83);
  CHECK(result.report.unresolved_refs.size() == 2);
  CHECK(result.report.skipped_records.size() == 5);
  CHECK(result.report.field_defects.size() == 3);
  CHECK(result.graph.size() == 83);

  // Spot-check the documented flattening example.
  CHECK(result.graph.contains({rdf::Iri("http://lcsh.info/sh85101653#concept"),
                               rdf::vocab::pref_label(),
                               rdf::Literal::plain("Drama--17th century")}));
}

TEST_CASE("each concept carries exactly one preferred label") {
  auto records = gen::random_records(7, 500);
  auto result = convert::convert_records(records, plain_config());
  for (const rdf::Iri& subject : result.graph.subjects()) {
    auto labels = result.graph.match(subject, rdf::vocab::pref_label(), std::nullopt);
    auto types = result.graph.match(subject, rdf::vocab::rdf_type(), std::nullopt);
    if (!types.empty()) { // every concept subject
      CHECK(labels.size() == 1);
    }
  }
}

TEST_CASE("broader and narrower stay exact inverses over random corpora") {
  auto records = gen::random_records(11, 1000);
  auto result = convert::convert_records(records, plain_config());
  auto broader = result.graph.match(std::nullopt, rdf::vocab::broader(), std::nullopt);
  auto narrower = result.graph.match(std::nullopt, rdf::vocab::narrower(), std::nullopt);
  CHECK(broader.size() == narrower.size());
  CHECK_FALSE(broader.empty());
  for (const rdf::Triple& t : broader)
    CHECK(result.graph.contains({std::get<rdf::Iri>(t.object), rdf::vocab::narrower(),
                                 t.subject}));
  for (const rdf::Triple& t : narrower)
    CHECK(result.graph.contains({std::get<rdf::Iri>(t.object), rdf::vocab::broader(),
                                 t.subject}));
}

TEST_CASE("every linked concept exists in the output (closed world)") {
  auto records = gen::random_records(13, 800);
  auto result = convert::convert_records(records, plain_config());
  std::set<std::string> subjects;
  for (const rdf::Iri& subject : result.graph.subjects())
    subjects.insert(subject.value);
  for (const rdf::Iri& predicate :
       {rdf::vocab::broader(), rdf::vocab::narrower(), rdf::vocab::related()}) {
    for (const rdf::Triple& t : result.graph.match(std::nullopt, predicate, std::nullopt)) {
      CHECK(subjects.count(std::get<rdf::Iri>(t.object).value) == 1);
    }
  }
}
