// Command-line pipeline: convert MARCXML authority files to SKOS, persist
// or dump the result, serve it as linked data, and inspect stores.
// Reports go to standard error; data goes to standard output, so dump and
// lookup compose in shell pipelines.

#include <atomic>
#include <chrono>
#include <csignal>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "marcskos/convert.hpp"
#include "marcskos/marc.hpp"
#include "marcskos/ntriples.hpp"
#include "marcskos/rdf.hpp"
#include "marcskos/server.hpp"
#include "marcskos/store.hpp"
#include "marcskos/xml.hpp"

namespace {

using namespace marcskos;

struct RecordParseFailure {
  std::string file;
  std::size_t index = 0;
  std::size_t line = 0;
  std::size_t column = 0;
  std::string message;
};

struct ConvertArgs {
  std::vector<std::string> inputs;
  std::string store_path;
  std::string out_path;
  std::string base_uri;
  std::string scheme_uri;
  std::string fragment = "concept";
  int pivot = 50;
  bool extended_tags = false;
  std::string report_format;
};

void print_human_report(const convert::ConversionReport& report,
                        const std::vector<RecordParseFailure>& failures) {
  std::cerr << "records in:            " << report.records_in + failures.size() << "\n";
  std::cerr << "concepts out:          " << report.concepts_out << "\n";
  std::cerr << "triples out:           " << report.triples_out << "\n";
  std::cerr << "unresolved references: " << report.unresolved_refs.size() << "\n";
  std::cerr << "skipped records:       " << report.skipped_records.size() + failures.size()
            << "\n";
  std::cerr << "dropped fields:        " << report.field_defects.size() << "\n";
  for (const auto& failure : failures)
    std::cerr << "  record " << failure.index << " (" << failure.file << ":" << failure.line
              << ":" << failure.column << ") unparseable: " << failure.message << "\n";
  for (const auto& skipped : report.skipped_records)
    std::cerr << "  record " << skipped.record_position << " skipped: " << skipped.reason
              << "\n";
  for (const auto& ref : report.unresolved_refs)
    std::cerr << "  unresolved "
              << (ref.relation == convert::RefRelation::broader ? "broader" : "related")
              << " reference from <" << ref.source_concept.value << "> to \""
              << ref.target_label << "\" (tag " << ref.source_tag << ")\n";
  for (const auto& defect : report.field_defects)
    std::cerr << "  record " << defect.record_position << " field " << defect.tag << ": "
              << defect.message << "\n";
}

void print_json_report(const convert::ConversionReport& report,
                       const std::vector<RecordParseFailure>& failures) {
  nlohmann::ordered_json doc;
  doc["records_in"] = report.records_in + failures.size();
  doc["concepts_out"] = report.concepts_out;
  doc["triples_out"] = report.triples_out;
  nlohmann::ordered_json unresolved = nlohmann::ordered_json::array();
  for (const auto& ref : report.unresolved_refs) {
    unresolved.push_back(
        {{"source", ref.source_concept.value},
         {"label", ref.target_label},
         {"relation", ref.relation == convert::RefRelation::broader ? "broader" : "related"},
         {"tag", ref.source_tag}});
  }
  doc["unresolved_refs"] = std::move(unresolved);
  nlohmann::ordered_json skips = nlohmann::ordered_json::array();
  for (const auto& skipped : report.skipped_records)
    skips.push_back({{"position", skipped.record_position}, {"reason", skipped.reason}});
  doc["skipped_records"] = std::move(skips);
  nlohmann::ordered_json defects = nlohmann::ordered_json::array();
  for (const auto& defect : report.field_defects)
    defects.push_back({{"position", defect.record_position},
                       {"tag", defect.tag},
                       {"message", defect.message}});
  doc["field_defects"] = std::move(defects);
  nlohmann::ordered_json parse_errors = nlohmann::ordered_json::array();
  for (const auto& failure : failures)
    parse_errors.push_back({{"file", failure.file},
                            {"index", failure.index},
                            {"line", failure.line},
                            {"column", failure.column},
                            {"message", failure.message}});
  doc["record_parse_errors"] = std::move(parse_errors);
  std::cerr << doc.dump(2) << "\n";
}

int run_convert(const ConvertArgs& args) {
  convert::ConversionConfig config;
  config.base_uri = args.base_uri;
  config.fragment = args.fragment;
  config.century_pivot = args.pivot;
  config.extended_tags = args.extended_tags;
  try {
    if (!args.scheme_uri.empty())
      config.scheme_uri = rdf::Iri(args.scheme_uri);
    config.validate();
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }

  convert::Converter converter(config);
  std::vector<RecordParseFailure> failures;
  for (const std::string& input : args.inputs) {
    std::ifstream in(input, std::ios::binary);
    if (!in) {
      std::cerr << "error: cannot open " << input << "\n";
      return 1;
    }
    marc::MarcXmlReader reader(in);
    try {
      while (std::optional<marc::RecordItem> item = reader.next()) {
        if (marc::AuthorityRecord* record = std::get_if<marc::AuthorityRecord>(&*item)) {
          converter.add(*record);
        } else {
          const marc::RecordError& error = std::get<marc::RecordError>(*item);
          failures.push_back({input, error.index, error.line, error.column, error.message});
        }
      }
    } catch (const xml::ParseError& e) {
      std::cerr << input << ":" << e.line() << ":" << e.column() << ": fatal: " << e.what()
                << "\n";
      return 1;
    }
  }

  convert::ConversionResult result = converter.finish();

  try {
    if (!args.store_path.empty()) {
      store::TripleStore triple_store =
          store::TripleStore::create(args.store_path, {config.base_uri, config.fragment});
      triple_store.bulk_insert(result.graph.sorted_triples());
    }
    if (!args.out_path.empty()) {
      if (args.out_path == "-") {
        ntriples::write_graph(std::cout, result.graph);
      } else {
        std::ofstream out(args.out_path, std::ios::binary | std::ios::trunc);
        if (!out) {
          std::cerr << "error: cannot write " << args.out_path << "\n";
          return 1;
        }
        ntriples::write_graph(out, result.graph);
      }
    }
  } catch (const store::StoreError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }

  print_human_report(result.report, failures);
  if (args.report_format == "json")
    print_json_report(result.report, failures);
  return 0;
}

std::atomic<bool> g_stop_requested{false};

void handle_signal(int) { g_stop_requested.store(true); }

int run_serve(const std::string& store_path, const std::string& listen,
              const std::string& log_path) {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::size_t colon = listen.rfind(':');
  if (colon == std::string::npos || colon + 1 >= listen.size()) {
    std::cerr << "error: --listen expects host:port\n";
    return 1;
  }
  host = listen.substr(0, colon);
  try {
    port = std::stoi(listen.substr(colon + 1));
  } catch (const std::exception&) {
    std::cerr << "error: invalid port in --listen\n";
    return 1;
  }

  std::shared_ptr<store::TripleStore> triple_store;
  try {
    triple_store = std::make_shared<store::TripleStore>(store::TripleStore::open(store_path));
  } catch (const store::StoreError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }

  server::Server::Config config;
  config.host = host;
  config.port = port;
  if (!log_path.empty())
    config.log_path = log_path;

  std::unique_ptr<server::Server> srv;
  try {
    srv = std::make_unique<server::Server>(triple_store, config);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  if (!srv->bind()) {
    std::cerr << "error: cannot bind " << host << ":" << port << "\n";
    return 1;
  }
  std::cerr << "serving " << triple_store->size() << " triples on " << host << ":"
            << srv->port() << "\n";

  std::signal(SIGINT, handle_signal);
  std::signal(SIGTERM, handle_signal);
  std::thread monitor([&srv] {
    while (!g_stop_requested.load())
      std::this_thread::sleep_for(std::chrono::milliseconds(50));
    srv->stop();
  });
  srv->serve();
  g_stop_requested.store(true);
  monitor.join();
  return 0;
}

int run_lookup(const std::string& store_path, const std::string& label) {
  try {
    store::TripleStore triple_store = store::TripleStore::open(store_path);
    std::vector<rdf::Iri> uris = triple_store.lookup_by_pref_label(label);
    for (const rdf::Iri& uri : uris)
      std::cout << uri.value << "\n";
    return uris.empty() ? 2 : 0;
  } catch (const store::StoreError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

int run_dump(const std::string& store_path, const std::string& out_path) {
  try {
    store::TripleStore triple_store = store::TripleStore::open(store_path);
    if (out_path == "-") {
      triple_store.dump(std::cout);
    } else {
      std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
      if (!out) {
        std::cerr << "error: cannot write " << out_path << "\n";
        return 1;
      }
      triple_store.dump(out);
    }
    return 0;
  } catch (const store::StoreError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

int run_stats(const std::string& store_path) {
  try {
    store::TripleStore triple_store = store::TripleStore::open(store_path);
    std::size_t concepts = 0;
    store::TripleStore::Cursor cursor = triple_store.match(
        std::nullopt, rdf::vocab::rdf_type(), rdf::Term(rdf::vocab::concept_class()));
    rdf::Triple triple;
    while (cursor.next(triple))
      ++concepts;
    std::cout << "triples: " << triple_store.size() << "\n";
    std::cout << "concepts: " << concepts << "\n";
    std::cout << "predicates:\n";
    for (const auto& [predicate, count] : triple_store.predicate_counts())
      std::cout << "  " << predicate << ": " << count << "\n";
    return 0;
  } catch (const store::StoreError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"MARC21 authority → SKOS linked-data pipeline"};
  app.require_subcommand(1);

  // convert
  ConvertArgs convert_args;
  CLI::App* convert_cmd =
      app.add_subcommand("convert", "Convert MARCXML authority records to SKOS");
  convert_cmd->add_option("--in", convert_args.inputs, "MARCXML input file (repeatable)")
      ->required();
  convert_cmd->add_option("--store", convert_args.store_path,
                          "write a new triple store at this directory");
  convert_cmd->add_option("--out", convert_args.out_path, "write N-Triples ('-' for stdout)");
  convert_cmd->add_option("--base-uri", convert_args.base_uri, "concept URI prefix")
      ->required();
  convert_cmd->add_option("--scheme-uri", convert_args.scheme_uri,
                          "emit skos:inScheme with this scheme URI");
  convert_cmd->add_option("--fragment", convert_args.fragment,
                          "hash fragment naming the concept (default: concept)");
  convert_cmd->add_option("--pivot", convert_args.pivot,
                          "two-digit-year century pivot (default: 50)")
      ->check(CLI::Range(0, 99));
  convert_cmd->add_flag("--extended-tags", convert_args.extended_tags,
                        "also map chronological and genre/form headings (148/155 families)");
  convert_cmd->add_option("--report", convert_args.report_format,
                          "additionally print a machine-readable report (json)")
      ->check(CLI::IsMember({"json"}));

  // serve
  std::string serve_store, serve_listen = "127.0.0.1:8080", serve_log;
  CLI::App* serve_cmd = app.add_subcommand("serve", "Serve a store as linked data over HTTP");
  serve_cmd->add_option("--store", serve_store, "triple store directory")->required();
  serve_cmd->add_option("--listen", serve_listen, "host:port (default 127.0.0.1:8080)");
  serve_cmd->add_option("--log", serve_log, "append one JSON object per request to this file");

  // lookup
  std::string lookup_store, lookup_label;
  CLI::App* lookup_cmd =
      app.add_subcommand("lookup", "Find concept URIs by preferred label");
  lookup_cmd->add_option("--store", lookup_store, "triple store directory")->required();
  lookup_cmd->add_option("label", lookup_label, "preferred label text")->required();

  // dump
  std::string dump_store, dump_out = "-";
  CLI::App* dump_cmd = app.add_subcommand("dump", "Write the store as sorted N-Triples");
  dump_cmd->add_option("--store", dump_store, "triple store directory")->required();
  dump_cmd->add_option("--out", dump_out, "output file ('-' for stdout)");

  // stats
  std::string stats_store;
  CLI::App* stats_cmd = app.add_subcommand("stats", "Print store statistics");
  stats_cmd->add_option("--store", stats_store, "triple store directory")->required();

  CLI11_PARSE(app, argc, argv);

  if (convert_cmd->parsed()) {
    if (convert_args.store_path.empty() && convert_args.out_path.empty()) {
      std::cerr << "error: convert needs --store and/or --out\n";
      return 1;
    }
    return run_convert(convert_args);
  }
  if (serve_cmd->parsed())
    return run_serve(serve_store, serve_listen, serve_log);
  if (lookup_cmd->parsed())
    return run_lookup(lookup_store, lookup_label);
  if (dump_cmd->parsed())
    return run_dump(dump_store, dump_out);
  if (stats_cmd->parsed())
    return run_stats(stats_store);
  return 1;
}
