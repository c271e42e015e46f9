#pragma once

// Linked-data request handling, independent of any HTTP transport. Routes:
//   /{lccn}          concept document, representation by Accept negotiation
//   /{lccn}.rdf|.n3|.json|.html   forced representation (extension wins)
//   /label?q=text    preferred-label lookup → JSON list of concept URIs
//   /data.nt         full store dump, streamed in chunks
// Hash URIs mean the concept <base>{lccn}#<fragment> is described by the
// document at /{lccn} — no 303 redirect dance. Responses carry Vary: Accept
// when negotiated and an ETag derived from the store checksum so crawlers
// can revalidate cheaply.

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "marcskos/lccn.hpp"
#include "marcskos/negotiate.hpp"
#include "marcskos/rdfa.hpp"
#include "marcskos/serialize.hpp"
#include "marcskos/store.hpp"

namespace marcskos::service {

struct HttpRequest {
  std::string method; // GET, HEAD, ...
  std::string path;   // decoded path, no query string
  std::string query;  // raw query string (no leading '?')
  std::optional<std::string> accept;
  std::optional<std::string> if_none_match;
  std::optional<std::string> referer;
  std::optional<std::string> user_agent;
  std::string client_address;
};

/// Pull-based body source for responses too large to buffer.
struct BodyStream {
  std::function<bool(std::string&)> next; // fills a chunk; false when done
};

struct HttpResponse {
  int status = 200;
  std::string content_type; // exact media type, no parameters
  std::vector<std::pair<std::string, std::string>> headers;
  std::string body;
  std::optional<BodyStream> stream; // used instead of body when set
  bool head_only = false; // transport must not send the body
};

namespace detail {

inline int hex_digit(char c) {
  if (c >= '0' && c <= '9')
    return c - '0';
  if (c >= 'a' && c <= 'f')
    return c - 'a' + 10;
  if (c >= 'A' && c <= 'F')
    return c - 'A' + 10;
  return -1;
}

inline std::string url_decode(std::string_view text, bool plus_is_space) {
  std::string out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (c == '%' && i + 2 < text.size()) {
      int hi = hex_digit(text[i + 1]);
      int lo = hex_digit(text[i + 2]);
      if (hi >= 0 && lo >= 0) {
        out += static_cast<char>((hi << 4) | lo);
        i += 2;
        continue;
      }
    }
    if (plus_is_space && c == '+') {
      out += ' ';
      continue;
    }
    out += c;
  }
  return out;
}

/// First value of a query parameter, URL-decoded.
inline std::optional<std::string> query_param(std::string_view query, std::string_view name) {
  std::size_t start = 0;
  while (start <= query.size()) {
    std::size_t amp = query.find('&', start);
    std::string_view pair = query.substr(
        start, amp == std::string_view::npos ? std::string_view::npos : amp - start);
    start = amp == std::string_view::npos ? query.size() + 1 : amp + 1;
    std::size_t eq = pair.find('=');
    std::string_view key = eq == std::string_view::npos ? pair : pair.substr(0, eq);
    if (key == name)
      return url_decode(eq == std::string_view::npos ? std::string_view{} : pair.substr(eq + 1),
                        true);
  }
  return std::nullopt;
}

} // namespace detail

class LinkedDataService {
public:
  struct Config {
    rdfa::PageConfig page;
  };

  explicit LinkedDataService(std::shared_ptr<store::TripleStore> triple_store,
                             Config config = {})
      : store_(std::move(triple_store)), config_(std::move(config)) {
    if (store_->options().base_uri.empty())
      throw std::invalid_argument(
          "store manifest has no base URI; it was not built by the converter");
  }

  const store::TripleStore& triple_store() const { return *store_; }

  HttpResponse handle(const HttpRequest& request) const {
    HttpResponse response = dispatch(request);
    if (request.method == "HEAD")
      response.head_only = true;
    return response;
  }

  /// One JSON object per request, with exactly the captured fields.
  static std::string request_log_line(const HttpRequest& request, int status,
                                      std::string_view timestamp) {
    nlohmann::ordered_json entry;
    entry["time"] = timestamp;
    entry["path"] =
        request.query.empty() ? request.path : request.path + "?" + request.query;
    entry["status"] = status;
    entry["accept"] = request.accept ? nlohmann::ordered_json(*request.accept)
                                     : nlohmann::ordered_json(nullptr);
    entry["referer"] = request.referer ? nlohmann::ordered_json(*request.referer)
                                       : nlohmann::ordered_json(nullptr);
    entry["user_agent"] = request.user_agent ? nlohmann::ordered_json(*request.user_agent)
                                             : nlohmann::ordered_json(nullptr);
    entry["client"] = request.client_address;
    return entry.dump();
  }

private:
  std::shared_ptr<store::TripleStore> store_;
  Config config_;

  static HttpResponse text_response(int status, std::string body) {
    HttpResponse response;
    response.status = status;
    response.content_type = "text/plain";
    response.body = std::move(body);
    return response;
  }

  HttpResponse dispatch(const HttpRequest& request) const {
    if (request.method != "GET" && request.method != "HEAD") {
      HttpResponse response = text_response(405, "method not allowed\n");
      response.headers.emplace_back("Allow", "GET, HEAD");
      return response;
    }
    if (request.path == "/data.nt")
      return handle_dump();
    if (request.path == "/label")
      return handle_label(request);

    // /{lccn} or /{lccn}.{ext} — exactly one path segment
    std::string_view path = request.path;
    if (path.empty() || path[0] != '/' )
      return text_response(404, "not found\n");
    path.remove_prefix(1);
    if (path.empty() || path.find('/') != std::string_view::npos)
      return text_response(404, "not found\n");

    std::string_view stem = path;
    std::optional<serialize::Representation> forced;
    std::size_t dot = path.find('.');
    if (dot != std::string_view::npos) {
      forced = serialize::representation_for_extension(path.substr(dot + 1));
      if (!forced)
        return text_response(404, "not found\n");
      stem = path.substr(0, dot);
    }
    if (!lccn::is_normalized(stem))
      return text_response(404, "not found\n");
    return handle_concept(request, std::string(stem), forced);
  }

  HttpResponse handle_concept(const HttpRequest& request, const std::string& control_number,
                              std::optional<serialize::Representation> forced) const {
    const store::StoreOptions& options = store_->options();
    rdf::Iri concept_uri(options.base_uri + control_number + "#" + options.fragment);
    std::vector<rdf::Triple> triples =
        store_->match_all(concept_uri, std::nullopt, std::nullopt);
    if (triples.empty())
      return text_response(404, "not found\n");

    bool negotiated = !forced.has_value();
    serialize::Representation kind;
    if (forced) {
      kind = *forced;
    } else {
      std::optional<serialize::Representation> chosen = negotiate::negotiate(request.accept);
      if (!chosen) {
        HttpResponse response = text_response(406, negotiate::supported_types_text());
        response.headers.emplace_back("Vary", "Accept");
        return response;
      }
      kind = *chosen;
    }

    std::string etag = "\"" + store_->checksum_hex() + "-" + control_number + "-"
                       + std::string(serialize::media_type(kind)) + "\"";

    HttpResponse response;
    if (negotiated)
      response.headers.emplace_back("Vary", "Accept");
    response.headers.emplace_back("ETag", etag);
    if (request.if_none_match
        && (*request.if_none_match == etag || *request.if_none_match == "*")) {
      response.status = 304;
      return response;
    }

    serialize::ConceptDescription description =
        serialize::make_description(concept_uri, triples);
    response.status = 200;
    response.content_type = std::string(serialize::media_type(kind));
    if (kind == serialize::Representation::xhtml_rdfa)
      response.body = rdfa::render_xhtml_rdfa(description, config_.page);
    else
      response.body = serialize::serialize_description(description, kind);
    return response;
  }

  HttpResponse handle_label(const HttpRequest& request) const {
    std::optional<std::string> q = detail::query_param(request.query, "q");
    if (!q)
      return text_response(404, "not found\n");
    std::vector<rdf::Iri> uris = store_->lookup_by_pref_label(*q);
    nlohmann::ordered_json list = nlohmann::ordered_json::array();
    for (const rdf::Iri& uri : uris)
      list.push_back(uri.value);
    HttpResponse response;
    response.status = 200;
    response.content_type = "application/json";
    response.body = list.dump(2) + "\n";
    return response;
  }

  HttpResponse handle_dump() const {
    HttpResponse response;
    response.status = 200;
    response.content_type = "application/n-triples";
    // Chunked pull from a store cursor: constant memory however large the
    // store is. The cursor shares the store's immutable state snapshot.
    auto cursor = std::make_shared<store::TripleStore::Cursor>(
        store_->match(std::nullopt, std::nullopt, std::nullopt));
    response.stream = BodyStream{[cursor](std::string& chunk) {
      chunk.clear();
      rdf::Triple triple;
      while (chunk.size() < 64 * 1024) {
        if (!cursor->next(triple))
          return !chunk.empty();
        chunk += ntriples::render_triple(triple);
        chunk += '\n';
      }
      return true;
    }};
    return response;
  }
};

} // namespace marcskos::service
