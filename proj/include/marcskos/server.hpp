#pragma once

// HTTP transport adapter: binds the transport-independent LinkedDataService
// to a cpp-httplib server. Request handling is fully concurrent over the
// shared read-only store snapshot; the only cross-request mutable state is
// the append-only access log, serialized by a mutex.

#include <ctime>
#include <filesystem>
#include <fstream>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>

#include <httplib.h>

#include "marcskos/service.hpp"

namespace marcskos::server {

inline std::string iso8601_utc_now() {
  std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

class Server {
public:
  struct Config {
    std::string host = "127.0.0.1";
    int port = 8080; // 0 → pick an ephemeral port
    std::optional<std::filesystem::path> log_path;
    rdfa::PageConfig page;
  };

  Server(std::shared_ptr<store::TripleStore> triple_store, Config config)
      : service_(std::move(triple_store), service::LinkedDataService::Config{config.page}),
        config_(std::move(config)) {
    if (config_.log_path) {
      log_.open(*config_.log_path, std::ios::app);
      if (!log_)
        throw std::runtime_error("cannot open log file " + config_.log_path->string());
    }
    // SO_REUSEADDR only (fast restart). The transport's default would add
    // SO_REUSEPORT, letting a second instance bind the same port and
    // silently split traffic; a duplicate bind must fail instead.
    http_.set_socket_options([](socket_t sock) {
      int yes = 1;
      ::setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const char*>(&yes),
                   sizeof(yes));
    });
    auto handler = [this](const httplib::Request& req, httplib::Response& res) {
      route(req, res);
    };
    http_.Get(".*", handler);
    http_.Post(".*", handler);
    http_.Put(".*", handler);
    http_.Delete(".*", handler);
    http_.Patch(".*", handler);
    http_.Options(".*", handler);
  }

  /// Binds the listening socket. Returns false on failure (port in use,
  /// bad address). With port 0 an ephemeral port is chosen; see port().
  bool bind() {
    if (config_.port == 0) {
      bound_port_ = http_.bind_to_any_port(config_.host);
      return bound_port_ > 0;
    }
    if (!http_.bind_to_port(config_.host, config_.port))
      return false;
    bound_port_ = config_.port;
    return true;
  }

  /// Serves until stop(); blocks the calling thread.
  bool serve() { return http_.listen_after_bind(); }

  /// Thread-safe shutdown; flushes the access log.
  void stop() {
    http_.stop();
    std::lock_guard<std::mutex> lock(log_mutex_);
    if (log_.is_open())
      log_.flush();
  }

  int port() const { return bound_port_; }
  bool is_running() const { return http_.is_running(); }
  void wait_until_ready() { http_.wait_until_ready(); }
  const service::LinkedDataService& service() const { return service_; }

private:
  service::LinkedDataService service_;
  Config config_;
  httplib::Server http_;
  std::ofstream log_;
  std::mutex log_mutex_;
  int bound_port_ = 0;

  void route(const httplib::Request& req, httplib::Response& res) {
    service::HttpRequest request;
    request.method = req.method;
    request.path = req.path; // already URL-decoded by the transport
    std::size_t query_pos = req.target.find('?');
    if (query_pos != std::string::npos)
      request.query = req.target.substr(query_pos + 1);
    if (req.has_header("Accept"))
      request.accept = req.get_header_value("Accept");
    if (req.has_header("If-None-Match"))
      request.if_none_match = req.get_header_value("If-None-Match");
    if (req.has_header("Referer"))
      request.referer = req.get_header_value("Referer");
    if (req.has_header("User-Agent"))
      request.user_agent = req.get_header_value("User-Agent");
    request.client_address = req.remote_addr;

    service::HttpResponse out = service_.handle(request);
    res.status = out.status;
    for (const auto& [name, value] : out.headers)
      res.set_header(name, value);
    if (out.stream && !out.head_only) {
      auto stream = std::make_shared<service::BodyStream>(std::move(*out.stream));
      res.set_chunked_content_provider(
          out.content_type, [stream](std::size_t, httplib::DataSink& sink) {
            std::string chunk;
            if (stream->next(chunk)) {
              sink.os.write(chunk.data(), static_cast<std::streamsize>(chunk.size()));
              return true;
            }
            sink.done();
            return true;
          });
    } else if (out.stream) {
      // HEAD on a streamed resource: headers only.
      res.set_header("Content-Type", out.content_type);
    } else if (!out.content_type.empty()) {
      // set_content also serves HEAD correctly (headers with no body).
      res.set_content(out.body, out.content_type);
    }
    write_log(request, out.status);
  }

  void write_log(const service::HttpRequest& request, int status) {
    if (!log_.is_open())
      return;
    std::string line =
        service::LinkedDataService::request_log_line(request, status, iso8601_utc_now());
    std::lock_guard<std::mutex> lock(log_mutex_);
    log_ << line << '\n';
    log_.flush();
  }
};

} // namespace marcskos::server
