#pragma once

// HTTP JSON API over the engine layer and the run store.
//
//   POST /v1/correct     {text, engine_id}         -> {corrected, latency_ms, engine_id}
//   POST /v1/evaluate    {pairs | hyp_file+ref_file, normalize} -> {run_id, bleu, match}
//   GET  /v1/runs                                   -> [RunRecord...], newest first
//   GET  /v1/runs/{id}                              -> RunRecord
//   GET  /v1/health                                 -> {status, engines:[...]}
//
// Errors are {"error": message, "status": code}. Service::handle is the whole
// request path and needs no socket; HttpServer binds it to cpp-httplib.

#include <map>
#include <memory>
#include <optional>
#include <semaphore>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "hgec/config.hpp"
#include "hgec/engines.hpp"
#include "hgec/run_store.hpp"

namespace httplib {
class Server;
}

namespace hgec::service {

struct Request {
  std::string method;
  std::string path;
  std::string body;
  std::string origin;  ///< Origin header, empty when absent
};

struct Response {
  int status = 200;
  std::string body;
  std::vector<std::pair<std::string, std::string>> headers;
};

class Service {
 public:
  /// Engines are built up front; a null transport selects the cpp-httplib one.
  explicit Service(ToolkitConfig config, std::shared_ptr<engines::HttpTransport> transport = nullptr);
  ~Service();

  Response handle(const Request& request);

  const ToolkitConfig& config() const noexcept { return config_; }
  RunStore& runs() noexcept { return runs_; }

 private:
  Response correct(const nlohmann::json& body);
  Response evaluate(const nlohmann::json& body);
  Response list_runs();
  Response get_run(const std::string& id);
  Response health();
  void add_cors(const Request& request, Response& response) const;
  bool origin_allowed(const std::string& origin) const;

  ToolkitConfig config_;
  std::map<std::string, std::unique_ptr<engines::Engine>, std::less<>> engines_;
  RunStore runs_;
  std::counting_semaphore<> engine_slots_;
};

/// Runs a Service on a cpp-httplib server thread.
class HttpServer {
 public:
  explicit HttpServer(Service& service);
  ~HttpServer();

  /// Binds and starts serving in the background. Port 0 picks a free port.
  /// Returns the bound port; throws IoError when binding fails.
  int start(const std::string& host, int port);
  /// Serves on the calling thread until stop().
  void run(const std::string& host, int port);
  void stop();

 private:
  void install_routes();

  Service& service_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
};

}  // namespace hgec::service
