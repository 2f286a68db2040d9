#include "hgec/service.hpp"

#include <httplib.h>

#include <fstream>

#include <nlohmann/json.hpp>

#include "hgec/error.hpp"
#include "hgec/metrics.hpp"
#include "hgec/unicode.hpp"

namespace hgec::service {

using json = nlohmann::json;

namespace {

constexpr std::string_view kRunsPrefix = "/v1/runs/";

std::string dump(const json& j) { return j.dump(-1, ' ', false, json::error_handler_t::replace); }

Response ok(const json& body, int status = 200) {
  return {status, dump(body), {{"Content-Type", "application/json; charset=utf-8"}}};
}

Response error(int status, const std::string& message) {
  return ok(json{{"error", message}, {"status", status}}, status);
}

class HttpError : public Error {
 public:
  HttpError(int status, const std::string& what) : Error(what), status_(status) {}
  int status() const noexcept { return status_; }

 private:
  int status_;
};

std::string require_string(const json& body, const char* key) {
  const auto it = body.find(key);
  if (it == body.end()) throw HttpError(400, std::string("missing field '") + key + "'");
  if (!it->is_string()) throw HttpError(400, std::string("field '") + key + "' must be a string");
  return it->get<std::string>();
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw HttpError(404, "file not found: " + path.filename().string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
  }
  return lines;
}

// Resolves a client-supplied path inside the data directory.
std::filesystem::path data_file(const std::filesystem::path& data_dir, const std::string& ref) {
  const std::filesystem::path rel(ref);
  if (ref.empty() || rel.is_absolute()) throw HttpError(400, "file references must be relative to the data directory");
  for (const auto& part : rel) {
    if (part == "..") throw HttpError(400, "file references may not leave the data directory");
  }
  return data_dir / rel;
}

}  // namespace

// --- Service -------------------------------------------------------------------

Service::Service(ToolkitConfig config, std::shared_ptr<engines::HttpTransport> transport)
    : config_(std::move(config)),
      runs_(config_.service.data_dir),
      engine_slots_(static_cast<std::ptrdiff_t>(std::max<std::size_t>(1, config_.service.max_concurrency))) {
  for (const auto& ec : config_.engines) engines_.emplace(ec.engine_id, engines::make_engine(ec, transport));
}

Service::~Service() = default;

bool Service::origin_allowed(const std::string& origin) const {
  for (const auto& allowed : config_.service.cors_allow) {
    if (allowed == "*" || allowed == origin) return true;
  }
  return false;
}

void Service::add_cors(const Request& request, Response& response) const {
  if (request.origin.empty() || !origin_allowed(request.origin)) return;
  response.headers.emplace_back("Access-Control-Allow-Origin", request.origin);
  response.headers.emplace_back("Vary", "Origin");
}

Response Service::handle(const Request& request) {
  Response res;
  try {
    const std::string& path = request.path;
    if (request.method == "OPTIONS") {
      if (!request.origin.empty() && !origin_allowed(request.origin)) {
        res = error(403, "origin not allowed");
      } else {
        res = {204, {}, {}};
        res.headers.emplace_back("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
        res.headers.emplace_back("Access-Control-Allow-Headers", "Content-Type");
        res.headers.emplace_back("Access-Control-Max-Age", "600");
      }
    } else if (path == "/v1/correct" || path == "/v1/evaluate") {
      if (request.method != "POST") {
        res = error(405, "use POST for " + path);
      } else {
        json body;
        try {
          body = json::parse(request.body);
        } catch (const json::parse_error&) {
          throw HttpError(400, "request body is not valid JSON");
        }
        if (!body.is_object()) throw HttpError(400, "request body must be a JSON object");
        res = path == "/v1/correct" ? correct(body) : evaluate(body);
      }
    } else if (path == "/v1/runs" || path == "/v1/runs/") {
      res = request.method == "GET" ? list_runs() : error(405, "use GET for " + path);
    } else if (path.starts_with(kRunsPrefix)) {
      res = request.method == "GET" ? get_run(path.substr(kRunsPrefix.size())) : error(405, "use GET for " + path);
    } else if (path == "/v1/health") {
      res = request.method == "GET" ? health() : error(405, "use GET for " + path);
    } else {
      res = error(404, "no such endpoint: " + path);
    }
  } catch (const HttpError& e) {
    res = error(e.status(), e.what());
  } catch (const EngineTimeout& e) {
    res = error(504, e.what());
  } catch (const EngineUnavailable& e) {
    res = error(502, e.what());
  } catch (const InputTooLong& e) {
    res = error(400, e.what());
  } catch (const InvalidArgument& e) {
    res = error(400, e.what());
  } catch (const std::exception& e) {
    res = error(500, e.what());
  }
  add_cors(request, res);
  return res;
}

Response Service::correct(const json& body) {
  const std::string text = require_string(body, "text");
  const std::string engine_id = body.contains("engine_id") ? require_string(body, "engine_id") : "mock";
  if (utf8::trim(text).empty()) throw HttpError(400, "text is empty");
  const std::size_t tokens = utf8::count_whitespace_tokens(text);
  if (tokens > config_.service.max_input_tokens) throw InputTooLong(tokens, config_.service.max_input_tokens);
  const auto it = engines_.find(engine_id);
  if (it == engines_.end()) throw HttpError(404, "unknown engine '" + engine_id + "'");

  engine_slots_.acquire();
  struct Release {
    std::counting_semaphore<>& s;
    ~Release() { s.release(); }
  } release{engine_slots_};
  const engines::CorrectionRecord rec = it->second->correct(text);
  return ok({{"corrected", rec.hypothesis}, {"latency_ms", rec.latency_ms}, {"engine_id", engine_id}});
}

Response Service::evaluate(const json& body) {
  bool normalize = true;
  if (const auto it = body.find("normalize"); it != body.end()) {
    if (!it->is_boolean()) throw HttpError(400, "field 'normalize' must be a boolean");
    normalize = it->get<bool>();
  }

  std::vector<std::string> hyps;
  std::vector<std::string> refs;
  json snapshot = {{"normalize", normalize}};
  if (const auto it = body.find("pairs"); it != body.end()) {
    if (!it->is_array()) throw HttpError(400, "field 'pairs' must be an array");
    for (const auto& p : *it) {
      if (!p.is_object()) throw HttpError(400, "each pair must be an object");
      hyps.push_back(require_string(p, "hypothesis"));
      refs.push_back(require_string(p, "reference"));
    }
    snapshot["source"] = "inline";
  } else if (body.contains("hyp_file") || body.contains("ref_file")) {
    const std::string hyp_ref = require_string(body, "hyp_file");
    const std::string ref_ref = require_string(body, "ref_file");
    hyps = read_lines(data_file(config_.service.data_dir, hyp_ref));
    refs = read_lines(data_file(config_.service.data_dir, ref_ref));
    snapshot["source"] = "files";
    snapshot["hyp_file"] = hyp_ref;
    snapshot["ref_file"] = ref_ref;
  } else {
    throw HttpError(400, "provide 'pairs' or 'hyp_file' and 'ref_file'");
  }
  if (hyps.empty()) throw HttpError(400, "nothing to evaluate");
  if (hyps.size() != refs.size()) {
    throw HttpError(400, "hypotheses (" + std::to_string(hyps.size()) + ") and references (" +
                             std::to_string(refs.size()) + ") differ in length");
  }
  snapshot["count"] = hyps.size();

  const RunRecord run = runs_.create(RunKind::evaluation, snapshot);
  try {
    const json result = {{"bleu", metrics::to_json(metrics::corpus_bleu(hyps, refs, normalize))},
                         {"match", metrics::to_json(metrics::match_rate(hyps, refs, normalize))}};
    runs_.complete(run.run_id, result);
    json out = result;
    out["run_id"] = run.run_id;
    return ok(out);
  } catch (const std::exception& e) {
    runs_.fail(run.run_id, e.what());
    throw;
  }
}

Response Service::list_runs() {
  json arr = json::array();
  for (const auto& r : runs_.list()) arr.push_back(to_json(r));
  return ok(arr);
}

Response Service::get_run(const std::string& id) {
  const auto r = runs_.find(id);
  if (!r) throw HttpError(404, "unknown run '" + id + "'");
  return ok(to_json(*r));
}

Response Service::health() {
  json list = json::array();
  for (const auto& [id, engine] : engines_) {
    const auto& c = engine->config();
    const bool reachable = c.kind == engines::EngineKind::mock ||
                           engines::probe_endpoint(c.base_url, std::chrono::milliseconds(1000));
    list.push_back({{"engine_id", id}, {"kind", engines::to_string(c.kind)}, {"reachable", reachable}});
  }
  return ok({{"status", "ok"}, {"engines", list}});
}

// --- HttpServer ----------------------------------------------------------------

HttpServer::HttpServer(Service& service) : service_(service), server_(std::make_unique<httplib::Server>()) {
  install_routes();
}

HttpServer::~HttpServer() { stop(); }

void HttpServer::install_routes() {
  const auto bridge = [this](const httplib::Request& req, httplib::Response& res) {
    Request r{req.method, req.path, req.body, req.get_header_value("Origin")};
    const Response out = service_.handle(r);
    res.status = out.status;
    std::string content_type = "application/json; charset=utf-8";
    for (const auto& [k, v] : out.headers) {
      if (k == "Content-Type") content_type = v;
      else res.set_header(k, v);
    }
    if (out.status != 204) res.set_content(out.body, content_type);
  };
  server_->Get(".*", bridge);
  server_->Post(".*", bridge);
  server_->Options(".*", bridge);
  server_->Put(".*", bridge);
  server_->Delete(".*", bridge);
}

int HttpServer::start(const std::string& host, int port) {
  int bound = port;
  if (port == 0) {
    bound = server_->bind_to_any_port(host);
  } else if (!server_->bind_to_port(host, port)) {
    bound = -1;
  }
  if (bound <= 0) throw IoError("cannot bind " + host + ":" + std::to_string(port));
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
  return bound;
}

void HttpServer::run(const std::string& host, int port) {
  if (!server_->listen(host, port)) throw IoError("cannot listen on " + host + ":" + std::to_string(port));
}

void HttpServer::stop() {
  if (server_) server_->stop();
  if (thread_.joinable()) thread_.join();
}

}  // namespace hgec::service
