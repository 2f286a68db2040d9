#include <httplib.h>

#include <chrono>

#include "hgec/engines.hpp"

namespace hgec::engines {

namespace {

struct Url {
  std::string origin;  // scheme://host:port
  std::string path;
};

Url split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw ConfigError("invalid endpoint URL '" + url + "'");
  if (url.compare(0, scheme_end, "http") != 0) {
    throw ConfigError("unsupported URL scheme in '" + url + "' (only http is built in)");
  }
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

class HttplibTransport final : public HttpTransport {
 public:
  HttpResponse post_json(const std::string& url, const std::string& body,
                         const std::vector<std::pair<std::string, std::string>>& headers,
                         std::chrono::milliseconds timeout) override {
    const Url target = split_url(url);
    httplib::Client client(target.origin);
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout);
    const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(timeout - secs);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    client.set_write_timeout(secs.count(), usecs.count());

    httplib::Headers h;
    for (const auto& [k, v] : headers) h.emplace(k, v);

    const auto start = std::chrono::steady_clock::now();
    auto res = client.Post(target.path, h, body, "application/json");
    if (!res) {
      const auto elapsed = std::chrono::steady_clock::now() - start;
      const auto err = res.error();
      const bool timed_out = err == httplib::Error::ConnectionTimeout ||
                             (err == httplib::Error::Read && elapsed >= timeout);
      throw TransportError("POST " + url + " failed: " + httplib::to_string(err), timed_out);
    }
    if (res->status == 429 || res->status >= 500) {
      throw TransportError("POST " + url + " returned HTTP " + std::to_string(res->status), false);
    }
    return {res->status, res->body};
  }
};

}  // namespace

std::shared_ptr<HttpTransport> make_http_transport() { return std::make_shared<HttplibTransport>(); }

bool probe_endpoint(const std::string& url, std::chrono::milliseconds timeout) {
  Url target;
  try {
    target = split_url(url);
  } catch (const ConfigError&) {
    return false;
  }
  httplib::Client client(target.origin);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(timeout - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  return static_cast<bool>(client.Head(target.path));
}

}  // namespace hgec::engines
