#include "hgec/run_store.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <random>

#include "append_log.hpp"
#include "hgec/error.hpp"

namespace hgec {

using json = nlohmann::json;

namespace {

std::string iso_utc(std::int64_t micros) {
  const std::time_t secs = static_cast<std::time_t>(micros / 1'000'000);
  std::tm tm{};
  gmtime_r(&secs, &tm);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02d.%06lldZ", tm.tm_year + 1900, tm.tm_mon + 1,
                tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec, static_cast<long long>(micros % 1'000'000));
  return buf;
}

bool valid_run_id(const std::string& id) {
  return !id.empty() && id.size() <= 128 && std::all_of(id.begin(), id.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '-' || c == '_';
  });
}

std::optional<RunRecord> load_run(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) return std::nullopt;
  std::optional<RunRecord> rec;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error&) {
      break;  // torn tail
    }
    const auto event = j.value("event", std::string{});
    if (event == "created") {
      RunRecord r;
      r.run_id = j.at("run_id").get<std::string>();
      r.kind = parse_run_kind(j.at("kind").get<std::string>());
      r.created_at = j.at("created_at").get<std::string>();
      r.created_at_us = j.at("created_at_us").get<std::int64_t>();
      r.config_snapshot = j.value("config_snapshot", json::object());
      rec = std::move(r);
    } else if (event == "status" && rec && rec->status == RunStatus::running) {
      rec->status = parse_run_status(j.at("status").get<std::string>());
      rec->result = j.value("result", json());
    }
  }
  return rec;
}

}  // namespace

std::string_view to_string(RunKind k) {
  switch (k) {
    case RunKind::correction: return "correction";
    case RunKind::evaluation: return "evaluation";
    case RunKind::judgement: return "judgement";
  }
  return "?";
}

std::string_view to_string(RunStatus s) {
  switch (s) {
    case RunStatus::running: return "running";
    case RunStatus::done: return "done";
    case RunStatus::failed: return "failed";
  }
  return "?";
}

RunKind parse_run_kind(std::string_view s) {
  if (s == "correction") return RunKind::correction;
  if (s == "evaluation") return RunKind::evaluation;
  if (s == "judgement") return RunKind::judgement;
  throw InvalidArgument("unknown run kind '" + std::string(s) + "'");
}

RunStatus parse_run_status(std::string_view s) {
  if (s == "running") return RunStatus::running;
  if (s == "done") return RunStatus::done;
  if (s == "failed") return RunStatus::failed;
  throw InvalidArgument("unknown run status '" + std::string(s) + "'");
}

json to_json(const RunRecord& r) {
  json j = {{"run_id", r.run_id},
            {"kind", to_string(r.kind)},
            {"created_at", r.created_at},
            {"config_snapshot", r.config_snapshot},
            {"status", to_string(r.status)}};
  if (!r.result.is_null()) j["result"] = r.result;
  return j;
}

RunStore::RunStore(std::filesystem::path data_dir) : dir_(std::move(data_dir) / "runs") {
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  if (ec) throw IoError("cannot create run directory " + dir_.string() + ": " + ec.message());
}

std::filesystem::path RunStore::file_for(const std::string& run_id) const { return dir_ / (run_id + ".jsonl"); }

RunRecord RunStore::create(RunKind kind, json config_snapshot) {
  const std::lock_guard lock(mutex_);
  static thread_local std::mt19937_64 rng{std::random_device{}()};
  const auto now = std::chrono::duration_cast<std::chrono::microseconds>(
                       std::chrono::system_clock::now().time_since_epoch())
                       .count();
  RunRecord r;
  r.kind = kind;
  r.created_at_us = now;
  r.created_at = iso_utc(now);
  r.config_snapshot = std::move(config_snapshot);
  do {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s-%lld-%04llx", std::string(to_string(kind)).c_str(),
                  static_cast<long long>(now), static_cast<unsigned long long>((rng() ^ ++sequence_) & 0xFFFF));
    r.run_id = buf;
  } while (std::filesystem::exists(file_for(r.run_id)));

  std::ofstream out(file_for(r.run_id), std::ios::binary | std::ios::app);
  if (!out) throw IoError("cannot create run file for " + r.run_id);
  json ev = {{"event", "created"},
             {"run_id", r.run_id},
             {"kind", to_string(kind)},
             {"created_at", r.created_at},
             {"created_at_us", r.created_at_us},
             {"config_snapshot", r.config_snapshot},
             {"status", "running"}};
  out << ev.dump(-1, ' ', false, json::error_handler_t::replace) << '\n';
  return r;
}

RunRecord RunStore::finish(const std::string& run_id, RunStatus status, json result) {
  const std::lock_guard lock(mutex_);
  if (!valid_run_id(run_id)) throw InvalidArgument("unknown run '" + run_id + "'");
  auto rec = load_run(file_for(run_id));
  if (!rec) throw InvalidArgument("unknown run '" + run_id + "'");
  if (rec->status != RunStatus::running) {
    throw InvalidArgument("run '" + run_id + "' already " + std::string(to_string(rec->status)));
  }
  auto out = detail::open_append_log(file_for(run_id));
  const json ev = {{"event", "status"}, {"status", to_string(status)}, {"result", result}};
  out << ev.dump(-1, ' ', false, json::error_handler_t::replace) << '\n';
  rec->status = status;
  rec->result = std::move(result);
  return *rec;
}

RunRecord RunStore::complete(const std::string& run_id, json result) {
  return finish(run_id, RunStatus::done, std::move(result));
}

RunRecord RunStore::fail(const std::string& run_id, const std::string& message) {
  return finish(run_id, RunStatus::failed, json{{"error", message}});
}

std::optional<RunRecord> RunStore::find(const std::string& run_id) const {
  if (!valid_run_id(run_id)) return std::nullopt;
  const std::lock_guard lock(mutex_);
  return load_run(file_for(run_id));
}

std::vector<RunRecord> RunStore::list() const {
  const std::lock_guard lock(mutex_);
  std::vector<RunRecord> out;
  for (const auto& entry : std::filesystem::directory_iterator(dir_)) {
    if (entry.path().extension() != ".jsonl") continue;
    if (auto r = load_run(entry.path())) out.push_back(std::move(*r));
  }
  std::sort(out.begin(), out.end(), [](const RunRecord& a, const RunRecord& b) {
    if (a.created_at_us != b.created_at_us) return a.created_at_us > b.created_at_us;
    return a.run_id > b.run_id;
  });
  return out;
}

}  // namespace hgec
