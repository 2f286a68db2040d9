#pragma once

// File-backed run registry. Each run is one JSONL file under <data_dir>/runs
// holding a creation event followed by at most one terminal status event;
// nothing already written is ever rewritten.

#include <cstdint>
#include <filesystem>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace hgec {

enum class RunKind { correction, evaluation, judgement };
enum class RunStatus { running, done, failed };

std::string_view to_string(RunKind k);
std::string_view to_string(RunStatus s);
RunKind parse_run_kind(std::string_view s);
RunStatus parse_run_status(std::string_view s);

struct RunRecord {
  std::string run_id;
  RunKind kind = RunKind::evaluation;
  std::string created_at;          ///< UTC, ISO 8601 with microseconds
  std::int64_t created_at_us = 0;  ///< same instant, microseconds since epoch
  nlohmann::json config_snapshot;
  RunStatus status = RunStatus::running;
  /// Attached by the terminal event: the run's output on success, or
  /// {"error": message} on failure.
  nlohmann::json result;
};

nlohmann::json to_json(const RunRecord& r);

class RunStore {
 public:
  explicit RunStore(std::filesystem::path data_dir);

  /// Creates a new run in status running. Ids are unique within the store.
  RunRecord create(RunKind kind, nlohmann::json config_snapshot);
  /// running -> done. Throws InvalidArgument for an unknown or finished run.
  RunRecord complete(const std::string& run_id, nlohmann::json result);
  /// running -> failed.
  RunRecord fail(const std::string& run_id, const std::string& message);

  std::optional<RunRecord> find(const std::string& run_id) const;
  /// Newest first.
  std::vector<RunRecord> list() const;

  const std::filesystem::path& directory() const noexcept { return dir_; }

 private:
  RunRecord finish(const std::string& run_id, RunStatus status, nlohmann::json result);
  std::filesystem::path file_for(const std::string& run_id) const;

  std::filesystem::path dir_;
  mutable std::mutex mutex_;
  std::uint64_t sequence_ = 0;
};

}  // namespace hgec
