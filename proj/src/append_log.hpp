#pragma once

#include <filesystem>
#include <fstream>
#include <string>

#include "hgec/error.hpp"

namespace hgec::detail {

/// Opens a JSONL log for appending. A torn final line left by an interrupted
/// writer is cut off first so new records start on a fresh line.
inline std::ofstream open_append_log(const std::filesystem::path& path) {
  std::error_code ec;
  const auto size = std::filesystem::file_size(path, ec);
  if (!ec && size > 0) {
    std::ifstream in(path, std::ios::binary);
    std::string content(size, '\0');
    in.read(content.data(), static_cast<std::streamsize>(size));
    in.close();
    if (content.back() != '\n') {
      const auto last_nl = content.rfind('\n');
      std::filesystem::resize_file(path, last_nl == std::string::npos ? 0 : last_nl + 1, ec);
      if (ec) throw IoError("cannot repair " + path.string() + ": " + ec.message());
    }
  }
  std::ofstream out(path, std::ios::binary | std::ios::app);
  if (!out) throw IoError("cannot append to " + path.string());
  return out;
}

}  // namespace hgec::detail
