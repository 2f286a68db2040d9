#pragma once

// INI-style toolkit configuration:
//
//   [service]
//   host = 127.0.0.1
//   port = 8080
//   data_dir = data
//   cors_allow = chrome-extension://abcdef, http://localhost:3000
//   max_concurrency = 4
//
//   [engine.mock]
//   kind = mock
//
//   [engine.gpt]
//   kind = chat_llm
//   base_url = http://127.0.0.1:9000/v1/chat
//   credential_ref = OPENAI_API_KEY
//   prompt_mode = zero_shot
//
// Credentials are never read from the file; credential_ref names an
// environment variable.

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "hgec/engines.hpp"

namespace hgec {

struct ServiceSettings {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::filesystem::path data_dir = "data";
  std::vector<std::string> cors_allow;
  /// Global cap on concurrent engine calls across requests.
  std::size_t max_concurrency = 4;
  std::size_t max_input_tokens = 128;
};

struct ToolkitConfig {
  ServiceSettings service;
  std::vector<engines::EngineConfig> engines;

  /// Null when no engine has that id.
  const engines::EngineConfig* find_engine(std::string_view id) const;
};

/// Throws ConfigError on unknown keys, bad values or invalid engines.
ToolkitConfig parse_config(std::string_view text);
ToolkitConfig load_config(const std::filesystem::path& path);

/// A config with only the offline mock engine ("mock").
ToolkitConfig default_config();

}  // namespace hgec
