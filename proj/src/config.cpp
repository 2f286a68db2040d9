#include "hgec/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <fstream>
#include <sstream>

namespace hgec {

namespace pt = boost::property_tree;

namespace {

constexpr std::string_view kEnginePrefix = "engine.";

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t") - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

template <typename T>
T number(const std::string& section, const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(value, &used);
    if (used != value.size() || v < 0) throw std::invalid_argument("negative or trailing");
    return static_cast<T>(v);
  } catch (const std::exception&) {
    throw ConfigError("[" + section + "] " + key + ": expected a non-negative integer, got '" + value + "'");
  }
}

engines::EngineConfig parse_engine(const std::string& section, const pt::ptree& tree) {
  engines::EngineConfig c;
  c.engine_id = section.substr(kEnginePrefix.size());
  for (const auto& [key, node] : tree) {
    const std::string value = trim(node.data());
    if (key == "kind") c.kind = engines::parse_engine_kind(value);
    else if (key == "base_url") c.base_url = value;
    else if (key == "credential_ref") c.credential_ref = value;
    else if (key == "prompt_mode") c.prompt_mode = engines::parse_prompt_mode(value);
    else if (key == "timeout_ms") c.timeout = std::chrono::milliseconds(number<long long>(section, key, value));
    else if (key == "max_retries") c.max_retries = number<int>(section, key, value);
    else if (key == "initial_backoff_ms") c.initial_backoff = std::chrono::milliseconds(number<long long>(section, key, value));
    else if (key == "max_input_tokens") c.max_input_tokens = number<std::size_t>(section, key, value);
    else if (key == "model") c.model = value;
    else if (key == "guideline_path") c.guideline_path = value;
    else if (key == "mock_table_path") c.mock_table_path = value;
    else if (key == "api_key" || key == "token" || key == "credential") {
      throw ConfigError("[" + section + "] " + key + ": credentials must come from the environment; use credential_ref");
    } else {
      throw ConfigError("[" + section + "] unknown key '" + key + "'");
    }
  }
  c.validate();
  return c;
}

}  // namespace

const engines::EngineConfig* ToolkitConfig::find_engine(std::string_view id) const {
  for (const auto& e : engines) {
    if (e.engine_id == id) return &e;
  }
  return nullptr;
}

ToolkitConfig parse_config(std::string_view text) {
  pt::ptree tree;
  try {
    std::istringstream in{std::string(text)};
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }

  ToolkitConfig cfg;
  for (const auto& [section, node] : tree) {
    if (section == "service") {
      for (const auto& [key, value_node] : node) {
        const std::string value = trim(value_node.data());
        if (key == "host") cfg.service.host = value;
        else if (key == "port") cfg.service.port = number<int>(section, key, value);
        else if (key == "data_dir") cfg.service.data_dir = value;
        else if (key == "cors_allow") cfg.service.cors_allow = split_list(value);
        else if (key == "max_concurrency") cfg.service.max_concurrency = number<std::size_t>(section, key, value);
        else if (key == "max_input_tokens") cfg.service.max_input_tokens = number<std::size_t>(section, key, value);
        else throw ConfigError("[service] unknown key '" + key + "'");
      }
    } else if (section.starts_with(kEnginePrefix) && section.size() > kEnginePrefix.size()) {
      if (cfg.find_engine(section.substr(kEnginePrefix.size())) != nullptr) {
        throw ConfigError("duplicate engine section [" + section + "]");
      }
      cfg.engines.push_back(parse_engine(section, node));
    } else {
      throw ConfigError("unknown config section [" + section + "]");
    }
  }
  if (cfg.service.max_concurrency == 0) throw ConfigError("[service] max_concurrency must be positive");
  return cfg;
}

ToolkitConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

ToolkitConfig default_config() {
  ToolkitConfig cfg;
  engines::EngineConfig mock;
  mock.engine_id = "mock";
  mock.kind = engines::EngineKind::mock;
  cfg.engines.push_back(std::move(mock));
  return cfg;
}

}  // namespace hgec
