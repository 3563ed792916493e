#pragma once

#include "gachaos/chaos_lab.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace gachaos {

inline constexpr const char* kArtifactVersion = "0.1.0";

/// Missing key, bad value or out-of-range parameter. The message names the
/// offending `section.key`.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A parsed and validated experiment file.
///
/// The dialect is INI: `[section]` headers, `key = value` lines, `#` or `;`
/// comments. Lists are comma separated. See README for the key table.
struct LoadedConfig {
  ExperimentConfig config;
  std::map<std::string, std::string> values;  // "section.key" -> value, defaults included
  std::vector<std::string> defaulted;         // keys filled from the default table
  std::string hash;                           // SHA-256 of the canonical key list
};

LoadedConfig parse_config(const std::filesystem::path& path);
LoadedConfig parse_config_text(const std::string& text);

/// SHA-256 over "key=value\n" lines in key order; independent of the order
/// keys appear in the file.
std::string config_hash(const std::map<std::string, std::string>& values);

std::string sha256_hex(const std::string& data);

nlohmann::json make_manifest(const LoadedConfig* config, std::uint64_t seed, const std::string& command,
                             const std::vector<std::filesystem::path>& files);

}  // namespace gachaos
