#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>

namespace c2gan {

using ConfigMap = std::map<std::string, std::string>;

/// Flat `key=value` text. Blank lines and lines starting with '#' are
/// ignored; whitespace around keys and values is trimmed.
ConfigMap parse_config(std::istream& in);
ConfigMap load_config(const std::string& path);

double config_double(const ConfigMap& cfg, const std::string& key, double fallback);
std::size_t config_size(const ConfigMap& cfg, const std::string& key, std::size_t fallback);
std::uint64_t config_u64(const ConfigMap& cfg, const std::string& key, std::uint64_t fallback);
bool config_bool(const ConfigMap& cfg, const std::string& key, bool fallback);
std::string config_string(const ConfigMap& cfg, const std::string& key, const std::string& fallback);

}  // namespace c2gan
