#include "c2gan/config.hpp"

#include <charconv>
#include <fstream>
#include <istream>

#include "c2gan/error.hpp"

namespace c2gan {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <typename T>
T parse_number(const ConfigMap& cfg, const std::string& key, T fallback) {
  auto it = cfg.find(key);
  if (it == cfg.end()) return fallback;
  const std::string& text = it->second;
  T value{};
  auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size())
    throw ConfigError("config key '" + key + "': cannot parse '" + text + "'");
  return value;
}

}  // namespace

ConfigMap parse_config(std::istream& in) {
  ConfigMap cfg;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string body = trim(line);
    if (body.empty() || body.front() == '#') continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) throw ParseError("expected key=value", line_no);
    std::string key = trim(body.substr(0, eq));
    if (key.empty()) throw ParseError("empty key", line_no);
    cfg[key] = trim(body.substr(eq + 1));
  }
  return cfg;
}

ConfigMap load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  return parse_config(in);
}

double config_double(const ConfigMap& cfg, const std::string& key, double fallback) {
  return parse_number<double>(cfg, key, fallback);
}

std::size_t config_size(const ConfigMap& cfg, const std::string& key, std::size_t fallback) {
  return parse_number<std::size_t>(cfg, key, fallback);
}

std::uint64_t config_u64(const ConfigMap& cfg, const std::string& key, std::uint64_t fallback) {
  return parse_number<std::uint64_t>(cfg, key, fallback);
}

bool config_bool(const ConfigMap& cfg, const std::string& key, bool fallback) {
  auto it = cfg.find(key);
  if (it == cfg.end()) return fallback;
  if (it->second == "1" || it->second == "true" || it->second == "yes") return true;
  if (it->second == "0" || it->second == "false" || it->second == "no") return false;
  throw ConfigError("config key '" + key + "': expected a boolean, got '" + it->second + "'");
}

std::string config_string(const ConfigMap& cfg, const std::string& key,
                          const std::string& fallback) {
  auto it = cfg.find(key);
  return it == cfg.end() ? fallback : it->second;
}

}  // namespace c2gan
