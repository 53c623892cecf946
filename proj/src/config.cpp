#include "rlvm/config.hpp"

#include <sstream>

#include "rlvm/error.hpp"
#include "rlvm/util.hpp"

namespace rlvm {

Config Config::from_file(const std::filesystem::path& path) {
  return from_string(read_file(path));
}

Config Config::from_string(const std::string& text) {
  Config cfg;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view s = trim(line);
    if (s.empty() || s.front() == '#') continue;
    std::size_t eq = s.find('=');
    if (eq == std::string_view::npos)
      throw Error(ErrorKind::kUsage,
                  "config line " + std::to_string(lineno) + ": expected key = value");
    std::string key(trim(s.substr(0, eq)));
    std::string value(trim(s.substr(eq + 1)));
    if (key.empty())
      throw Error(ErrorKind::kUsage, "config line " + std::to_string(lineno) + ": empty key");
    cfg.values_[key] = value;
  }
  return cfg;
}

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
  auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

double Config::get_double(const std::string& key, double fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  auto v = parse_double(it->second);
  if (!v) throw Error(ErrorKind::kUsage, "config key '" + key + "': not a number: " + it->second);
  return *v;
}

long long Config::get_int(const std::string& key, long long fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  auto v = parse_int(it->second);
  if (!v) throw Error(ErrorKind::kUsage, "config key '" + key + "': not an integer: " + it->second);
  return *v;
}

bool Config::get_bool(const std::string& key, bool fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  const std::string& v = it->second;
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw Error(ErrorKind::kUsage, "config key '" + key + "': not a boolean: " + v);
}

}  // namespace rlvm
