#include "pairsim/config.hpp"

#include <fstream>
#include <sstream>

namespace pairsim::cfg {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

}  // namespace

RunConfig RunConfig::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_text(ss.str());
}

RunConfig RunConfig::parse_text(const std::string& text) {
  RunConfig cfg;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty key");
    if (cfg.values_.count(key))
      throw ConfigError("duplicate key: " + key);
    cfg.values_[key] = value;
  }
  return cfg;
}

double RunConfig::number(const std::string& key) const {
  require(key);
  touched_.insert(key);
  try {
    return std::stod(values_.at(key));
  } catch (const std::exception&) {
    throw ConfigError("key " + key + ": not a number: " + values_.at(key));
  }
}

double RunConfig::number(const std::string& key, double fallback) const {
  if (!has(key)) return fallback;
  return number(key);
}

std::int64_t RunConfig::integer(const std::string& key) const {
  require(key);
  touched_.insert(key);
  try {
    // scientific notation is accepted for integer keys too
    const double v = std::stod(values_.at(key));
    return static_cast<std::int64_t>(v);
  } catch (const std::exception&) {
    throw ConfigError("key " + key + ": not an integer: " + values_.at(key));
  }
}

std::int64_t RunConfig::integer(const std::string& key, std::int64_t fallback) const {
  if (!has(key)) return fallback;
  return integer(key);
}

std::string RunConfig::text(const std::string& key) const {
  require(key);
  touched_.insert(key);
  return values_.at(key);
}

std::string RunConfig::text(const std::string& key, const std::string& fallback) const {
  if (!has(key)) return fallback;
  return text(key);
}

void RunConfig::require(const std::string& key) const {
  if (!has(key)) throw ConfigError("missing required key: " + key);
}

void RunConfig::reject_unknown_keys() const {
  for (const auto& [key, value] : values_) {
    (void)value;
    if (!touched_.count(key)) throw ConfigError("unknown key: " + key);
  }
}

std::uint64_t RunConfig::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ull;
  auto mix = [&](char c) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ull;
  };
  for (const auto& [key, value] : values_) {
    for (char c : key) mix(c);
    mix('=');
    for (char c : value) mix(c);
    mix('\n');
  }
  return h;
}

}  // namespace pairsim::cfg
