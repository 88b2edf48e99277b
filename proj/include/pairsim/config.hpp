#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <stdexcept>
#include <string>

namespace pairsim::cfg {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Flat key-value configuration: one `key = value` per line, `#` comments.
class RunConfig {
 public:
  static RunConfig parse_file(const std::string& path);
  static RunConfig parse_text(const std::string& text);

  bool has(const std::string& key) const { return values_.count(key) > 0; }
  double number(const std::string& key) const;
  double number(const std::string& key, double fallback) const;
  std::int64_t integer(const std::string& key) const;
  std::int64_t integer(const std::string& key, std::int64_t fallback) const;
  std::string text(const std::string& key) const;
  std::string text(const std::string& key, const std::string& fallback) const;

  // every key must be consumed by one of the accessors above; leftovers are
  // configuration errors
  void reject_unknown_keys() const;
  void require(const std::string& key) const;

  // FNV-1a over the canonicalized key=value lines
  std::uint64_t hash() const;

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
  mutable std::set<std::string> touched_;
};

}  // namespace pairsim::cfg
