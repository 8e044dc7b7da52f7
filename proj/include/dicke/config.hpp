#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace dicke::config {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Flat key = value file, '#' comments, bare or quoted strings.  Readers mark
// keys as consumed; require_all_consumed() rejects anything left over, so a
// misspelled key fails loudly instead of silently using a default.
class Config {
 public:
  static Config parse(std::string_view text, const std::string& origin = "<string>");
  static Config load(const std::string& path);

  bool has(const std::string& key) const;

  double get_double(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  long long get_int(const std::string& key, long long fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::string get_string(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;

  // Overrides from the command line ("key=value").
  void set(const std::string& key, const std::string& value);

  void require_all_consumed() const;
  std::vector<std::pair<std::string, std::string>> entries() const;

 private:
  const std::string& raw(const std::string& key) const;
  std::string origin_;
  std::map<std::string, std::string> values_;
  mutable std::map<std::string, bool> consumed_;
};

}  // namespace dicke::config
