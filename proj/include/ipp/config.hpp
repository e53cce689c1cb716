#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace ipp {

/// Flat `key = value` document (a TOML subset): strings in double quotes, numbers, booleans and
/// single-line arrays. Section headers `[name]` prefix keys as `name.key`. `#` starts a comment.
class KeyValueConfig {
 public:
  static KeyValueConfig parse(const std::string& text);
  static KeyValueConfig load(const std::filesystem::path& path);

  bool has(const std::string& key) const { return values_.contains(key); }
  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  long get_int(const std::string& key, long fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<std::string> get_list(const std::string& key, const std::vector<std::string>& fallback) const;
  std::vector<double> get_doubles(const std::string& key, const std::vector<double>& fallback) const;

  void set(const std::string& key, const std::string& raw_value) { values_[key] = raw_value; }
  const std::map<std::string, std::string>& raw() const { return values_; }

 private:
  std::map<std::string, std::string> values_;  // raw value text
};

}  // namespace ipp
