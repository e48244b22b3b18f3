#pragma once

#include <map>
#include <string>
#include <vector>

#include "simcal/common.hpp"

namespace simcal {

// Flat `key = value` configuration, keys namespaced per module
// (gains.k_p, params.tau_max, cmaes.population, ...). Lines starting with
// '#' are comments. Values keep their textual form until queried.
class Config {
 public:
  Config() = default;

  static Config from_file(const std::string& path);
  static Config from_string(const std::string& text);

  bool has(const std::string& key) const { return values_.count(key) > 0; }

  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  void set(const std::string& key, double value);
  void set(const std::string& key, int value);

  std::string get_string(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key) const;
  int get_int(const std::string& key, int fallback) const;
  // Comma-separated list of reals.
  std::vector<double> get_doubles(const std::string& key) const;

  // Keys under `prefix.`, with the prefix stripped.
  std::vector<std::string> keys_with_prefix(const std::string& prefix) const;

  // Merge: values in `other` win.
  void merge(const Config& other);

  std::string to_string() const;
  void write_file(const std::string& path) const;

 private:
  std::map<std::string, std::string> values_;
};

// Full-precision double formatting used everywhere a real is written to
// disk; round-trips bit-exactly through strtod.
std::string format_double(double v);

}  // namespace simcal
