#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace dtn {

// Raised for malformed configuration input; the CLI maps it to exit code 1.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Flat, typed key-value format with [section] headers. Lines are
// `key = value`; '#' starts a comment; values may be scalars or
// whitespace-separated lists.
class Config {
 public:
  static Config parse_file(const std::string& path);
  static Config parse_string(const std::string& text, const std::string& origin);

  bool has(const std::string& section, const std::string& key) const;
  bool has_section(const std::string& section) const;

  std::string get_string(const std::string& section, const std::string& key) const;
  std::string get_string(const std::string& section, const std::string& key,
                         const std::string& fallback) const;
  double get_double(const std::string& section, const std::string& key) const;
  double get_double(const std::string& section, const std::string& key,
                    double fallback) const;
  long long get_int(const std::string& section, const std::string& key) const;
  long long get_int(const std::string& section, const std::string& key,
                    long long fallback) const;
  bool get_bool(const std::string& section, const std::string& key,
                bool fallback) const;
  std::vector<double> get_doubles(const std::string& section,
                                  const std::string& key) const;

  // FNV-1a hash of the raw file bytes, for run manifests.
  uint64_t content_hash() const { return hash_; }

 private:
  std::map<std::string, std::map<std::string, std::string>> sections_;
  std::map<std::string, std::map<std::string, int>> lines_;  // diagnostics
  std::string origin_;
  uint64_t hash_ = 0;

  [[noreturn]] void fail(const std::string& section, const std::string& key,
                         const std::string& what) const;
};

}  // namespace dtn
