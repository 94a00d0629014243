#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace lgt {

// Line-oriented "key = value" configuration text. '#' starts a comment,
// blank lines are skipped, later assignments override earlier ones. Typed
// getters mark keys as consumed so a schema can reject leftovers.
class Config {
 public:
  Config() = default;

  static Config parse(const std::string& text);
  static Config parse_file(const std::string& path);

  void set(const std::string& key, const std::string& value);
  bool has(const std::string& key) const;

  // Absent keys throw config_error; the *_or forms return the fallback.
  std::string get_string(const std::string& key) const;
  std::string get_string_or(const std::string& key,
                            const std::string& fallback) const;
  double get_double(const std::string& key) const;
  double get_double_or(const std::string& key, double fallback) const;
  long long get_int(const std::string& key) const;
  long long get_int_or(const std::string& key, long long fallback) const;
  std::uint64_t get_seed_or(const std::string& key,
                            std::uint64_t fallback) const;
  // Comma- or whitespace-separated list of numbers.
  std::vector<double> get_doubles(const std::string& key) const;

  // Keys never touched by any getter; a valid schema consumes everything.
  std::vector<std::string> unconsumed() const;

 private:
  std::map<std::string, std::string> kv_;
  mutable std::set<std::string> used_;
};

}  // namespace lgt
