#ifndef REDLINE_KVCONFIG_HPP_
#define REDLINE_KVCONFIG_HPP_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace redline {

// Minimal `key = value` config file: one pair per line, '#' starts a comment,
// blank lines ignored. Keys are case-sensitive. Lists are comma-separated.
class KvConfig {
 public:
  static KvConfig from_file(const std::string& path);   // throws IoError
  static KvConfig from_text(const std::string& text);   // throws ConfigError

  bool has(const std::string& key) const;

  std::string get_string(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  std::int64_t get_int(const std::string& key) const;
  std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
  std::uint64_t get_uint(const std::string& key, std::uint64_t fallback) const;
  double get_double(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  std::vector<std::string> get_list(const std::string& key) const;
  std::vector<std::int64_t> get_int_list(const std::string& key) const;

  // Throws ConfigError naming every key outside `known`; catches typos.
  void require_known(const std::vector<std::string>& known) const;

  const std::map<std::string, std::string>& entries() const { return entries_; }

 private:
  std::map<std::string, std::string> entries_;
};

}  // namespace redline

#endif  // REDLINE_KVCONFIG_HPP_
