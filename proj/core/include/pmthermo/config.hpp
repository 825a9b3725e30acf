#pragma once

#include <map>
#include <set>
#include <string>
#include <variant>
#include <vector>

namespace pmthermo {

/// Flat sectioned key = value documents: `[section]` headers, `#` comments,
/// numbers, booleans, double-quoted strings, and one-line arrays of numbers
/// or strings. Every lookup marks its key as consumed so that leftover
/// (unknown) keys can be rejected.
class ConfigDocument {
 public:
  using Value = std::variant<double, bool, std::string, std::vector<double>, std::vector<std::string>>;

  static ConfigDocument parse(const std::string& text, const std::string& source = "<string>");
  static ConfigDocument load(const std::string& path);

  bool has(const std::string& section, const std::string& key) const;
  bool has_section(const std::string& section) const;

  double number(const std::string& section, const std::string& key) const;
  double number(const std::string& section, const std::string& key, double fallback) const;
  int integer(const std::string& section, const std::string& key) const;
  int integer(const std::string& section, const std::string& key, int fallback) const;
  bool boolean(const std::string& section, const std::string& key, bool fallback) const;
  std::string string(const std::string& section, const std::string& key) const;
  std::string string(const std::string& section, const std::string& key, const std::string& fallback) const;
  std::vector<double> numbers(const std::string& section, const std::string& key) const;
  std::vector<double> numbers(const std::string& section, const std::string& key,
                              const std::vector<double>& fallback) const;
  std::vector<int> integers(const std::string& section, const std::string& key) const;

  /// Throws ConfigError naming the first key never looked up.
  void reject_unused() const;

  const std::string& source() const { return source_; }

 private:
  const Value& get(const std::string& section, const std::string& key) const;
  std::string where(const std::string& section, const std::string& key) const;

  std::string source_;
  std::map<std::string, std::map<std::string, Value>> data_;
  std::map<std::string, std::map<std::string, int>> lines_;
  mutable std::set<std::pair<std::string, std::string>> used_;
  mutable std::set<std::string> seen_sections_;
};

}  // namespace pmthermo
