#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>

namespace trendcnn {

// `key = value` lines; `#` starts a comment, blank lines are ignored.
// Duplicate keys and lines without `=` are errors.
class KeyValueConfig {
 public:
  KeyValueConfig() = default;
  explicit KeyValueConfig(std::map<std::string, std::string> values) : values_(std::move(values)) {}

  static KeyValueConfig parse(std::istream& in);
  static KeyValueConfig parse(const std::string& text);
  static KeyValueConfig load(const std::string& path);

  bool has(const std::string& key) const { return values_.count(key) > 0; }
  void set(const std::string& key, std::string value) { values_[key] = std::move(value); }
  const std::map<std::string, std::string>& values() const noexcept { return values_; }

  std::optional<std::string> text(const std::string& key) const;
  std::optional<double> real(const std::string& key) const;
  std::optional<std::uint64_t> integer(const std::string& key) const;
  std::optional<bool> flag(const std::string& key) const;

  // Throws ValidationError naming the first key not in `allowed`.
  void require_known(const std::set<std::string>& allowed) const;

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace trendcnn
