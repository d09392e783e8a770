#include "trendcnn/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "trendcnn/error.hpp"

namespace trendcnn {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

KeyValueConfig KeyValueConfig::parse(std::istream& in) {
  KeyValueConfig cfg;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError("expected key = value", line_no);
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ParseError("empty key", line_no);
    if (!cfg.values_.emplace(key, value).second) throw ParseError("duplicate key '" + key + "'", line_no);
  }
  return cfg;
}

KeyValueConfig KeyValueConfig::parse(const std::string& text) {
  std::istringstream in(text);
  return parse(in);
}

KeyValueConfig KeyValueConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("io", "cannot open " + path);
  try {
    return parse(in);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

std::optional<std::string> KeyValueConfig::text(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

std::optional<double> KeyValueConfig::real(const std::string& key) const {
  const auto v = text(key);
  if (!v) return std::nullopt;
  double out = 0.0;
  const auto [p, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
  if (ec != std::errc() || p != v->data() + v->size()) throw ValidationError("'" + key + "' is not a number: " + *v);
  return out;
}

std::optional<std::uint64_t> KeyValueConfig::integer(const std::string& key) const {
  const auto v = text(key);
  if (!v) return std::nullopt;
  std::uint64_t out = 0;
  const auto [p, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
  if (ec != std::errc() || p != v->data() + v->size()) {
    throw ValidationError("'" + key + "' is not a non-negative integer: " + *v);
  }
  return out;
}

std::optional<bool> KeyValueConfig::flag(const std::string& key) const {
  const auto v = text(key);
  if (!v) return std::nullopt;
  if (*v == "true" || *v == "1" || *v == "yes") return true;
  if (*v == "false" || *v == "0" || *v == "no") return false;
  throw ValidationError("'" + key + "' is not a boolean: " + *v);
}

void KeyValueConfig::require_known(const std::set<std::string>& allowed) const {
  for (const auto& [k, v] : values_) {
    if (!allowed.count(k)) throw ValidationError("unknown config key '" + k + "'");
  }
}

}  // namespace trendcnn
