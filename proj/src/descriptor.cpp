#include "fluxreg/descriptor.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include "fluxreg/error.hpp"

namespace fluxreg {

std::string trim(std::string_view text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = text.find_last_not_of(" \t\r\n");
  return std::string(text.substr(first, last - first + 1));
}

double parse_number(std::string_view text) {
  const std::string t = trim(text);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (t.empty() || ec != std::errc{} || ptr != t.data() + t.size() || !std::isfinite(value))
    throw Error(ErrorCode::ConfigError, "not a number: '" + t + "'");
  return value;
}

std::vector<double> parse_number_list(std::string_view text) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const auto piece = text.substr(start, comma == std::string_view::npos ? text.npos : comma - start);
    out.push_back(parse_number(piece));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

Descriptor parse_descriptor(std::string_view text) {
  Descriptor d;
  const std::string t = trim(text);
  const auto colon = t.find(':');
  d.name = trim(t.substr(0, colon));
  if (d.name.empty()) throw Error(ErrorCode::ConfigError, "empty descriptor '" + t + "'");
  if (colon == std::string::npos) return d;
  std::string_view rest(t);
  rest.remove_prefix(colon + 1);
  std::size_t start = 0;
  while (start < rest.size()) {
    auto comma = rest.find(',', start);
    if (comma == std::string_view::npos) comma = rest.size();
    const auto item = rest.substr(start, comma - start);
    const auto eq = item.find('=');
    if (eq == std::string_view::npos)
      throw Error(ErrorCode::ConfigError, "expected key=value in '" + std::string(item) + "'");
    d.params[trim(item.substr(0, eq))] = trim(item.substr(eq + 1));
    start = comma + 1;
  }
  return d;
}

double Descriptor::number(const std::string& key) const {
  const auto it = params.find(key);
  if (it == params.end())
    throw Error(ErrorCode::ConfigError, "'" + name + "' is missing parameter '" + key + "'");
  return parse_number(it->second);
}

double Descriptor::number_or(const std::string& key, double fallback) const {
  return has(key) ? number(key) : fallback;
}

void Descriptor::require_only(std::initializer_list<std::string_view> allowed) const {
  for (const auto& [key, value] : params) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      throw Error(ErrorCode::ConfigError, "'" + name + "' does not take parameter '" + key + "'");
  }
}

std::string Descriptor::str() const {
  std::string out = name + ":";
  bool first = true;
  for (const auto& [k, v] : params) {
    if (!first) out += ",";
    out += k + "=" + v;
    first = false;
  }
  return out;
}

std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace fluxreg
