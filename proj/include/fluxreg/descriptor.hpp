#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace fluxreg {

/// A `name:key=value,key=value` string, e.g. `powerlaw:p=3.0` or
/// `disk:r=1.0,h=0.015625`.
struct Descriptor {
  std::string name;
  std::map<std::string, std::string> params;

  double number(const std::string& key) const;
  double number_or(const std::string& key, double fallback) const;
  bool has(const std::string& key) const { return params.contains(key); }
  /// Throws ConfigError naming the first key outside `allowed`.
  void require_only(std::initializer_list<std::string_view> allowed) const;
  /// `name:key=value,...` with keys in sorted order.
  std::string str() const;
};

Descriptor parse_descriptor(std::string_view text);

double parse_number(std::string_view text);
std::vector<double> parse_number_list(std::string_view text);
std::string trim(std::string_view text);
/// Shortest decimal that round-trips to v.
std::string format_number(double v);

}  // namespace fluxreg
