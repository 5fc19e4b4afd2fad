#include "fluxreg/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "fluxreg/descriptor.hpp"
#include "fluxreg/error.hpp"
#include "fluxreg/expression.hpp"

namespace fluxreg {

namespace {

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  const std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

}  // namespace

std::vector<double> parse_epsilon(const std::string& text) {
  const std::vector<double> values = parse_number_list(text);
  if (values.empty()) throw Error(ErrorCode::ConfigError, "epsilon needs a value");
  if (values.size() == 1) {
    const double e = values.front();
    if (e == 0.0) return {};
    if (!(e > 0.0 && e < 1.0)) throw Error(ErrorCode::ConfigError, "epsilon must be 0 or in (0, 1)");
    std::vector<double> schedule;
    for (int k = 1; std::pow(10.0, -k) >= e * (1.0 - 1e-9); ++k) schedule.push_back(std::pow(10.0, -k));
    if (schedule.empty() || std::abs(schedule.back() - e) > 1e-9 * e) schedule.push_back(e);
    return schedule;
  }
  SolveOptions check;
  check.epsilon_schedule = values;
  try {
    check.validate();
  } catch (const Error& err) {
    throw Error(ErrorCode::ConfigError, err.what());
  }
  return values;
}

std::string with_spacing(const std::string& domain, double h) {
  Descriptor d = parse_descriptor(domain);
  d.params["h"] = format_number(h);
  return d.str();
}

RunConfig parse_config_text(const std::string& text, const std::filesystem::path& base_dir) {
  RunConfig config;
  config.base_dir = base_dir;
  std::set<std::string> seen;
  std::istringstream in(text);
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorCode::ConfigError, "line " + std::to_string(number) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (!seen.insert(key).second) throw Error(ErrorCode::ConfigError, "duplicate key '" + key + "'");
    if (value.empty()) throw Error(ErrorCode::ConfigError, "empty value for '" + key + "'");
    if (key == "structure") {
      config.structure = value;
    } else if (key == "epsilon") {
      config.epsilon = parse_epsilon(value);
    } else if (key == "domain") {
      config.domain = value;
    } else if (key == "bc") {
      config.bc = parse_boundary_condition(value);
    } else if (key == "rhs") {
      config.rhs = value;
    } else if (key == "out") {
      config.out = resolve(base_dir, value);
    } else if (key == "seed") {
      const double s = parse_number(value);
      if (!(s >= 0.0) || s != std::floor(s) || s > 9.007199254740992e15)
        throw Error(ErrorCode::ConfigError, "seed must be a non-negative integer");
      config.seed = static_cast<std::uint64_t>(s);
    } else {
      throw Error(ErrorCode::ConfigError, "unknown key '" + key + "'");
    }
  }
  // Validate eagerly so that a bad config fails before any work starts.
  try {
    parse_structure(config.structure);
    const Descriptor d = parse_descriptor(config.domain);
    if (d.name == "mask" && d.has("file") && !std::filesystem::exists(resolve(base_dir, d.params.at("file"))))
      throw Error(ErrorCode::ConfigError, "mask file not found: " + d.params.at("file"));
    config_domain(config);
    if (config.rhs.rfind("expr:", 0) == 0) {
      Expression::parse(config.rhs.substr(5));
    } else if (config.rhs.rfind("file:", 0) == 0) {
      if (!std::filesystem::exists(resolve(base_dir, config.rhs.substr(5))))
        throw Error(ErrorCode::ConfigError, "rhs file not found: " + config.rhs.substr(5));
    } else {
      throw Error(ErrorCode::ConfigError, "rhs must start with expr: or file:");
    }
  } catch (const Error& err) {
    if (err.code() == ErrorCode::ConfigError) throw;
    throw Error(ErrorCode::ConfigError, err.what());
  }
  return config;
}

RunConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ConfigError, "cannot open config " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config_text(text.str(), path.has_parent_path() ? path.parent_path() : std::filesystem::path("."));
}

StructureFunction config_structure(const RunConfig& config) { return parse_structure(config.structure); }

DomainPtr config_domain(const RunConfig& config) {
  Descriptor d = parse_descriptor(config.domain);
  if (d.name == "mask" && d.has("file")) {
    d.params["file"] = resolve(config.base_dir, d.params.at("file")).string();
    return GridDomain::parse(d.str());
  }
  return GridDomain::parse(config.domain);
}

ScalarField config_rhs(const RunConfig& config, const DomainPtr& domain) {
  if (config.rhs.rfind("expr:", 0) == 0) {
    const Expression e = Expression::parse(config.rhs.substr(5));
    return ScalarField::from_function(domain, [&e](double x, double y) { return e(x, y); });
  }
  return read_scalar_csv(domain, resolve(config.base_dir, config.rhs.substr(5)).string());
}

SolveOptions config_solve_options(const RunConfig& config) {
  SolveOptions options;
  options.epsilon_schedule = config.epsilon;
  return options;
}

}  // namespace fluxreg
