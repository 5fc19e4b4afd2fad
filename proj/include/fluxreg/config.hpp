#pragma once

// Flat `key = value` run configuration shared by the CLI subcommands.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "fluxreg/grid.hpp"
#include "fluxreg/solver.hpp"
#include "fluxreg/structure.hpp"

namespace fluxreg {

struct RunConfig {
  std::string structure = "powerlaw:p=2";
  /// Empty disables regularization.
  std::vector<double> epsilon{1e-1, 1e-2, 1e-3, 1e-4};
  std::string domain = "disk:r=1,h=0.03125";
  BoundaryCondition bc = BoundaryCondition::Dirichlet;
  /// `expr:<formula>` or `file:<csv>`.
  std::string rhs = "expr:1";
  std::filesystem::path out = ".";
  std::uint64_t seed = 1;
  /// Directory of the config file; relative paths resolve against it.
  std::filesystem::path base_dir = ".";
};

/// Keys: structure, epsilon, domain, bc, rhs, out, seed. `#` starts a comment.
/// Unknown keys, duplicates, malformed values and missing files throw ConfigError.
RunConfig parse_config(const std::filesystem::path& path);
RunConfig parse_config_text(const std::string& text, const std::filesystem::path& base_dir = ".");

/// A single value e gives the decades 1e-1, 1e-2, ... down to e (e itself
/// last when it is not a decade); several comma-separated values are taken
/// as they are; 0 disables.
std::vector<double> parse_epsilon(const std::string& text);

/// The domain descriptor with its `h` replaced.
std::string with_spacing(const std::string& domain, double h);

StructureFunction config_structure(const RunConfig& config);
DomainPtr config_domain(const RunConfig& config);
ScalarField config_rhs(const RunConfig& config, const DomainPtr& domain);
SolveOptions config_solve_options(const RunConfig& config);

}  // namespace fluxreg
