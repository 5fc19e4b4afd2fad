#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fluxreg/config.hpp"
#include "fluxreg/descriptor.hpp"
#include "fluxreg/error.hpp"
#include "fluxreg/estimates.hpp"
#include "fluxreg/expression.hpp"
#include "fluxreg/matrix_lemma.hpp"
#include "fluxreg/rearrangement.hpp"
#include "fluxreg/simplex_forms.hpp"
#include "fluxreg/solver.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace fluxreg;

namespace {

constexpr int kOk = 0;
constexpr int kContractViolation = 1;
constexpr int kUsage = 2;

std::string metadata(std::uint64_t seed) {
  return "# seed=" + std::to_string(seed) + " version=" + FLUXREG_VERSION;
}

class CsvWriter {
 public:
  CsvWriter(const fs::path& path, const std::vector<std::string>& header) : out_(path) {
    if (!out_) throw Error(ErrorCode::IoError, "cannot write " + path.string());
    row(header);
  }
  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
    out_ << '\n';
  }
  void finish(std::uint64_t seed) { out_ << metadata(seed) << '\n'; }

 private:
  std::ofstream out_;
};

std::string num(double v) { return format_number(v); }

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << j.dump(2) << '\n';
}

/// Collects contract checks for the JSON report and the exit code.
class Contracts {
 public:
  void check(const std::string& name, bool ok, double value, double bound) {
    if (!ok) failures_.push_back({{"metric", name}, {"value", value}, {"bound", bound}});
    ++checked_;
  }
  bool passed() const { return failures_.empty(); }
  void into(json& j) const {
    j["contracts_checked"] = checked_;
    j["passed"] = passed();
    j["failures"] = failures_;
  }
  int exit_code() const { return passed() ? kOk : kContractViolation; }

 private:
  json failures_ = json::array();
  long checked_ = 0;
};

std::vector<double> number_list(const std::string& text) { return parse_number_list(text); }

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : text) {
    if (c == sep) {
      parts.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!trim(cur).empty()) parts.push_back(trim(cur));
  return parts;
}

std::string shape_name(const std::string& domain) { return parse_descriptor(domain).name; }

fs::path prepare_out(const fs::path& dir) {
  fs::create_directories(dir);
  return dir;
}

// ---------------------------------------------------------------- solve

struct SolveArgs {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
};

int run_solve(const SolveArgs& args) {
  RunConfig config = parse_config(args.config);
  if (!args.out.empty()) config.out = args.out;
  if (args.seed) config.seed = *args.seed;
  const fs::path out = prepare_out(config.out);
  const StructureFunction sf = config_structure(config);
  const DomainPtr domain = config_domain(config);
  const ScalarField f = config_rhs(config, domain);

  json report;
  report["bc"] = to_string(config.bc);
  report["structure"] = sf.describe();
  report["domain"] = domain->describe();
  report["seed"] = config.seed;
  report["version"] = FLUXREG_VERSION;
  Contracts contracts;
  try {
    const Solution s = solve(sf, domain, f, config.bc, config_solve_options(config));
    write_csv((out / "u.csv").string(), s.u, metadata(config.seed));
    const FluxResult V = flux(sf, s.u);
    write_csv((out / "flux.csv").string(), V.V, metadata(config.seed));
    json stages = json::array();
    for (const auto& st : s.report.stages)
      stages.push_back({{"epsilon", st.epsilon},
                        {"iterations", st.newton_iterations},
                        {"linear_iterations", st.linear_iterations},
                        {"gradient_norm", st.gradient_norm},
                        {"energy", st.energy}});
    report["stages"] = stages;
    report["iterations"] = s.report.total_newton_iterations();
    report["residual_l2"] = s.report.residual_l2;
    report["energy"] = s.report.final_energy();
    report["gradient_norm"] = s.report.final_gradient();
    report["singular_flux_nodes"] = V.singular_nodes;
    contracts.check("gradient_norm", s.report.final_gradient() <= s.report.gradient_tolerance,
                    s.report.final_gradient(), s.report.gradient_tolerance);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::NewtonStall && e.code() != ErrorCode::LinearSolveFailure &&
        e.code() != ErrorCode::IncompatibleData)
      throw;
    report["error"] = e.what();
    contracts.check(std::string(to_string(e.code())), false, 0.0, 0.0);
  }
  contracts.into(report);
  write_json(out / "report.json", report);
  return contracts.exit_code();
}

// ------------------------------------------------------- verify-estimate

struct EstimateArgs {
  std::string config;
  std::string sweep;
  int refine = 3;
  std::string out;
  std::optional<std::uint64_t> seed;
};

int run_verify_estimate(const EstimateArgs& args) {
  RunConfig config = parse_config(args.config);
  if (!args.out.empty()) config.out = args.out;
  if (args.seed) config.seed = *args.seed;
  if (args.refine < 1) throw Error(ErrorCode::ConfigError, "--refine must be >= 1");
  const fs::path out = prepare_out(config.out);

  std::vector<std::string> structures;
  if (args.sweep.empty()) {
    structures.push_back(config.structure);
  } else {
    const auto eq = args.sweep.find('=');
    if (eq == std::string::npos || trim(args.sweep.substr(0, eq)) != "p")
      throw Error(ErrorCode::ConfigError, "--sweep expects p=<list>");
    for (double p : number_list(args.sweep.substr(eq + 1))) structures.push_back("powerlaw:p=" + num(p));
  }
  const double h0 = parse_descriptor(config.domain).number("h");

  CsvWriter csv(out / "estimate.csv", {"p", "h", "domain", "norm_f_l2", "norm_V_l2", "norm_gradV_l2",
                                       "ratio_upper", "ratio_lower", "residual"});
  Contracts contracts;
  json rows = json::array();
  for (const auto& s : structures) {
    RunConfig run = config;
    run.structure = s;
    const StructureFunction sf = config_structure(run);
    double previous = 0.0;
    for (int k = 0; k < args.refine; ++k) {
      run.domain = with_spacing(config.domain, std::ldexp(h0, -k));
      const DomainPtr domain = config_domain(run);
      const ScalarField f = config_rhs(run, domain);
      const Solution sol = solve(sf, domain, f, run.bc, config_solve_options(run));
      const EstimateReport r = global_estimate(sf, sol.u, f, sol.report);
      const double p = sf.kind() == StructureKind::PowerLaw ? sf.exponent() : 2.0;
      csv.row({num(p), num(r.h), shape_name(run.domain), num(r.norm_f_l2), num(r.norm_V_l2),
               num(r.norm_gradV_l2), num(r.ratio_upper), num(r.ratio_lower), num(r.residual)});
      if (r.ratio_upper != kUndefinedRatio) {
        contracts.check("ratio_upper", r.ratio_upper >= 0.05 && r.ratio_upper <= 20.0, r.ratio_upper, 20.0);
        if (k > 0) {
          const double rel = std::abs(r.ratio_upper / previous - 1.0);
          contracts.check("ratio_refinement_change", rel <= 0.1, rel, 0.1);
        }
        previous = r.ratio_upper;
      }
      contracts.check("structural_lower_bound", r.structural_lower_bound, r.norm_f_interior_l2,
                      std::sqrt(2.0) * r.norm_gradV_l2 + 10.0 * r.residual);
      rows.push_back({{"structure", sf.describe()}, {"h", r.h}, {"ratio_upper", r.ratio_upper},
                      {"residual", r.residual}});
    }
  }
  csv.finish(config.seed);
  json report;
  report["rows"] = rows;
  report["seed"] = config.seed;
  report["version"] = FLUXREG_VERSION;
  contracts.into(report);
  write_json(out / "estimate.json", report);
  return contracts.exit_code();
}

// --------------------------------------------------- verify-matrix-lemma

struct MatrixArgs {
  std::string theta = "-1,-0.9,-0.5,0,1,3";
  std::string n = "2,3,4";
  int starts = 200;
  int iterations = 10000;
  long samples = 1000000;
  std::uint64_t seed = 1;
  std::string out = ".";
};

int run_verify_matrix_lemma(const MatrixArgs& args) {
  const fs::path out = prepare_out(args.out);
  CsvWriter csv(out / "matrix_lemma.csv",
                {"theta", "n", "C_estimate", "upper_bound", "gap", "evaluations", "wall_time"});
  Contracts contracts;
  for (double theta : number_list(args.theta))
    for (double nd : number_list(args.n)) {
      if (nd != std::floor(nd)) throw Error(ErrorCode::ConfigError, "--n expects integers");
      MinConstantBudget budget;
      budget.starts = args.starts;
      budget.iterations = args.iterations;
      budget.samples = args.samples;
      budget.seed = args.seed;
      const auto t0 = std::chrono::steady_clock::now();
      const MinConstantResult r = min_constant(theta, static_cast<int>(nd), budget);
      const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      const double gap = std::abs(r.estimate - r.upper_bound);
      csv.row({num(theta), num(nd), num(r.estimate), num(r.upper_bound), num(gap), std::to_string(r.evaluations),
               num(wall)});
      if (theta > -1.0) {
        contracts.check("C_estimate_positive", r.estimate > 0.0, r.estimate, 0.0);
        contracts.check("C_estimate_gap", gap <= 1e-3, gap, 1e-3);
      } else {
        contracts.check("C_estimate_rank_one", std::abs(r.estimate) <= 1e-6, r.estimate, 1e-6);
      }
    }
  csv.finish(args.seed);
  json report;
  report["seed"] = args.seed;
  report["version"] = FLUXREG_VERSION;
  contracts.into(report);
  write_json(out / "matrix_lemma.json", report);
  return contracts.exit_code();
}

// ------------------------------------------------ verify-symmetric-lemma

struct SymmetricArgs {
  int n = 3;
  long samples = 100000;
  std::uint64_t seed = 1;
  double perturb = 0.0;
  std::string out = ".";
};

int run_verify_symmetric_lemma(const SymmetricArgs& args) {
  const fs::path out = prepare_out(args.out);
  PhiFunction phi;
  if (args.perturb != 0.0) {
    const double delta = args.perturb;
    phi = [delta](std::span<const double> eta) { return phi_product(eta) - delta; };
  }
  const SweepResult r = nonnegativity_sweep(args.n, args.samples, args.seed, phi);
  std::string argmin;
  for (std::size_t i = 0; i < r.argmin.size(); ++i) argmin += (i ? ";" : "") + num(r.argmin[i]);
  CsvWriter csv(out / "symmetric_lemma.csv", {"n", "samples", "min_phi", "argmin_eta", "max_identity_gap"});
  csv.row({std::to_string(args.n), std::to_string(args.samples), num(r.min_phi), argmin, num(r.max_identity_gap)});
  csv.finish(args.seed);
  Contracts contracts;
  contracts.check("min_phi", r.min_phi >= -1e-12, r.min_phi, -1e-12);
  contracts.check("max_identity_gap", r.max_identity_gap <= 1e-10, r.max_identity_gap, 1e-10);
  json report;
  report["n"] = args.n;
  report["samples"] = args.samples;
  report["points"] = r.points;
  report["min_phi"] = r.min_phi;
  report["seed"] = args.seed;
  report["version"] = FLUXREG_VERSION;
  contracts.into(report);
  write_json(out / "symmetric_lemma.json", report);
  return contracts.exit_code();
}

// ------------------------------------------------------------------ norms

struct NormsArgs {
  std::string input;
  std::vector<std::string> norms;
  std::string curve;
  std::string radii = "0.4,0.2,0.1,0.05,0.025,0.0125,0.00625";
  std::uint64_t seed = 1;
  std::string out = ".";
};

WeightedSamples read_samples(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ConfigError, "cannot open " + path.string());
  std::vector<double> values, weights;
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    if (header) {
      header = false;
      if (std::isalpha(static_cast<unsigned char>(line[0]))) continue;
    }
    const auto cells = number_list(line);
    if (cells.empty() || cells.size() > 2) throw Error(ErrorCode::ConfigError, "samples rows are value[,weight]");
    values.push_back(cells[0]);
    weights.push_back(cells.size() == 2 ? cells[1] : 1.0);
  }
  return WeightedSamples(values, weights);
}

double evaluate_norm(const WeightedSamples& ws, const std::string& spec) {
  const Descriptor d = parse_descriptor(spec);
  auto exponent = [&](const std::string& key) {
    const std::string& v = d.params.at(key);
    return v == "inf" ? kInfinity : parse_number(v);
  };
  if (d.name == "marcinkiewicz") {
    d.require_only({"q"});
    return marcinkiewicz_norm(ws, exponent("q"));
  }
  if (d.name == "lorentz") {
    d.require_only({"q", "sigma"});
    return lorentz_norm(ws, exponent("q"), exponent("sigma"));
  }
  if (d.name == "weaklog") {
    d.require_only({"C"});
    return weak_log_norm(ws, d.has("C") ? std::optional<double>(d.number("C")) : std::nullopt);
  }
  throw Error(ErrorCode::ConfigError, "unknown norm '" + d.name + "'");
}

int run_norms(const NormsArgs& args) {
  if (args.input.empty() == args.curve.empty())
    throw Error(ErrorCode::ConfigError, "norms needs exactly one of --input or --curve");
  const fs::path out = prepare_out(args.out);
  if (!args.input.empty()) {
    if (args.norms.empty()) throw Error(ErrorCode::ConfigError, "--norm is required with --input");
    const WeightedSamples ws = read_samples(args.input);
    CsvWriter csv(out / "norms.csv", {"norm", "value"});
    for (const auto& spec : args.norms) {
      if (spec.find(',') != std::string::npos) {
        // Commas would split the CSV cell.
        csv.row({parse_descriptor(spec).name, num(evaluate_norm(ws, spec))});
      } else {
        csv.row({spec, num(evaluate_norm(ws, spec))});
      }
    }
    csv.finish(args.seed);
    return kOk;
  }
  const BoundaryCurve curve = BoundaryCurve::parse(args.curve);
  const auto rows = curvature_admissibility(curve, number_list(args.radii));
  CsvWriter csv(out / "curvature.csv", {"r", "sup_point_arclength", "weak_log_norm"});
  for (const auto& r : rows) csv.row({num(r.radius), num(r.sup_point_arclength), num(r.weak_log_norm)});
  csv.finish(args.seed);
  return kOk;
}

// ---------------------------------------------------------------- gallery

struct GalleryArgs {
  double beta = 1.4;
  double p = 6.0;
  int refine = 4;
  double h0 = 1.0 / 32;
  std::string domain = "rect:xmin=-1,xmax=1,ymin=-1,ymax=1";
  std::uint64_t seed = 1;
  std::string out = ".";
};

int run_gallery(const GalleryArgs& args) {
  const fs::path out = prepare_out(args.out);
  const GalleryReport g = gallery_counterexample(args.beta, args.p, args.domain, args.h0, args.refine);
  CsvWriter csv(out / "gallery.csv", {"h", "norm_V_w12", "norm_hess_u_l2"});
  for (const auto& r : g.rows) csv.row({num(r.h), num(r.norm_V_w12), num(r.norm_hess_u_l2)});
  csv.finish(args.seed);
  Contracts contracts;
  contracts.check("flux_variation", g.flux_variation <= 0.05, g.flux_variation, 0.05);
  if (!g.w22_expected) {
    if (args.refine >= 4)
      contracts.check("hessian_growth", g.hessian_growth >= 0.2, g.hessian_growth, 0.2);
    const double slope_gap = std::abs(g.hessian_slope - g.expected_slope);
    contracts.check("hessian_slope", slope_gap <= 0.05, g.hessian_slope, g.expected_slope);
  }
  json report;
  report["beta"] = g.beta;
  report["p"] = g.p;
  report["flux_variation"] = g.flux_variation;
  report["hessian_growth"] = g.hessian_growth;
  report["hessian_slope"] = g.hessian_slope;
  report["expected_slope"] = g.expected_slope;
  report["w22_expected"] = g.w22_expected;
  report["seed"] = args.seed;
  report["version"] = FLUXREG_VERSION;
  contracts.into(report);
  write_json(out / "gallery.json", report);
  return contracts.exit_code();
}

// ------------------------------------------------------------------ sweep

struct SweepArgs {
  std::string config;
  std::string p = "1.5,2,3,4.5";
  std::string domains = "rect:xmin=-1,xmax=1,ymin=-1,ymax=1;disk:r=1";
  std::string rhs = "expr:1;expr:1+x/2;expr:exp(-(x^2+y^2))";
  std::string h = "0.03125,0.015625";
  std::string centers = "0,0;0.2,0;-0.2,0;0,0.2;0,-0.2";
  std::string radii = "0.125,0.25";
  std::string out;
  std::optional<std::uint64_t> seed;
};

int run_sweep(const SweepArgs& args) {
  RunConfig config = args.config.empty() ? RunConfig{} : parse_config(args.config);
  if (!args.out.empty()) config.out = args.out;
  if (args.seed) config.seed = *args.seed;
  const fs::path out = prepare_out(config.out);
  const auto ps = number_list(args.p);
  const auto domains = split(args.domains, ';');
  const auto rhs = split(args.rhs, ';');
  const auto hs = number_list(args.h);
  const auto radii = number_list(args.radii);
  std::vector<std::array<double, 2>> centers;
  for (const auto& c : split(args.centers, ';')) {
    const auto xy = number_list(c);
    if (xy.size() != 2) throw Error(ErrorCode::ConfigError, "centres are x,y pairs separated by ';'");
    centers.push_back({xy[0], xy[1]});
  }
  for (const auto& r : rhs) parse_config_text("rhs = " + r, config.base_dir);

  CsvWriter csv(out / "sweep.csv", {"p", "domain", "rhs", "h", "ratio_upper", "ratio_lower", "residual",
                                    "structural_lower", "local_max_ratio"});
  Contracts contracts;
  for (double p : ps)
    for (const auto& dom : domains)
      for (std::size_t fi = 0; fi < rhs.size(); ++fi) {
        RunConfig run = config;
        run.structure = "powerlaw:p=" + num(p);
        run.rhs = rhs[fi];
        const StructureFunction sf = config_structure(run);
        double previous = 0.0;
        for (std::size_t k = 0; k < hs.size(); ++k) {
          run.domain = with_spacing(dom, hs[k]);
          const DomainPtr domain = config_domain(run);
          const ScalarField f = config_rhs(run, domain);
          const Solution sol = solve(sf, domain, f, run.bc, config_solve_options(run));
          const EstimateReport r = global_estimate(sf, sol.u, f, sol.report);
          double local_max = 0.0;
          for (const auto& c : centers)
            for (double R : radii) local_max = std::max(local_max, local_estimate(sf, sol.u, f, c, R).ratio);
          csv.row({num(p), shape_name(dom), "f" + std::to_string(fi), num(hs[k]), num(r.ratio_upper),
                   num(r.ratio_lower), num(r.residual), r.structural_lower_bound ? "1" : "0", num(local_max)});
          contracts.check("ratio_upper", r.ratio_upper >= 0.05 && r.ratio_upper <= 20.0, r.ratio_upper, 20.0);
          contracts.check("structural_lower_bound", r.structural_lower_bound, r.norm_f_interior_l2,
                          std::sqrt(2.0) * r.norm_gradV_l2 + 10.0 * r.residual);
          contracts.check("local_ratio", local_max <= 20.0, local_max, 20.0);
          if (k > 0) {
            const double rel = std::abs(r.ratio_upper / previous - 1.0);
            contracts.check("ratio_refinement_change", rel <= 0.1, rel, 0.1);
          }
          previous = r.ratio_upper;
        }
      }
  csv.finish(config.seed);
  json report;
  report["rhs"] = rhs;
  report["seed"] = config.seed;
  report["version"] = FLUXREG_VERSION;
  contracts.into(report);
  write_json(out / "sweep.json", report);
  return contracts.exit_code();
}

bool is_usage_error(ErrorCode code) {
  switch (code) {
    case ErrorCode::ConfigError:
    case ErrorCode::InvalidArgument:
    case ErrorCode::ParameterOutOfRange:
    case ErrorCode::BudgetTooSmall:
    case ErrorCode::BadConstant:
    case ErrorCode::EmptySamples:
    case ErrorCode::BallNotInterior:
      return true;
    default:
      return false;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Flux regularity toolkit for p-Laplace type equations"};
  app.set_version_flag("--version", FLUXREG_VERSION);
  app.require_subcommand(1);

  SolveArgs solve_args;
  auto* solve_cmd = app.add_subcommand("solve", "Solve the Dirichlet or Neumann problem of a config");
  solve_cmd->add_option("--config", solve_args.config, "Config file")->required();
  solve_cmd->add_option("--out", solve_args.out, "Output directory (overrides the config)");
  solve_cmd->add_option("--seed", solve_args.seed, "Seed recorded in the outputs");

  EstimateArgs est_args;
  auto* est_cmd = app.add_subcommand("verify-estimate", "Global estimate ratios under refinement");
  est_cmd->add_option("--config", est_args.config, "Config file")->required();
  est_cmd->add_option("--sweep", est_args.sweep, "p=<list>");
  est_cmd->add_option("--refine", est_args.refine, "Number of mesh levels");
  est_cmd->add_option("--out", est_args.out, "Output directory (overrides the config)");
  est_cmd->add_option("--seed", est_args.seed, "Seed recorded in the outputs");

  MatrixArgs mat_args;
  auto* mat_cmd = app.add_subcommand("verify-matrix-lemma", "Minimum of psi over sphere x spectra");
  mat_cmd->add_option("--theta", mat_args.theta, "Comma-separated theta values");
  mat_cmd->add_option("--n", mat_args.n, "Comma-separated dimensions");
  mat_cmd->add_option("--starts", mat_args.starts, "Projected-gradient starts");
  mat_cmd->add_option("--iterations", mat_args.iterations, "Iterations per start");
  mat_cmd->add_option("--samples", mat_args.samples, "Random samples");
  mat_cmd->add_option("--seed", mat_args.seed, "Seed");
  mat_cmd->add_option("--out", mat_args.out, "Output directory");

  SymmetricArgs sym_args;
  auto* sym_cmd = app.add_subcommand("verify-symmetric-lemma", "Nonnegativity of phi on the simplex");
  sym_cmd->add_option("--n", sym_args.n, "Dimension (2..12)");
  sym_cmd->add_option("--samples", sym_args.samples, "Random simplex samples");
  sym_cmd->add_option("--seed", sym_args.seed, "Seed");
  sym_cmd->add_option("--out", sym_args.out, "Output directory");
  sym_cmd->add_option("--perturb-phi", sym_args.perturb)->group("");

  NormsArgs norm_args;
  auto* norm_cmd = app.add_subcommand("norms", "Rearrangement norms of samples or a curvature report");
  norm_cmd->add_option("--input", norm_args.input, "CSV of value[,weight] rows");
  norm_cmd->add_option("--norm", norm_args.norms, "marcinkiewicz:q=2 | lorentz:q=2,sigma=1 | weaklog[:C=..]");
  norm_cmd->add_option("--curve", norm_args.curve, "circle:R=1 | stadium:L=2,R=0.5 | spike:delta=0.05");
  norm_cmd->add_option("--radii", norm_args.radii, "Comma-separated radii");
  norm_cmd->add_option("--seed", norm_args.seed, "Seed recorded in the outputs");
  norm_cmd->add_option("--out", norm_args.out, "Output directory");

  GalleryArgs gal_args;
  auto* gal_cmd = app.add_subcommand("gallery", "u = |x_1|^beta: flux regular, u not in W^{2,2}");
  gal_cmd->add_option("--beta", gal_args.beta, "Exponent beta > 1");
  gal_cmd->add_option("--p", gal_args.p, "p-Laplacian exponent");
  gal_cmd->add_option("--refine", gal_args.refine, "Number of mesh levels");
  gal_cmd->add_option("--h0", gal_args.h0, "Coarsest spacing");
  gal_cmd->add_option("--domain", gal_args.domain, "Domain descriptor without h");
  gal_cmd->add_option("--seed", gal_args.seed, "Seed recorded in the outputs");
  gal_cmd->add_option("--out", gal_args.out, "Output directory");

  SweepArgs sweep_args;
  auto* sweep_cmd = app.add_subcommand("sweep", "Coercivity band and local estimate over p x domains x rhs");
  sweep_cmd->add_option("--config", sweep_args.config, "Config file for epsilon, bc, out and seed");
  sweep_cmd->add_option("--p", sweep_args.p, "Comma-separated p values");
  sweep_cmd->add_option("--domains", sweep_args.domains, "';'-separated domain descriptors without h");
  sweep_cmd->add_option("--rhs", sweep_args.rhs, "';'-separated expr: right-hand sides");
  sweep_cmd->add_option("--spacings", sweep_args.h, "Comma-separated spacings");
  sweep_cmd->add_option("--centers", sweep_args.centers, "';'-separated x,y ball centres");
  sweep_cmd->add_option("--radii", sweep_args.radii, "Comma-separated ball radii");
  sweep_cmd->add_option("--out", sweep_args.out, "Output directory (overrides the config)");
  sweep_cmd->add_option("--seed", sweep_args.seed, "Seed recorded in the outputs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*solve_cmd) return run_solve(solve_args);
    if (*est_cmd) return run_verify_estimate(est_args);
    if (*mat_cmd) return run_verify_matrix_lemma(mat_args);
    if (*sym_cmd) return run_verify_symmetric_lemma(sym_args);
    if (*norm_cmd) return run_norms(norm_args);
    if (*gal_cmd) return run_gallery(gal_args);
    if (*sweep_cmd) return run_sweep(sweep_args);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return is_usage_error(e.code()) ? kUsage : kContractViolation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kContractViolation;
  }
  return kUsage;
}
