#include <doctest.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <json.hpp>
#include <sstream>
#include <string>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Workspace {
  fs::path dir;
  Workspace() : dir(fs::temp_directory_path() / ("fluxreg_cli_" + std::to_string(::getpid()))) {
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  ~Workspace() { fs::remove_all(dir); }
  fs::path operator/(const std::string& name) const { return dir / name; }
};

int fluxreg(const std::string& args) {
  const std::string cmd = std::string(FLUXREG_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

json read_json(const fs::path& path) { return json::parse(slurp(path)); }

void write_file(const fs::path& path, const std::string& text) { std::ofstream(path) << text; }

std::string q(const fs::path& p) { return "'" + p.string() + "'"; }

}  // namespace

TEST_CASE("solve writes fields and a report, deterministically") {
  Workspace ws;
  write_file(ws / "run.cfg",
             "structure = powerlaw:p=3\ndomain = disk:r=1,h=0.0625\nbc = dirichlet\nrhs = expr:1\nseed = 4\n");
  REQUIRE(fluxreg("solve --config " + q(ws / "run.cfg") + " --out " + q(ws / "a")) == 0);
  REQUIRE(fluxreg("solve --config " + q(ws / "run.cfg") + " --out " + q(ws / "b")) == 0);
  for (const char* name : {"u.csv", "flux.csv", "report.json"}) {
    CHECK(fs::exists(ws / "a" / name));
    CHECK(slurp(ws / "a" / name) == slurp(ws / "b" / name));
  }
  const auto report = read_json(ws / "a" / "report.json");
  CHECK(report["seed"] == 4);
  CHECK(report["bc"] == "dirichlet");
  CHECK(report["passed"] == true);
  CHECK(report["stages"].size() == 4);
  CHECK(slurp(ws / "a" / "u.csv").find("# seed=4 version=") != std::string::npos);
}

TEST_CASE("usage errors exit with 2") {
  Workspace ws;
  write_file(ws / "bad.cfg", "structure = powerlaw:p=3\nunknown_key = 1\n");
  CHECK(fluxreg("solve --config " + q(ws / "bad.cfg") + " --out " + q(ws / "o")) == 2);
  CHECK(fluxreg("") == 2);
  CHECK(fluxreg("no-such-command") == 2);
  CHECK(fluxreg("solve") == 2);
  CHECK(fluxreg("gallery --p 2 --out " + q(ws / "g")) == 2);
  CHECK(fluxreg("verify-matrix-lemma --theta -2 --n 2 --out " + q(ws / "m")) == 2);
}

TEST_CASE("incompatible Neumann data is a contract violation") {
  Workspace ws;
  write_file(ws / "n.cfg", "structure = powerlaw:p=3\ndomain = disk:r=1,h=0.0625\nbc = neumann\nrhs = expr:1\n");
  CHECK(fluxreg("solve --config " + q(ws / "n.cfg") + " --out " + q(ws / "o")) == 1);
  CHECK(read_json(ws / "o" / "report.json").contains("error"));
}

TEST_CASE("symmetric lemma: deterministic, and a perturbed phi is caught") {
  Workspace ws;
  REQUIRE(fluxreg("verify-symmetric-lemma --n 4 --samples 20000 --seed 9 --out " + q(ws / "a")) == 0);
  REQUIRE(fluxreg("verify-symmetric-lemma --n 4 --samples 20000 --seed 9 --out " + q(ws / "b")) == 0);
  CHECK(slurp(ws / "a" / "symmetric_lemma.csv") == slurp(ws / "b" / "symmetric_lemma.csv"));

  CHECK(fluxreg("verify-symmetric-lemma --n 4 --samples 20000 --perturb-phi 1e-3 --out " + q(ws / "p")) == 1);
  const auto j = read_json(ws / "p" / "symmetric_lemma.json");
  CHECK(j["passed"] == false);
  bool named = false;
  for (const auto& f : j["failures"]) named = named || f["metric"] == "min_phi";
  CHECK(named);
}

TEST_CASE("matrix lemma with a small budget") {
  Workspace ws;
  REQUIRE(fluxreg("verify-matrix-lemma --theta=-1,0,1 --n 2 --starts 20 --iterations 500 --samples 20000 --out " +
                  q(ws / "m")) == 0);
  const std::string csv = slurp(ws / "m" / "matrix_lemma.csv");
  CHECK(csv.rfind("theta,n,C_estimate,upper_bound,gap,evaluations,wall_time\n", 0) == 0);
  std::istringstream lines(csv);
  int rows = 0;
  for (std::string line; std::getline(lines, line);) rows += (!line.empty() && line[0] != '#') ? 1 : 0;
  CHECK(rows == 4);
}

TEST_CASE("norms of a sample file") {
  Workspace ws;
  write_file(ws / "s.csv", "value,weight\n4,0.25\n1,0.75\n");
  REQUIRE(fluxreg("norms --input " + q(ws / "s.csv") + " --norm marcinkiewicz:q=2 --norm weaklog --out " +
                  q(ws / "o")) == 0);
  const std::string csv = slurp(ws / "o" / "norms.csv");
  // sup_s s^{1/2} psi**(s) is attained at s = 1/4 (value 2) or s = 1 (value 7/4).
  CHECK(csv.find("marcinkiewicz:q=2,2\n") != std::string::npos);
  CHECK(csv.find("weaklog,") != std::string::npos);
  CHECK(fluxreg("norms --input " + q(ws / "missing.csv") + " --norm marcinkiewicz:q=2 --out " + q(ws / "x")) != 0);

  REQUIRE(fluxreg("norms --curve circle:R=1 --radii 0.2,0.1 --out " + q(ws / "c")) == 0);
  CHECK(fs::exists(ws / "c" / "curvature.csv"));
}

TEST_CASE("gallery and estimate subcommands") {
  Workspace ws;
  REQUIRE(fluxreg("gallery --beta 1.4 --p 6 --refine 2 --h0 0.0625 --out " + q(ws / "g")) == 0);
  CHECK(read_json(ws / "g" / "gallery.json")["passed"] == true);

  write_file(ws / "e.cfg", "domain = disk:r=1,h=0.0625\nrhs = expr:1\n");
  REQUIRE(fluxreg("verify-estimate --config " + q(ws / "e.cfg") + " --sweep p=2,3 --refine 2 --out " +
                  q(ws / "e")) == 0);
  CHECK(read_json(ws / "e" / "estimate.json")["passed"] == true);

  REQUIRE(fluxreg("sweep --p 3 --domains disk:r=1 --rhs expr:1 --spacings 0.0625 --centers 0,0 --radii 0.25 --out " +
                  q(ws / "s")) == 0);
  const std::string csv = slurp(ws / "s" / "sweep.csv");
  CHECK(csv.find("\n3,disk,f0,0.0625,") != std::string::npos);
}
