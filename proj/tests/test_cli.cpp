#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "json.hpp"

// End-to-end checks against the installed binary. The test runner passes the
// binary location through MIXREG_BIN.

TEST_SUITE_BEGIN("cli");

namespace {

struct CliResult {
  int exit_code = -1;
  std::string output;
};

std::filesystem::path scratch_path(const std::string& name) {
  return std::filesystem::temp_directory_path() /
         ("mixreg_cli_" + std::to_string(::getpid()) + "_" + name);
}

CliResult run_cli(const std::string& args, const std::string& env_prefix = "") {
  static int counter = 0;
  const char* bin = std::getenv("MIXREG_BIN");
  REQUIRE_MESSAGE(bin != nullptr, "MIXREG_BIN must point at the binary");
  const auto capture = scratch_path("out_" + std::to_string(counter++) + ".txt");
  std::string cmd;
  if (!env_prefix.empty()) cmd += env_prefix + " ";
  cmd += '"';
  cmd += bin;
  cmd += "\" " + args + " > \"" + capture.string() + "\" 2>&1";
  const int raw = std::system(cmd.c_str());
  CliResult r;
  r.exit_code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  std::ifstream in(capture, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  r.output = ss.str();
  std::filesystem::remove(capture);
  return r;
}

std::string write_file(const std::string& name, const std::string& content) {
  const auto p = scratch_path(name);
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << content;
  return p.string();
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// The bound command ends with a one-line JSON summary.
nlohmann::json last_json_line(const std::string& output) {
  std::istringstream in(output);
  std::string line, best;
  while (std::getline(in, line)) {
    if (!line.empty() && line.front() == '{') best = line;
  }
  REQUIRE_FALSE(best.empty());
  return nlohmann::json::parse(best);
}

}  // namespace

TEST_CASE("version and help") {
  const CliResult v = run_cli("--version");
  CHECK(v.exit_code == 0);
  CHECK(v.output.find("mixreg 0.1.0") != std::string::npos);

  const CliResult h = run_cli("--help");
  CHECK(h.exit_code == 0);
  CHECK(h.output.find("bound") != std::string::npos);
  CHECK(h.output.find("simulate") != std::string::npos);
}

TEST_CASE("bound command reports branches and a machine-readable line") {
  const CliResult b1 = run_cli("bound --S 1.5 --V 3");
  CHECK(b1.exit_code == 0);
  CHECK(b1.output.find("branch: B1") != std::string::npos);
  const auto j = last_json_line(b1.output);
  CHECK(j["S"] == 1.5);
  CHECK(j["V"] == 3.0);
  CHECK(j["alpha"] == 0.05);
  CHECK(j["pathwise_bound"].get<double>() > 0.0);
  CHECK(j["conditional_bound"].get<double>() > 0.0);
  CHECK(j["V_alpha"].get<double>() > 0.0);

  const CliResult b2 = run_cli("bound --S 2.7 --V 3");
  CHECK(b2.exit_code == 0);
  CHECK(b2.output.find("branch: B2") != std::string::npos);

  const CliResult b3 = run_cli("bound --S 50 --V 10");
  CHECK(b3.exit_code == 0);
  CHECK(b3.output.find("branch: B3") != std::string::npos);
}

TEST_CASE("bound writes an artifact under --out") {
  const auto dir = scratch_path("bound_out");
  std::filesystem::remove_all(dir);
  const CliResult r = run_cli("--out \"" + dir.string() + "\" bound --S 1 --V 4");
  CHECK(r.exit_code == 0);
  const auto j = nlohmann::json::parse(read_file(dir / "bound.json"));
  CHECK(j["V"] == 4.0);
  std::filesystem::remove_all(dir);
}

TEST_CASE("usage errors exit with code 2") {
  CHECK(run_cli("bound --S 1").exit_code == 2);           // missing --V
  CHECK(run_cli("definitely-not-a-command").exit_code == 2);
  CHECK(run_cli("simulate --model nosuch --n-paths 2 --T 10").exit_code == 2);
  CHECK(run_cli("--prior weird simulate --model gaussian --n-paths 2 --T 10").exit_code == 2);
  const CliResult mismatched = run_cli("wealth --S 1");
  CHECK(mismatched.exit_code == 2);
  CHECK(mismatched.output.find("both --S and --V") != std::string::npos);
}

TEST_CASE("precondition failures exit with code 1") {
  CHECK(run_cli("bound --S 1 --V 0").exit_code == 1);
  CHECK(run_cli("--alpha 2 simulate --model gaussian --n-paths 2 --T 10").exit_code == 1);
  CHECK(run_cli("--rho 0.4 bound --S 1 --V 2").exit_code == 1);
}

TEST_CASE("wealth in state and path modes") {
  const CliResult st = run_cli("wealth --S 1 --V 2");
  CHECK(st.exit_code == 0);
  CHECK(st.output.find("ln Z:") != std::string::npos);
  CHECK(st.output.find("regret:") != std::string::npos);

  const CliResult zero = run_cli("wealth --S 0 --V 0");
  CHECK(zero.exit_code == 0);

  const CliResult path = run_cli("wealth --model adversarial:drift,0.5 --T 25");
  CHECK(path.exit_code == 0);
  CHECK(path.output.find("final ln Z:") != std::string::npos);
  CHECK(path.output.find("sup ln Z:") != std::string::npos);

  const CliResult gpath = run_cli("--prior gaussian:1 wealth --model gaussian --T 30");
  CHECK(gpath.exit_code == 0);
}

TEST_CASE("simulate aggregates and honors the seed flag or environment") {
  const auto dir1 = scratch_path("sim1");
  const auto dir2 = scratch_path("sim2");
  std::filesystem::remove_all(dir1);
  std::filesystem::remove_all(dir2);

  const std::string common = "simulate --model gaussian --n-paths 5 --T 50";
  const CliResult a =
      run_cli("--seed 7 --out \"" + dir1.string() + "\" " + common);
  CHECK(a.exit_code == 0);
  CHECK(a.output.find("E_alpha frequency:") != std::string::npos);
  CHECK(a.output.find("bound violations: 0") != std::string::npos);

  const CliResult b = run_cli("--out \"" + dir2.string() + "\" " + common, "MIXREG_SEED=7");
  CHECK(b.exit_code == 0);
  CHECK(read_file(dir1 / "paths.csv") == read_file(dir2 / "paths.csv"));

  const auto j = nlohmann::json::parse(read_file(dir1 / "report.json"));
  CHECK(j["results"]["n_paths"] == 5);
  CHECK(j["config"]["seed"] == 7);
  std::filesystem::remove_all(dir1);
  std::filesystem::remove_all(dir2);
}

TEST_CASE("coverage run prints a coverage line") {
  const CliResult r = run_cli("coverage --model gaussian --n-paths 10 --T 30");
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("CS coverage") != std::string::npos);

  const CliResult na = run_cli("simulate --model symmetric:cauchy --n-paths 5 --T 20");
  CHECK(na.exit_code == 0);
  CHECK(na.output.find("CS coverage: n/a") != std::string::npos);
}

TEST_CASE("lil run reports distributions") {
  const CliResult r = run_cli("lil --model gaussian --T 200 --paths 2");
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("paths in E_alpha:") != std::string::npos);
  CHECK(r.output.find("final R/lnln V") != std::string::npos);
}

TEST_CASE("replay verification") {
  const std::string good = write_file("replay_good.txt", "0.5 1\n-0.5 1\n0.25 0.5\n");
  const CliResult ok = run_cli("verify-replay \"" + good + "\"");
  CHECK(ok.exit_code == 0);
  CHECK(ok.output.find("violations: 0") != std::string::npos);

  const std::string empty = write_file("replay_empty.txt", "");
  const CliResult e = run_cli("verify-replay \"" + empty + "\"");
  CHECK(e.exit_code == 0);
  CHECK(e.output.find("steps: 0") != std::string::npos);

  const std::string bad = write_file("replay_bad.txt", "0.5 1\n0.1 -1\n");
  CHECK(run_cli("verify-replay \"" + bad + "\"").exit_code == 2);

  const std::string broken = write_file("replay_broken.txt", "1 0\n");
  CHECK(run_cli("verify-replay \"" + broken + "\"").exit_code == 2);

  CHECK(run_cli("verify-replay /nonexistent/increments.txt").exit_code == 2);

  // An impossible tolerance turns every step into a reported violation.
  const CliResult viol = run_cli("--tolerance=-1e9 verify-replay \"" + good + "\"");
  CHECK(viol.exit_code == 3);
  CHECK(viol.output.find("violation at t=") != std::string::npos);

  for (const auto& f : {good, empty, bad, broken}) std::filesystem::remove(f);
}

TEST_CASE("config file supplies global flags") {
  const std::string cfg = write_file("flags.ini", "alpha=0.01\n");
  const CliResult r = run_cli("--config \"" + cfg + "\" bound --S 1 --V 4");
  CHECK(r.exit_code == 0);
  const auto j = last_json_line(r.output);
  CHECK(j["alpha"] == 0.01);
  std::filesystem::remove(cfg);
}

TEST_CASE("selftest passes") {
  const CliResult r = run_cli("selftest");
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("all checks passed") != std::string::npos);
  CHECK(r.output.find("[FAIL]") == std::string::npos);
}

TEST_SUITE_END();
