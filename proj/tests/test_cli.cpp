#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "viana/config.hpp"

using namespace viana;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

int run_cli(const std::string& args) {
  std::string cmd = std::string(VIANA_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  int rc = std::system(cmd.c_str());
  REQUIRE(rc != -1);
  return WEXITSTATUS(rc);
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  REQUIRE(f.good());
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  fs::path p = fs::path("cli_scratch") / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream f(p, std::ios::binary);
  f << text;
}

}  // namespace

TEST_CASE("config builders construct every base kind") {
  CHECK(config::base_from_json(json::parse(R"({"kind":"uniform_linear","d":16})"))
            .branch_count() == 16);
  CHECK(config::base_from_json(
            json::parse(R"({"kind":"perturbed_linear","d":16,
                            "perturbation":{"amplitude":1e-3,"frequency":2}})"))
            .renyi_constant_analytic() > 0.0);
  CHECK(config::base_from_json(
            json::parse(R"({"kind":"quadratic_uniform","d":20,"q":0.1})"))
            .expansion_floor() == Catch::Approx(18.0).epsilon(1e-12));
  BaseMap trunc = config::base_from_json(
      json::parse(R"({"kind":"uniform_linear","d":16,"branch_count":8})"));
  CHECK(trunc.branch_count() == 8);
  CHECK(trunc.partition().residual_mass() == Catch::Approx(0.5).margin(1e-12));
  CHECK_THROWS_AS(config::base_from_json(json::parse(R"({"kind":"nope"})")),
                  ConfigError);
  CHECK_THROWS_AS(
      config::base_from_json(json::parse(R"({"kind":"uniform_linear","d":8})")),
      ConfigError);
}

TEST_CASE("config builders fill skew and fibered defaults") {
  SkewSystem dflt = config::skew_from_json(json::object());
  CHECK(dflt.alpha() == 0.01);
  CHECK(dflt.a0() == Catch::Approx(find_misiurewicz()).margin(1e-12));

  SkewSystem named = config::skew_from_json(
      json::parse(R"({"a0":"misiurewicz:crit_to_period2","alpha":0.001})"));
  CHECK(named.a0() == dflt.a0());
  CHECK(named.alpha() == 0.001);

  CHECK_THROWS_AS(config::skew_from_json(json::parse(R"({"alpha":-1})")),
                  ConfigError);
  CHECK_THROWS_AS(config::skew_from_json(json::parse(
                      R"({"bump":{"center":0.5,"width":0.6,"amplitude":1e-3}})")),
                  ConfigError);

  FiberedSystem none = config::fibered_from_json(json::parse(R"({"c":0.5})"));
  CHECK(none.coupling.kind == Coupling::Kind::None);
  FiberedSystem sine = config::fibered_from_json(
      json::parse(R"({"c":0.5,"epsilon":0.01})"));
  CHECK(sine.coupling.kind == Coupling::Kind::Sine);
  FiberedSystem bump = config::fibered_from_json(json::parse(
      R"({"c":0.5,"coupling":{"kind":"bump","amplitude":0.02}})"));
  CHECK(bump.coupling.kind == Coupling::Kind::Bump);
  CHECK(bump.coupling.eps == 0.02);
  CHECK_THROWS_AS(config::fibered_from_json(json::parse(
                      R"({"coupling":{"kind":"laser"}})")),
                  ConfigError);
}

TEST_CASE("canonical config text sorts keys") {
  json j = json::parse(R"({"zeta":1,"alpha":{"b":2,"a":3}})");
  CHECK(config::canonical(j) == R"({"alpha":{"a":3,"b":2},"zeta":1})");
}

TEST_CASE("cli usage errors exit with the config code") {
  CHECK(run_cli("--help") == 0);
  CHECK(run_cli("") == 2);
  CHECK(run_cli("frobnicate") == 2);
  CHECK(run_cli("lyapunov --no-such-flag") == 2);
  CHECK(run_cli("verify --suite bogus") == 2);
}

TEST_CASE("lyapunov writes the table, the sidecar, and the fraction line") {
  fs::path dir = scratch("ly");
  fs::path cfg = dir / "cfg.json";
  write_file(cfg, R"({"n":200,"samples":50})");
  fs::path out = dir / "out";
  CHECK(run_cli("lyapunov --config " + cfg.string() + " --seed 9 --out " +
                out.string()) == 0);

  std::string csv = slurp(out / "lyapunov.csv");
  CHECK(csv.rfind("sample,fiber,base,generic\n", 0) == 0);
  std::size_t lines = 0;
  for (char c : csv) lines += c == '\n' ? 1 : 0;
  CHECK(lines == 51);  // header + one row per sample

  std::string summary = slurp(out / "lyapunov_summary.txt");
  CHECK(summary.find("command = lyapunov") != std::string::npos);
  CHECK(summary.find("config_hash = ") != std::string::npos);
  CHECK(summary.find("seed = 9") != std::string::npos);
  CHECK(summary.find("fraction_positive = ") != std::string::npos);
  CHECK(summary.find("status = ok") != std::string::npos);
  CHECK(summary.find("workers") == std::string::npos);
}

TEST_CASE("outputs are byte-identical across worker counts") {
  fs::path dir = scratch("det");
  fs::path cfg = dir / "cfg.json";
  write_file(cfg, R"({"n":300,"samples":40})");
  fs::path a = dir / "w1", b = dir / "w4";
  CHECK(run_cli("lyapunov --config " + cfg.string() + " --seed 5 --workers 1 --out " +
                a.string()) == 0);
  CHECK(run_cli("lyapunov --config " + cfg.string() + " --seed 5 --workers 4 --out " +
                b.string()) == 0);
  CHECK(slurp(a / "lyapunov.csv") == slurp(b / "lyapunov.csv"));
  CHECK(slurp(a / "lyapunov_summary.txt") == slurp(b / "lyapunov_summary.txt"));
}

TEST_CASE("recurrence rejects alpha = 0 without writing files") {
  fs::path dir = scratch("rec0");
  fs::path cfg = dir / "cfg.json";
  write_file(cfg, R"({"alpha":0.0})");
  fs::path out = dir / "out";
  CHECK(run_cli("recurrence --config " + cfg.string() + " --out " + out.string()) ==
        2);
  CHECK_FALSE(fs::exists(out));
}

TEST_CASE("failed contract checks exit with the contract code") {
  fs::path dir = scratch("cltfail");
  fs::path cfg = dir / "cfg.json";
  write_file(cfg, R"({"n":400,"samples":50,"ks_tol":1e-9})");
  fs::path out = dir / "out";
  CHECK(run_cli("clt --config " + cfg.string() + " --out " + out.string()) == 3);
  std::string summary = slurp(out / "clt_summary.txt");
  CHECK(summary.find("status = FAIL") != std::string::npos);
  CHECK(summary.find("| FAIL") != std::string::npos);
}

TEST_CASE("broken configs exit with the config code") {
  fs::path dir = scratch("bad");
  fs::path cfg = dir / "cfg.json";
  write_file(cfg, "{not json");
  CHECK(run_cli("lyapunov --config " + cfg.string()) == 2);
  CHECK(run_cli("lyapunov --config " + (dir / "missing.json").string()) == 2);
}
