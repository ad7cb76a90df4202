#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "viana/acceptance.hpp"

using namespace viana;
using acceptance::CriterionResult;

namespace {

constexpr std::uint64_t kSeed = 7;
constexpr bool kFast = true;
constexpr int kWorkers = 2;

const std::vector<CriterionResult>& battery() {
  static const std::vector<CriterionResult> results =
      acceptance::run_battery(kSeed, kFast, kWorkers);
  return results;
}

const CriterionResult& criterion(int id) {
  for (const CriterionResult& r : battery())
    if (r.id == id) return r;
  FAIL("criterion " << id << " missing from battery");
  static CriterionResult none{};
  return none;
}

void assert_criterion(int id) {
  const CriterionResult& r = criterion(id);
  std::printf("criterion %2d  %-28s  %s\n", r.id, r.name.c_str(),
              r.pass() ? "PASS" : "FAIL");
  std::fflush(stdout);
  for (const auto& ch : r.checks) {
    INFO(r.name << " / " << ch.name << ": value " << ch.value << " "
                << ch.relation << " " << ch.bound);
    CHECK(ch.pass);
  }
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  REQUIRE(f.good());
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("criterion 1: pushed curves stay admissible") { assert_criterion(1); }

TEST_CASE("criterion 2: transversality dichotomy on curve family") {
  assert_criterion(2);
}

TEST_CASE("criterion 3: strip measures obey the linear cap") {
  assert_criterion(3);
}

TEST_CASE("criterion 4: cylinder distortion and gibbs bounds") {
  assert_criterion(4);
}

TEST_CASE("criterion 5: displacement partitions split mass") {
  assert_criterion(5);
}

TEST_CASE("criterion 6: deep return tail decays exponentially") {
  assert_criterion(6);
}

TEST_CASE("criterion 7: fiber exponents are positive") { assert_criterion(7); }

TEST_CASE("criterion 8: stopping time tails decay") { assert_criterion(8); }

TEST_CASE("criterion 9: limit laws hold for the control map") {
  assert_criterion(9);
}

TEST_CASE("criterion 10: coupled contraction certifies and pairs") {
  assert_criterion(10);
}

TEST_CASE("criterion 11: attracting cycle coexists with positive exponents") {
  assert_criterion(11);
}

TEST_CASE("criterion 12: byte-identical outputs across worker counts") {
  assert_criterion(12);

  namespace fs = std::filesystem;
  auto run_verify = [](const std::string& out, int workers) {
    std::string cmd = std::string(VIANA_CLI_PATH) +
                      " verify --suite fast --seed 7 --workers " +
                      std::to_string(workers) + " --out " + out +
                      " >/dev/null 2>&1";
    int rc = std::system(cmd.c_str());
    REQUIRE(rc != -1);
    return WEXITSTATUS(rc);
  };

  fs::remove_all("accept_w1");
  fs::remove_all("accept_w8");
  int rc1 = run_verify("accept_w1", 1);
  int rc8 = run_verify("accept_w8", 8);
  CHECK(rc1 == 0);
  CHECK(rc1 == rc8);
  for (const char* name : {"verify_results.csv", "verify_summary.txt"}) {
    INFO("file " << name);
    CHECK(slurp(fs::path("accept_w1") / name) ==
          slurp(fs::path("accept_w8") / name));
  }
}
