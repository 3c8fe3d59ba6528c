#include "hmindex/cli.hpp"

#include <doctest.h>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

using namespace hmindex;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("hmindex_cli_" + name);
  fs::remove_all(dir);
  return dir;
}

int shell(const std::string& args, const std::string& env = {}) {
  const std::string cmd = env + " " + HMINDEX_CLI_PATH + " " + args + " > /dev/null 2>&1";
  const int raw = std::system(cmd.c_str());
  return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
}

nlohmann::json load(const fs::path& p) {
  std::ifstream in(p);
  return nlohmann::json::parse(in);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("config validation") {
    RunConfig c;
    c.command = "certify-energy";
    c.output_path = scratch("validate").string();
    CHECK_NOTHROW(validate(c));
    RunConfig bad = c;
    bad.resolution = 4;
    CHECK_THROWS_AS(validate(bad), std::invalid_argument);
    bad = c;
    bad.degree = 0;
    CHECK_THROWS_AS(validate(bad), std::invalid_argument);
    bad = c;
    bad.command = "explode";
    CHECK_THROWS_AS(validate(bad), std::invalid_argument);
    bad = c;
    bad.map = "klein_bottle";
    CHECK_THROWS_AS(validate(bad), std::invalid_argument);
    bad = c;
    bad.sphere = 7;
    CHECK_THROWS_AS(validate(bad), std::invalid_argument);
    std::ostringstream log;
    bad.command = "explode";
    CHECK(run(bad, log) == kExitUsage);
  }

  TEST_CASE("usage errors exit with status 2") {
    CHECK(shell("") == 2);
    CHECK(shell("frobnicate") == 2);
    CHECK(shell("certify-energy --resolution 4 --output " + scratch("usage").string()) == 2);
    CHECK(shell("certify-energy --map nowhere --output " + scratch("usage").string()) == 2);
    CHECK(shell("certify-energy --degree abc") == 2);
    CHECK(shell("--help") == 0);
  }

  TEST_CASE("certify-energy on the identity of S^3") {
    const fs::path out = scratch("energy");
    CHECK(shell("certify-energy --map identity3 --degree 1 --seed 42 --resolution 48 --output " + out.string()) == 0);
    const auto cert = load(out / "certificate_energy_identity3.json");
    CHECK(cert["certified_bound"] == 4);
    CHECK(cert["seed"] == 42);
    CHECK(cert["resolution"] == 48);
    const auto report = load(out / "certify-energy.json");
    CHECK(report["verdict"] == "PASS");
    CHECK(report.contains("tolerances"));
    CHECK(report["config"]["map"] == "identity3");
  }

  TEST_CASE("degree-two identities fail standalone") {
    const fs::path out = scratch("identities");
    CHECK(shell("verify-identities --degree 2 --sphere 2 --resolution 16 --output " + out.string()) == 1);
    const auto report = load(out / "verify-identities.json");
    bool hessian_failed = false;
    for (const auto& c : report["checks"]) {
      if (c["name"] == "S2.k2.hessian_identity") hessian_failed = c["status"] == "FAIL";
    }
    CHECK(hessian_failed);
    CHECK(shell("verify-identities --degree 1 --sphere 3 --resolution 16 --output " + out.string()) == 0);
  }

  TEST_CASE("flow-decay on the clifford torus") {
    const fs::path out = scratch("flow");
    CHECK(shell("flow-decay --map clifford --t-max 0.5 --flow-resolution 12 --samples 6 --output " + out.string()) == 0);
    const std::string csv = slurp(out / "flow_clifford_volume.csv");
    CHECK(csv.rfind("t,value\n", 0) == 0);
    CHECK(csv.find("# verdict: PASS") != std::string::npos);
  }

  TEST_CASE("output directory from the environment") {
    const fs::path out = scratch("env");
    CHECK(shell("certify-volume --map clifford --resolution 12", "HMINDEX_OUTPUT_DIR=" + out.string()) == 0);
    CHECK(fs::exists(out / "certificate_volume_clifford.json"));
  }
}
