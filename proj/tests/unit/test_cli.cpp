#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "capfield/cli.hpp"
#include "capfield/support.hpp"

using namespace capfield;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "capfield");
  std::ostringstream out;
  std::ostringstream err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

fs::path scratch_dir() {
  const fs::path d = fs::temp_directory_path() / "capfield_cli_unit";
  fs::create_directories(d);
  return d;
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("density table") {
    const fs::path path = scratch_dir() / "table.csv";
    const SupportSolution s = solve_support_pointcharge(1, 2);
    const ExternalField q = ExternalField::point_charge(1, 2);
    const DensityProfile p = pointcharge_profile(
        1, 2, s.alpha0, PhiGrid::for_cap(SphericalCap::south(s.alpha0), 8));
    cli::emit_density_table(p, q, path);
    const std::string text = slurp(path);
    CHECK(text.rfind("phi,f,Q,U,weighted_potential\n", 0) == 0);
    CHECK(text.find('\r') == std::string::npos);
    std::istringstream lines(text);
    std::string line;
    std::getline(lines, line);
    int rows = 0;
    while (std::getline(lines, line)) {
      ++rows;
      const double w = std::stod(line.substr(line.rfind(',') + 1));
      CHECK(w == doctest::Approx(s.robin_constant).epsilon(1e-9));
    }
    CHECK(rows == 8);
    cli::emit_density_table(p, q, path);
    CHECK(slurp(path) == text);
    CHECK_THROWS(cli::emit_density_table(p, q, scratch_dir() / "missing" / "t.csv"));
  }

  TEST_CASE("no-field table has constant weighted potential") {
    const fs::path path = scratch_dir() / "zero.csv";
    const Result r = run({"density", "--field", "zero", "--alpha", "1.0471975511965976",
                          "--nodes", "8", "--table", path.string()});
    REQUIRE(r.code == cli::kOk);
    std::istringstream lines(slurp(path));
    std::string line;
    std::getline(lines, line);
    int rows = 0;
    const double w = kPi / (kPi - kPi / 3 + std::sqrt(3.0) / 2);
    while (std::getline(lines, line)) {
      ++rows;
      CHECK(std::count(line.begin(), line.end(), ',') == 4);
      CHECK(std::abs(std::stod(line.substr(line.rfind(',') + 1)) - w) < 1e-4);
    }
    CHECK(rows == 8);
  }

  TEST_CASE("summaries") {
    const Result cap = run({"capacity", "--alpha", "1.5707963267948966"});
    CHECK(cap.code == cli::kOk);
    CHECK(cap.out.find("\"command\": \"capacity\"") != std::string::npos);
    CHECK(cap.out.find("timings") == std::string::npos);
    const Result timed = run({"capacity", "--alpha", "1", "--timings"});
    CHECK(timed.out.find("timings") != std::string::npos);
    const Result sup = run({"support", "--field", "point-charge", "--q", "1", "--h", "2"});
    CHECK(sup.code == cli::kOk);
    CHECK(sup.out.find("TranscendentalRoot") != std::string::npos);
    CHECK(run({"support", "--field", "point-charge", "--q", "1", "--h", "2"}).out == sup.out);
  }

  TEST_CASE("exit codes") {
    CHECK(run({}).code == cli::kValidation);
    CHECK(run({"capacity", "--alpha", "30deg"}).code == cli::kValidation);
    CHECK(run({"capacity"}).code == cli::kValidation);
    CHECK(run({"support", "--field", "quadratic", "--a", "-1", "--b", "0", "--c", "0"}).code ==
          cli::kValidation);
    const Result neg = run({"support", "--field", "point-charge", "--q", "1", "--h", "-1"});
    CHECK(neg.code == cli::kValidation);
    CHECK(neg.err.find("fields.validate") != std::string::npos);
    // h = 1 is the charge at the north pole.
    const Result np = run({"support", "--field", "point-charge", "--q", "1", "--h", "1"});
    CHECK(np.code == cli::kOk);
    CHECK(np.out.find("1.12172462386330") != std::string::npos);
    const Result slow = run({"oracle", "--field", "point-charge", "--q", "1", "--h", "2",
                             "--method", "energy", "--nodes", "32", "--iterations", "3"});
    CHECK(slow.code == cli::kNonconvergence);
    CHECK(slow.err.find("oracle.discrete_energy_minimize") != std::string::npos);
    CHECK(run({"--help"}).code == cli::kOk);
  }

  TEST_CASE("pin and check") {
    const fs::path golden = scratch_dir() / "gonchar.json";
    CHECK(run({"gonchar", "--q", "1", "--pin", golden.string()}).code == cli::kOk);
    CHECK(run({"gonchar", "--q", "1", "--check", golden.string()}).code == cli::kOk);
    const Result bad = run({"gonchar", "--q", "2", "--check", golden.string()});
    CHECK(bad.code == cli::kCheckMismatch);
    CHECK(bad.err.find("h_plus") != std::string::npos);
  }
}
