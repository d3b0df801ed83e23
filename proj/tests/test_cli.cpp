#include "cli.hpp"

#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;
using namespace agestruct;

namespace {

struct Scratch {
  fs::path dir;
  explicit Scratch(const std::string& name) : dir(fs::temp_directory_path() / ("agestruct_cli_" + name)) {
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  ~Scratch() { fs::remove_all(dir); }
  std::string operator/(const std::string& file) const { return (dir / file).string(); }
};

// Runs the installed binary; returns its exit status and fills `log` with stderr.
int run_cli(const std::string& args, const Scratch& tmp, std::string* log = nullptr) {
  const std::string err = tmp / "stderr.txt";
  const int raw = std::system((std::string(AGESTRUCT_CLI) + " " + args + " > " + (tmp / "stdout.txt") + " 2> " + err).c_str());
  if (log) {
    std::ifstream in(err);
    std::stringstream s;
    s << in.rdbuf();
    *log = s.str();
  }
  return WEXITSTATUS(raw);
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

const std::string kLogistic = std::string(AGESTRUCT_MODELS) + "/logistic.ini";
const std::string kShell = std::string(AGESTRUCT_MODELS) + "/shell.ini";

}  // namespace

TEST_CASE("trace writes the branch and one profile per point") {
  Scratch tmp("trace");
  REQUIRE(run_cli("trace --model " + kLogistic + " --max-points 20 --out " + (tmp / "b.csv"), tmp) == 0);
  std::ifstream in(tmp / "b.csv");
  const std::vector<BranchRow> rows = read_branch_table(in);
  REQUIRE(rows.size() == 21);
  CHECK(rows[0].n == 1.0);
  CHECK(rows[0].eps == 0.0);
  for (const BranchRow& r : rows) {
    CHECK(r.eq72_residual <= 1e-6);
    CHECK(fs::exists(cli::profile_path(tmp / "b.csv", r.index, TableFormat::Csv)));
  }
  CHECK(run_cli("verify --input " + (tmp / "b.csv") + " --model " + kLogistic, tmp) == 0);
}

TEST_CASE("verify flags a perturbed n") {
  Scratch tmp("verify");
  REQUIRE(run_cli("trace --model " + kLogistic + " --max-points 6 --out " + (tmp / "b.csv"), tmp) == 0);
  std::stringstream text(slurp(tmp / "b.csv"));
  std::vector<BranchRow> rows = read_branch_table(text);
  rows[4].n += 1e-2;
  {
    std::ofstream out(tmp / "b.csv");
    write_branch_table(out, rows, TableFormat::Csv);
  }
  std::string log;
  CHECK(run_cli("verify --input " + (tmp / "b.csv"), tmp, &log) == 1);
  CHECK(log.find("branch identity n*r(Q_u) = 1 violated at index 4") != std::string::npos);
}

TEST_CASE("verify replays stored profiles") {
  Scratch tmp("replay");
  REQUIRE(run_cli("trace --model " + kLogistic + " --max-points 4 --format txt --out " + (tmp / "b.txt"), tmp) == 0);
  CHECK(run_cli("verify --input " + (tmp / "b.txt") + " --model " + kLogistic, tmp) == 0);
  // Scale one stored profile: the columns still agree, the profile does not.
  const std::string profile = cli::profile_path(tmp / "b.txt", 2, TableFormat::Text);
  std::ifstream in(profile);
  DensityField u = read_profile(in);
  in.close();
  u.values *= 1.01;
  {
    std::ofstream out(profile);
    write_profile(out, u, TableFormat::Text);
  }
  std::string log;
  CHECK(run_cli("verify --input " + (tmp / "b.txt") + " --model " + kLogistic, tmp, &log) == 1);
  CHECK(log.find("stored profile at index 2") != std::string::npos);
}

TEST_CASE("normalize is idempotent") {
  Scratch tmp("normalize");
  std::string log;
  REQUIRE(run_cli("normalize --model " + kShell + " --out " + (tmp / "n.ini"), tmp, &log) == 0);
  CHECK(log.rfind("r_before ", 0) == 0);
  REQUIRE(run_cli("normalize --model " + (tmp / "n.ini"), tmp, &log) == 0);
  const double r = std::stod(log.substr(std::string("r_before ").size()));
  CHECK(std::abs(r - 1.0) <= 1e-10);
  // Without --out the model goes to stdout and parses back.
  const double cb = load_model(tmp / "n.ini").birth_scale;
  CHECK(std::abs(parse_model(slurp(tmp / "stdout.txt")).birth_scale - cb) <= 1e-10 * cb);
}

TEST_CASE("fixedpoint writes profiles and the shell report") {
  Scratch tmp("fixedpoint");
  REQUIRE(run_cli("fixedpoint --model " + kShell + " --out " + (tmp / "fp.csv"), tmp) == 0);
  for (const char* f : {"fp.csv", "fp_birth.csv", "fp_profile.csv", "fp_shell.csv"}) CHECK(fs::exists(tmp / f));
  CHECK(slurp(tmp / "fp.csv").find("status,converged") != std::string::npos);
}

TEST_CASE("exit status 2 for input problems") {
  Scratch tmp("errors");
  std::string log;
  CHECK(run_cli("trace --model " + (tmp / "missing.ini"), tmp, &log) == 2);
  CHECK(log.find("cannot read") != std::string::npos);

  {
    std::ofstream bad(tmp / "bad.ini");
    bad << "[domain]\na_max = 1\nfoo = 2\n";
  }
  CHECK(run_cli("trace --model " + (tmp / "bad.ini"), tmp, &log) == 2);
  CHECK(log.find("line 3") != std::string::npos);

  CHECK(run_cli("trace --model " + kLogistic + " --tol -1", tmp) == 2);
  CHECK(run_cli("trace --model " + kLogistic + " --n-cap 0.5", tmp) == 2);
  CHECK(run_cli("explode", tmp) == 2);
  CHECK(run_cli("verify --input " + (tmp / "none.csv"), tmp) == 2);
}

TEST_CASE("invariant violations exit with status 1") {
  Scratch tmp("invariant");
  {
    // D may not be negative; the model fails validation after parsing.
    std::ofstream bad(tmp / "neg.ini");
    bad << "[domain]\na_max = 1\n[coefficients]\nD = -1\ng = 0\nh = 0\nmu = 1\nb = 1\n";
  }
  std::string log;
  CHECK(run_cli("trace --model " + (tmp / "neg.ini"), tmp, &log) == 1);
  CHECK(log.find("D must be positive") != std::string::npos);
}

TEST_CASE("in-process run reports the same status as the binary") {
  Scratch tmp("inprocess");
  cli::RunConfig c;
  c.command = cli::Command::Normalize;
  c.model_path = kShell;
  std::ostringstream out, log;
  CHECK(cli::run(c, out, log) == cli::kOk);
  CHECK(out.str().find("[normalization]") != std::string::npos);
  c.tau0 = 5.0;
  c.tau1 = 1.0;
  CHECK(cli::run(c, out, log) == cli::kIoFailure);
}
