#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>
#include <unistd.h>

#include "doctest.h"

namespace fs = std::filesystem;

namespace {

struct ScratchRoot {
  fs::path dir = fs::temp_directory_path() / ("kadlab_cli_" + std::to_string(::getpid()));
  ScratchRoot() {
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  ~ScratchRoot() {
    std::error_code ignored;
    fs::remove_all(dir, ignored);
  }
};

const fs::path& scratch_root() {
  static const ScratchRoot root;
  return root.dir;
}

fs::path scratch(const std::string& name) {
  const fs::path dir = scratch_root() / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

int run(const std::string& args, const fs::path& log = {}) {
  std::string command = std::string(KADLAB_CLI) + " " + args;
  command += log.empty() ? " > /dev/null 2>&1" : " > " + log.string() + " 2>&1";
  const int status = std::system(command.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::vector<std::string>> read_csv(const fs::path& path) {
  std::vector<std::vector<std::string>> rows;
  std::ifstream in(path);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

std::size_t column(const std::vector<std::string>& header, const std::string& name) {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  FAIL("missing column " << name);
  return 0;
}

}  // namespace

TEST_CASE("help lists every documented flag") {
  const fs::path log = scratch("help") / "help.txt";
  CHECK(run("simulate --help", log) == 0);
  const std::string text = slurp(log);
  for (const char* flag : {"--profile", "--n", "--scheme", "--compare", "--churn", "--lookups", "--runs", "--seed",
                           "--out", "--config"}) {
    CHECK(text.find(flag) != std::string::npos);
  }
  CHECK(run("model --help", log) == 0);
  CHECK(slurp(log).find("--h-max") != std::string::npos);
}

TEST_CASE("usage errors exit with status one") {
  CHECK(run("simulate --bogus") == 1);
  CHECK(run("") == 1);
  CHECK(run("simulate --profile chord") == 1);
  CHECK(run("simulate --scheme random") == 1);
  CHECK(run("bounds --points 0 --out " + scratch("bad").string()) == 1);
}

TEST_CASE("bit gain table for the smallest bucket") {
  const fs::path out = scratch("bitgain");
  REQUIRE(run("bitgain --l-min 0 --l-max 2 --k 1 --k 2 --out " + out.string()) == 0);
  const auto rows = read_csv(out / "bitgain.csv");
  REQUIRE(rows.size() == 7);
  const auto& header = rows.front();
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    CHECK(row[column(header, "dominates")] == "true");
    if (row[column(header, "l")] == "0" && row[column(header, "k")] == "2") {
      CHECK(std::stod(row[column(header, "standard")]) == doctest::Approx(5.0 / 3.0).epsilon(1e-6));
      CHECK(std::stod(row[column(header, "diverse")]) == doctest::Approx(2.0).epsilon(1e-9));
    }
    if (row[column(header, "k")] == "1") {
      CHECK(row[column(header, "standard")] == row[column(header, "diverse")]);
    }
  }
}

TEST_CASE("bounds for a single size give one row") {
  const fs::path out = scratch("bounds");
  REQUIRE(run("bounds --profile kad --sizes 5000 --out " + out.string()) == 0);
  const auto rows = read_csv(out / "bounds.csv");
  REQUIRE(rows.size() == 2);
  CHECK(rows[0] == std::vector<std::string>{"profile", "n", "bound"});
  CHECK(rows[1][0] == "kad");
  CHECK(rows[1][1] == "5000");
}

TEST_CASE("a one-node simulation reports one hop") {
  const fs::path out = scratch("single");
  REQUIRE(run("simulate --profile mdht --n 1 --runs 2 --lookups 5 --out " + out.string()) == 0);
  const auto rows = read_csv(out / "summary.csv");
  REQUIRE(rows.size() == 2);
  CHECK(std::stod(rows[1][column(rows[0], "mean")]) == 1.0);
  CHECK(fs::exists(out / "cdf.csv"));
}

TEST_CASE("simulation outputs are byte-identical across reruns") {
  const fs::path a = scratch("rerun_a");
  const fs::path b = scratch("rerun_b");
  const std::string args = "simulate --profile kad --n 600 --runs 2 --lookups 40 --compare --seed 5 --out ";
  REQUIRE(run(args + a.string()) == 0);
  REQUIRE(run(args + b.string()) == 0);
  for (const char* file : {"summary.csv", "cdf.csv"}) {
    CHECK(slurp(a / file) == slurp(b / file));
    CHECK_FALSE(slurp(a / file).empty());
  }
  const auto rows = read_csv(a / "summary.csv");
  REQUIRE(rows.size() == 3);
  CHECK_FALSE(rows[2][column(rows[0], "gain_pct")].empty());
}

TEST_CASE("flags override the configuration file") {
  const fs::path out = scratch("config");
  const fs::path cfg = out / "run.toml";
  std::ofstream(cfg) << "profile = \"kad\"\nn = 900\nruns = 2\nlookups = 20\nscheme = \"diverse\"\n";
  REQUIRE(run("simulate --config " + cfg.string() + " --n 300 --out " + out.string()) == 0);
  const auto rows = read_csv(out / "summary.csv");
  REQUIRE(rows.size() == 2);
  CHECK(rows[1][column(rows[0], "profile")] == "kad");
  CHECK(rows[1][column(rows[0], "scheme")] == "diverse");
  CHECK(rows[1][column(rows[0], "n")] == "300");
  CHECK(run("simulate --config " + (out / "missing.toml").string()) == 1);
}

TEST_CASE("the model can be cut after one hop") {
  const fs::path out = scratch("model");
  REQUIRE(run("model --profile kad --n 2000 --scheme standard --h-max 1 --out " + out.string()) == 0);
  const auto rows = read_csv(out / "model_cdf.csv");
  REQUIRE(rows.size() == 2);
  CHECK(rows[1][column(rows[0], "hops")] == "1");
  CHECK(fs::exists(out / "model_summary.csv"));
}

TEST_CASE("joining a model with itself shows no gap") {
  const fs::path out = scratch("compare");
  REQUIRE(run("model --profile kad --n 2000 --out " + out.string()) == 0);
  const fs::path cdf = out / "model_cdf.csv";
  REQUIRE(run("compare --sim " + cdf.string() + " --model " + cdf.string() + " --out " + out.string()) == 0);
  const auto rows = read_csv(out / "model_vs_sim.csv");
  REQUIRE(rows.size() >= 2);
  for (std::size_t r = 1; r < rows.size(); ++r) {
    CHECK(std::stod(rows[r][column(rows[0], "relative_mean_gap")]) == 0.0);
    CHECK(std::stod(rows[r][column(rows[0], "max_cdf_gap")]) == 0.0);
  }
  CHECK(run("compare --sim " + (out / "absent.csv").string() + " --model " + cdf.string() + " --out " +
            out.string()) == 2);
}
