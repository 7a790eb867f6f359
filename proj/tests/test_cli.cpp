#include <catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

const char* cli_path() { return MINIHES_CLI_PATH; }

int run(const std::string& args) {
  std::string cmd = std::string(cli_path()) + " " + args + " > /dev/null 2>&1";
  int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

fs::path make_workdir() {
  auto dir = fs::temp_directory_path() / "minihes_cli_test";
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write_ratings(const fs::path& path, int n, unsigned seed) {
  std::ofstream out(path);
  unsigned s = seed;
  for (int k = 0; k < n; ++k) {
    s = s * 1664525u + 1013904223u;
    int u = (s >> 8) % 20;
    int i = (s >> 16) % 15;
    double r = 1.0 + (s >> 24) % 5;
    out << u << ',' << i << '_' << 'x' << ',' << r << '\n';
  }
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace

TEST_CASE("split writes three files and is seed-deterministic") {
  auto dir = make_workdir();
  write_ratings(dir / "ratings.csv", 200, 1);

  REQUIRE(run("split --input " + (dir / "ratings.csv").string() + " --seed 5 --out " +
              (dir / "a").string()) == 0);
  REQUIRE(fs::exists(dir / "a" / "train.tsv"));
  REQUIRE(fs::exists(dir / "a" / "val.tsv"));
  REQUIRE(fs::exists(dir / "a" / "test.tsv"));
  REQUIRE(fs::exists(dir / "a" / "split_manifest.json"));

  REQUIRE(run("split --input " + (dir / "ratings.csv").string() + " --seed 5 --out " +
              (dir / "b").string()) == 0);
  REQUIRE(slurp(dir / "a" / "train.tsv") == slurp(dir / "b" / "train.tsv"));
  REQUIRE(slurp(dir / "a" / "test.tsv") == slurp(dir / "b" / "test.tsv"));
}

TEST_CASE("split rejects bad ratios with nonzero exit") {
  auto dir = make_workdir();
  write_ratings(dir / "ratings.csv", 50, 2);
  REQUIRE(run("split --input " + (dir / "ratings.csv").string() +
              " --ratios 0.5 0.2 0.2 --out " + dir.string()) != 0);
}

TEST_CASE("train produces report, trace, snapshot, manifest") {
  auto dir = make_workdir();
  write_ratings(dir / "ratings.csv", 300, 3);
  REQUIRE(run("split --input " + (dir / "ratings.csv").string() + " --out " +
              dir.string()) == 0);

  std::string sets = " --train " + (dir / "train.tsv").string() + " --val " +
                     (dir / "val.tsv").string() + " --test " +
                     (dir / "test.tsv").string();
  auto out = (dir / "run").string();
  REQUIRE(run("train" + sets +
              " --optimizer mini-hes --f 4 --lambda 0.03 --gamma 1.0 "
              "--tau 0.1 --max-epochs 5 --out " + out) == 0);
  REQUIRE(fs::exists(dir / "run" / "report.json"));
  REQUIRE(fs::exists(dir / "run" / "trace.csv"));
  REQUIRE(fs::exists(dir / "run" / "factors.bin"));
  auto report = nlohmann::json::parse(slurp(dir / "run" / "report.json"));
  REQUIRE(report["epochs_run"].get<int>() <= 5);

  // one-epoch run has a one-line trace (plus header)
  auto out1 = (dir / "run1").string();
  REQUIRE(run("train" + sets + " --max-epochs 1 --f 4 --out " + out1) == 0);
  auto report1 = nlohmann::json::parse(slurp(dir / "run1" / "report.json"));
  REQUIRE(report1["epochs_run"].get<int>() == 1);

  // same schema for a first-order optimizer
  auto out2 = (dir / "run2").string();
  REQUIRE(run("train" + sets +
              " --optimizer adam --f 4 --max-epochs 3 --out " + out2) == 0);
  auto report2 = nlohmann::json::parse(slurp(dir / "run2" / "report.json"));
  REQUIRE(report2.contains("test_rmse"));
  REQUIRE(report2.contains("test_mae"));
}

TEST_CASE("config file with flag overrides") {
  auto dir = make_workdir();
  write_ratings(dir / "ratings.csv", 200, 4);
  REQUIRE(run("split --input " + (dir / "ratings.csv").string() + " --out " +
              dir.string()) == 0);
  {
    std::ofstream cfg(dir / "config.json");
    cfg << R"({"optimizer":"adam","f":4,"max_epochs":2,"lr":0.01})";
  }
  std::string sets = " --train " + (dir / "train.tsv").string() + " --val " +
                     (dir / "val.tsv").string() + " --test " +
                     (dir / "test.tsv").string();
  auto out = (dir / "cfgrun").string();
  REQUIRE(run("train" + sets + " --config " +
              (dir / "config.json").string() + " --max-epochs 4 --out " +
              out) == 0);
  auto manifest =
      nlohmann::json::parse(slurp(dir / "cfgrun" / "train_manifest.json"));
  // flag overrides file, file overrides defaults
  REQUIRE(manifest["config"]["max_epochs"].get<int>() == 4);
  REQUIRE(manifest["config"]["optimizer"].get<std::string>() == "adam");
  REQUIRE(manifest["config"]["f"].get<int>() == 4);
}

TEST_CASE("verify passes clean and fails when corrupted") {
  REQUIRE(run("verify --instances 4 --seed 3") == 0);
  REQUIRE(run("verify --instances 4 --seed 3 --corrupt-operator") != 0);
}

TEST_CASE("bench emits a speedup table") {
  auto dir = make_workdir();
  REQUIRE(run("bench --synthetic 2000 --threads 1 2 --repeats 3 --epochs 1 "
              "--f 3 --out " + dir.string()) == 0);
  REQUIRE(fs::exists(dir / "speedup.csv"));
  auto csv = slurp(dir / "speedup.csv");
  REQUIRE(csv.find("Dataset,Thread,Time,Speedup") == 0);
}
