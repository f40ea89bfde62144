#include <gtest/gtest.h>

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "support.hpp"
#include "json.hpp"

namespace fs = std::filesystem;

namespace {

struct CliRun {
  int status;
  std::string output;
};

// Runs the CLI from `cwd`, capturing stdout and stderr together.
CliRun cli(const fs::path& cwd, const std::string& args) {
  const fs::path log = cwd / ".cli_output";
  const std::string cmd = "cd '" + cwd.string() + "' && '" + std::string(LRISO_CLI_PATH) + "' " + args + " > '" +
                          log.string() + "' 2>&1";
  const int raw = std::system(cmd.c_str());
  std::ifstream in(log);
  std::stringstream ss;
  ss << in.rdbuf();
  fs::remove(log);
  return {WIFEXITED(raw) ? WEXITSTATUS(raw) : -1, ss.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> lines(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::string> out;
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

std::vector<double> column(const fs::path& p) {
  std::vector<double> v;
  const auto ls = lines(p);
  for (std::size_t i = 1; i < ls.size(); ++i) v.push_back(std::stod(ls[i]));
  return v;
}

std::set<std::string> entries(const fs::path& dir) {
  std::set<std::string> s;
  for (const auto& e : fs::directory_iterator(dir)) s.insert(e.path().filename().string());
  return s;
}

// Every file except the manifest (timestamps) and timings must match.
void expect_same_outputs(const fs::path& a, const fs::path& b) {
  ASSERT_EQ(entries(a), entries(b));
  for (const auto& name : entries(a)) {
    if (name == "manifest.json" || name == "timings.json") continue;
    if (name.ends_with(".csv") && name.find("sweep") != std::string::npos) continue;  // wall clock column
    if (name == "scaling.csv") continue;
    EXPECT_EQ(slurp(a / name), slurp(b / name)) << name;
  }
}

const char* kEmbed = "embed --variant low-rank --input blobs --landmarks 8 --dim 2 --seed 3";

}  // namespace

TEST(CliEmbed, WritesEmbeddingOfExpectedShape) {
  const auto dir = lriso::test::scratch_dir("cli_embed");
  const CliRun r = cli(dir, std::string(kEmbed) + " --out run1");
  ASSERT_EQ(r.status, 0) << r.output;
  const auto ls = lines(dir / "run1" / "embedding.csv");
  ASSERT_EQ(ls.size(), 101u);
  for (std::size_t i = 1; i < ls.size(); ++i) EXPECT_EQ(std::count(ls[i].begin(), ls[i].end(), ','), 1);
  for (const char* f : {"manifest.json", "labels.csv", "spectrum_before.csv", "spectrum_after.csv", "config.json"})
    EXPECT_TRUE(fs::exists(dir / "run1" / f)) << f;
  const auto m = nlohmann::json::parse(slurp(dir / "run1" / "manifest.json"));
  EXPECT_EQ(m["command"], "embed");
  EXPECT_EQ(m["seed"], 3);
  EXPECT_EQ(m["tool_version"], "0.1.0");
  EXPECT_EQ(m["config"]["landmarks"], "8");
  EXPECT_EQ(m["config"]["lrr-lambda"], "0.02");
  EXPECT_EQ(m["input_checksum"].get<std::string>().size(), 16u);
  // nothing outside --out
  EXPECT_EQ(entries(dir), (std::set<std::string>{"run1"}));
}

TEST(CliEmbed, Deterministic) {
  const auto dir = lriso::test::scratch_dir("cli_det");
  ASSERT_EQ(cli(dir, std::string(kEmbed) + " --out a").status, 0);
  ASSERT_EQ(cli(dir, std::string(kEmbed) + " --out b").status, 0);
  EXPECT_EQ(slurp(dir / "a" / "embedding.csv"), slurp(dir / "b" / "embedding.csv"));
}

TEST(CliEmbed, UsageErrorsExitTwo) {
  const auto dir = lriso::test::scratch_dir("cli_usage");
  CliRun r = cli(dir, "embed --variant classic --input blobs --dim 0 --out x");
  EXPECT_EQ(r.status, 2) << r.output;
  EXPECT_EQ(cli(dir, "embed --variant nope --input blobs --out x").status, 2);
  EXPECT_EQ(cli(dir, "embed --input blobs --landmarks eight --out x").status, 2);
  EXPECT_EQ(cli(dir, "embed --input blobs").status, 2);
  EXPECT_EQ(cli(dir, "embed --input blobs --out x --bogus 1").status, 2);
  EXPECT_EQ(cli(dir, "frobnicate").status, 2);
  EXPECT_EQ(cli(dir, "--help").status, 0);
  EXPECT_EQ(entries(dir), std::set<std::string>{});
}

TEST(CliEmbed, RuntimeErrorsNameTheStage) {
  const auto dir = lriso::test::scratch_dir("cli_runtime");
  CliRun r = cli(dir, "embed --input missing.csv --out x");
  EXPECT_EQ(r.status, 1) << r.output;
  // coincident observations break the neighbour graph
  std::ofstream csv(dir / "dup.csv");
  for (int i = 0; i < 20; ++i) csv << (i == 7 ? 6 : i) << ',' << (i == 7 ? 36 : i * i) << '\n';
  csv.close();
  r = cli(dir, "embed --input dup.csv --landmarks 4 --knn 3 --out y");
  EXPECT_EQ(r.status, 1) << r.output;
  EXPECT_NE(r.output.find("stage 'graph'"), std::string::npos) << r.output;
}

TEST(CliEmbed, ConfigFilePrecedence) {
  const auto dir = lriso::test::scratch_dir("cli_config");
  std::ofstream(dir / "run.cfg") << "# settings\nlandmarks = 6\nlrr_max_iter = 50\ndim = 3\n";
  ASSERT_EQ(cli(dir, "embed --input blobs --config run.cfg --dim 2 --out c").status, 0);
  const auto m = nlohmann::json::parse(slurp(dir / "c" / "manifest.json"));
  EXPECT_EQ(m["config"]["landmarks"], "6");      // file over default
  EXPECT_EQ(m["config"]["lrr-max-iter"], "50");  // underscore spelling accepted
  EXPECT_EQ(m["config"]["dim"], "2");            // flag over file
  EXPECT_EQ(m["config"]["knn"], "10");           // default
  std::ofstream(dir / "bad.cfg") << "nonsense = 1\n";
  EXPECT_EQ(cli(dir, "embed --input blobs --config bad.cfg --out d").status, 2);
}

TEST(CliEval, ReportsAccuracy) {
  const auto dir = lriso::test::scratch_dir("cli_eval");
  ASSERT_EQ(cli(dir, "embed --input blobs --landmarks 16 --seed 3 --out run").status, 0);
  CliRun r = cli(dir, "eval --run run");
  ASSERT_EQ(r.status, 0) << r.output;
  EXPECT_EQ(r.output.rfind("accuracy 1 (100/100", 0), 0u) << r.output;
  r = cli(dir, "eval --run run --json");
  ASSERT_EQ(r.status, 0);
  const auto j = nlohmann::json::parse(r.output);
  EXPECT_EQ(j["accuracy"], 1.0);
  EXPECT_EQ(j["n_total"], 100);
  // eval writes only when asked
  EXPECT_EQ(entries(dir), (std::set<std::string>{"run"}));
  ASSERT_EQ(cli(dir, "eval --run run --out ev").status, 0);
  EXPECT_TRUE(fs::exists(dir / "ev" / "eval.json"));
  EXPECT_TRUE(fs::exists(dir / "ev" / "manifest.json"));
}

TEST(CliEval, UnlabeledRunFails) {
  const auto dir = lriso::test::scratch_dir("cli_unlabeled");
  std::ofstream csv(dir / "points.csv");
  for (int i = 0; i < 30; ++i) csv << i * 0.5 << ',' << (i % 7) * 0.3 << ',' << (i % 3) << '\n';
  csv.close();
  ASSERT_EQ(cli(dir, "embed --input points.csv --landmarks 4 --knn 5 --out run").status, 0);
  EXPECT_FALSE(fs::exists(dir / "run" / "labels.csv"));
  const CliRun r = cli(dir, "eval --run run");
  EXPECT_EQ(r.status, 1) << r.output;
  EXPECT_NE(r.output.find("label"), std::string::npos) << r.output;
}

TEST(CliSweep, LandmarkGrid) {
  const auto dir = lriso::test::scratch_dir("cli_sweep");
  const CliRun r = cli(dir, "sweep --input blobs --param landmarks --values 4,8,16 --variants low-rank,clustered --seeds 1,2 --out s");
  ASSERT_EQ(r.status, 0) << r.output;
  EXPECT_EQ(lines(dir / "s" / "sweep.csv").size(), 1u + 6u * 2u);
  EXPECT_TRUE(fs::exists(dir / "s" / "manifest.json"));
}

TEST(CliSweep, DimensionGridAndBadValues) {
  const auto dir = lriso::test::scratch_dir("cli_sweep_dim");
  const CliRun r = cli(dir, "sweep --input blobs --param dim --values 1,2,4,8 --landmarks 20 --variants low-rank --out s");
  ASSERT_EQ(r.status, 0) << r.output;
  const auto ls = lines(dir / "s" / "sweep.csv");
  ASSERT_EQ(ls.size(), 5u);
  EXPECT_NE(ls[4].find(",8,"), std::string::npos);
  EXPECT_EQ(cli(dir, "sweep --input blobs --param dim --values 1,,x --out t").status, 2);
  EXPECT_EQ(cli(dir, "sweep --input blobs --param dim --values '' --out t").status, 2);
  EXPECT_EQ(cli(dir, "sweep --input blobs --param colour --values 1 --out t").status, 2);
}

TEST(CliSpectrum, BothSpectraStartAtOne) {
  const auto dir = lriso::test::scratch_dir("cli_spectrum");
  ASSERT_EQ(cli(dir, "spectrum --input blobs --landmarks 8 --seed 3 --out sp").status, 0);
  const auto before = column(dir / "sp" / "spectrum_before.csv");
  const auto after = column(dir / "sp" / "spectrum_after.csv");
  ASSERT_FALSE(before.empty());
  ASSERT_FALSE(after.empty());
  EXPECT_EQ(before[0], 1.0);
  EXPECT_EQ(after[0], 1.0);
  // energy share of the top 5
  auto share = [](const std::vector<double>& v) {
    double top = 0, all = 0;
    for (std::size_t i = 0; i < v.size(); ++i) {
      const double x = std::max(v[i], 0.0);
      all += x;
      if (i < 5) top += x;
    }
    return top / all;
  };
  EXPECT_GE(share(after), share(before));

  ASSERT_EQ(cli(dir, "spectrum --input blobs --landmarks 8 --seed 3 --no-lrr --out sp2").status, 0);
  EXPECT_TRUE(fs::exists(dir / "sp2" / "spectrum_before.csv"));
  EXPECT_FALSE(fs::exists(dir / "sp2" / "spectrum_after.csv"));
  EXPECT_EQ(slurp(dir / "sp" / "spectrum_before.csv"), slurp(dir / "sp2" / "spectrum_before.csv"));
}

TEST(CliBench, ScalingCsvAndBadSizes) {
  const auto dir = lriso::test::scratch_dir("cli_bench");
  const CliRun r = cli(dir, "bench --input blobs --sizes 100,200 --landmarks 8 --out b");
  ASSERT_EQ(r.status, 0) << r.output;
  EXPECT_EQ(lines(dir / "b" / "scaling.csv").size(), 1u + 2u * 2u);
  EXPECT_EQ(cli(dir, "bench --input blobs --sizes 200,100 --out c").status, 2);
  EXPECT_EQ(cli(dir, "bench --input blobs --sizes 100,100 --out c").status, 2);
  EXPECT_EQ(cli(dir, "bench --input blobs --sizes ten --out c").status, 2);
}

TEST(CliRerun, ReproducesEveryCommand) {
  const auto dir = lriso::test::scratch_dir("cli_rerun");
  std::ofstream csv(dir / "points.csv");
  for (int i = 0; i < 40; ++i) csv << (i % 5) * 1.5 + 0.01 * i << ',' << (i % 4) * 0.7 << '\n';
  csv.close();
  const std::vector<std::pair<std::string, std::string>> commands{
      {"embed", std::string(kEmbed)},
      {"embed_csv", "embed --input points.csv --variant random-landmark --landmarks 10 --knn 6"},
      {"classic", "embed --input swiss:n=300 --variant classic --seed 4"},
      {"sweep", "sweep --input blobs --param landmarks --values 4,8 --variants low-rank --seeds 1,2"},
      {"spectrum", "spectrum --input blobs --landmarks 8"},
      {"bench", "bench --input blobs --sizes 100,200 --landmarks 8"},
  };
  for (const auto& [name, args] : commands) {
    ASSERT_EQ(cli(dir, args + " --out " + name).status, 0) << name;
    const CliRun r = cli(dir, "rerun --manifest " + name + "/manifest.json --out " + name + "_again");
    ASSERT_EQ(r.status, 0) << name << ": " << r.output;
    expect_same_outputs(dir / name, dir / (name + "_again"));
  }
  // an eval run replays against its embedding directory
  ASSERT_EQ(cli(dir, "eval --run embed --out ev").status, 0);
  ASSERT_EQ(cli(dir, "rerun --manifest ev/manifest.json --out ev_again").status, 0);
  EXPECT_EQ(slurp(dir / "ev" / "eval.json"), slurp(dir / "ev_again" / "eval.json"));

  // a changed input is detected
  std::ofstream(dir / "points.csv", std::ios::app) << "9,9\n";
  const CliRun r = cli(dir, "rerun --manifest embed_csv/manifest.json --out changed");
  EXPECT_EQ(r.status, 1) << r.output;
  EXPECT_EQ(cli(dir, "rerun --manifest nowhere.json --out z").status, 1);
  EXPECT_EQ(cli(dir, "rerun --out z").status, 2);
}
