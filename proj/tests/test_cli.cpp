#include "dbalign/harness.hpp"
#include "dbalign/io.hpp"

#include <gtest/gtest.h>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <string>

using namespace dbalign;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out;
};

Run run(const std::string& args) {
  const std::string cmd = std::string(DBALIGN_CLI_PATH) + " " + args + " 2>/dev/null";
  Run r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  std::array<char, 4096> buf{};
  while (std::fgets(buf.data(), static_cast<int>(buf.size()), pipe)) r.out += buf.data();
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("dbalign_cli_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST(Cli, GenerateWritesFiles) {
  const auto dir = scratch("gen");
  const auto r = run("generate --n 4 --rho 0.6 --d 2 --seed 7 --out " + dir.string());
  ASSERT_EQ(r.code, 0) << r.out;
  for (const char* f : {"a.csv", "b.csv", "truth.csv"}) EXPECT_TRUE(fs::exists(dir / f)) << f;
}

TEST(Cli, AlignMapMatchesInMemoryTrial) {
  const auto dir = scratch("map");
  ASSERT_EQ(run("generate --n 40 --rho 0.6 --d 6 --seed 7 --out " + dir.string()).code, 0);
  const auto r = run("align-map --a " + (dir / "a.csv").string() + " --b " + (dir / "b.csv").string() +
                     " --rho 0.6 --d 6 --truth " + (dir / "truth.csv").string());
  ASSERT_EQ(r.code, 0);
  const auto report = nlohmann::json::parse(r.out);

  const auto trial = run_trial({40, CanonicalModel::constant(0.6, 6), Algorithm::Map, {}, 7, true}, 0);
  EXPECT_EQ(report["exact"].get<bool>(), trial.map->exact);
  EXPECT_EQ(report["false_negatives"].get<std::size_t>(), trial.map->false_negatives);
  EXPECT_EQ(report["total_score"].get<double>(), trial.map->total_score);
  EXPECT_EQ(report["predicted"], io::matching_to_json(trial.map->predicted));
}

TEST(Cli, AlignBhtWindowAndExplicitTau) {
  const auto dir = scratch("bht");
  ASSERT_EQ(run("generate --n 50 --rho 0.9 --d 60 --seed 2 --out " + dir.string()).code, 0);
  const std::string base = "align-bht --a " + (dir / "a.csv").string() + " --b " + (dir / "b.csv").string() +
                           " --rho 0.9 --d 60 --truth " + (dir / "truth.csv").string();
  const auto windowed = run(base + " --eps-fn 5 --eps-fp 5");
  ASSERT_EQ(windowed.code, 0);
  const auto j = nlohmann::json::parse(windowed.out);
  EXPECT_TRUE(j.contains("threshold"));
  const auto explicit_tau = run(base + " --tau 1e9");
  ASSERT_EQ(explicit_tau.code, 0);
  EXPECT_EQ(nlohmann::json::parse(explicit_tau.out)["false_negatives"].get<int>(), 50);
  // A weak model has an empty window: runtime failure, not a usage error.
  EXPECT_EQ(run("align-bht --a " + (dir / "a.csv").string() + " --b " + (dir / "b.csv").string() +
                " --rho 0.1 --d 60 --eps-fn 1 --eps-fp 1")
                .code,
            1);
}

TEST(Cli, CanonicalizeMatchesMeasures) {
  const auto dir = scratch("canon");
  CorrelationModel m = CorrelationModel::from_canonical({0.1});
  m.sigma_a(0, 0) = 4.0;
  m.sigma_ab(0, 0) = 1.2;
  io::write_text(dir / "m.json", io::model_to_json(m).dump());
  const auto r = run("canonicalize --model " + (dir / "m.json").string());
  ASSERT_EQ(r.code, 0);
  const auto j = nlohmann::json::parse(r.out);
  const auto c = canonicalize(m);
  EXPECT_EQ(j["rho"].get<std::vector<double>>(), c.model.rho());
  EXPECT_EQ(j["I"].get<double>(), mutual_information(c.model));
  EXPECT_EQ(j["sigma"].get<double>(), sigma(c.model));
}

TEST(Cli, SweepAndReport) {
  const auto dir = scratch("sweep");
  const auto r = run("sweep --n 10 --rho 0.8 --d 2,8 --trials 3 --seed 1 --threads 2 --out " + dir.string());
  ASSERT_EQ(r.code, 0);
  EXPECT_TRUE(fs::exists(dir / "cells.csv"));
  EXPECT_TRUE(fs::exists(dir / "reports" / "g1_t2.json"));
  const auto before = io::read_text(dir / "plot.svg");
  fs::remove(dir / "plot.svg");
  ASSERT_EQ(run("report --in " + dir.string()).code, 0);
  EXPECT_EQ(io::read_text(dir / "plot.svg"), before);
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(run("generate --n 4 --rho 0.6 --d 2").code, 2);           // missing --out
  EXPECT_EQ(run("generate --n 4 --bogus 1 --out x").code, 2);          // unknown flag
  EXPECT_EQ(run("generate --n 4 --rho 1.0 --d 2 --out /tmp/x").code, 2);  // invalid model
  EXPECT_EQ(run("align-map --a /nonexistent/a.csv --b /nonexistent/b.csv --rho 0.5 --d 1").code, 1);
  EXPECT_EQ(run("report --in /nonexistent").code, 1);
}
