// Copyright 2026 The RQM Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "cli.h"

#include <sys/wait.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include "gmock/gmock.h"
#include "gtest/gtest.h"
#include "json.hpp"
#include "output.h"
#include "rqm/accountant.h"
#include "rqm/exact_distribution.h"

namespace rqm::cli {
namespace {

namespace fs = std::filesystem;
using ::testing::HasSubstr;

struct Result {
  int code = 0;
  std::string out;
  std::string err;
};

Result Invoke(std::initializer_list<std::string> args) {
  std::vector<std::string> storage = {"rqm"};
  storage.insert(storage.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const std::string& s : storage) argv.push_back(s.c_str());
  std::ostringstream out;
  std::ostringstream err;
  const int code =
      Run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

struct Csv {
  std::vector<std::string> metadata;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

std::vector<std::string> Split(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  return cells;
}

Csv ParseCsv(const std::string& text) {
  Csv csv;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line.rfind("# ", 0) == 0) {
      csv.metadata.push_back(line.substr(2));
    } else if (csv.header.empty()) {
      csv.header = Split(line);
    } else {
      csv.rows.push_back(Split(line));
    }
  }
  return csv;
}

std::string ReadFile(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

fs::path TempDir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("rqm_cli_test_" + name);
  fs::remove_all(dir);
  return dir;
}

TEST(OutputTest, FormatDoubleRoundTrips) {
  EXPECT_EQ(FormatDouble(0.42), "0.42");
  EXPECT_EQ(FormatDouble(-3.0), "-3");
  EXPECT_EQ(FormatDouble(HUGE_VAL), "inf");
  const double v = 0.1 + 0.2;
  EXPECT_EQ(std::stod(FormatDouble(v)), v);
}

TEST(OutputTest, GitBlobSha1MatchesGit) {
  // `printf 'hello\n' | git hash-object --stdin`
  EXPECT_EQ(GitBlobSha1("hello\n"), "ce013625030ba8dba906f756967f9e9ca394464a");
  // The empty blob.
  EXPECT_EQ(GitBlobSha1(""), "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391");
}

TEST(CliTest, NoSubcommandIsValidationError) {
  EXPECT_EQ(Invoke({}).code, kExitValidation);
  EXPECT_EQ(Invoke({"frobnicate"}).code, kExitValidation);
  EXPECT_EQ(Invoke({"--help"}).code, kExitOk);
}

TEST(PmfCommandTest, SixteenLevelsAtClip) {
  const Result r = Invoke({"pmf", "--mech", "rqm", "--x", "1.5", "--c", "1.5",
                           "--delta", "1.5", "--m", "16", "--q", "0.42"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const Csv csv = ParseCsv(r.out);
  EXPECT_THAT(csv.header, ::testing::ElementsAre("index", "level", "probability"));
  ASSERT_EQ(csv.rows.size(), 16u);
  std::vector<double> p;
  double total = 0.0;
  double beyond_clip = 0.0;
  for (const auto& row : csv.rows) {
    p.push_back(std::stod(row[2]));
    total += p.back();
    if (std::stod(row[1]) > 1.5) beyond_clip += p.back();
  }
  EXPECT_NEAR(total, 1.0, 1e-12);
  // Peak at the level just below the input, rising toward it from the far
  // side, with real mass in the extended range above c.
  const auto peak = std::max_element(p.begin(), p.end()) - p.begin();
  EXPECT_EQ(peak, 11);
  for (int i = 2; i <= 11; ++i) EXPECT_GT(p[i], p[i - 1]);
  EXPECT_GT(beyond_clip, 0.3);
  EXPECT_THAT(csv.metadata, ::testing::Contains(HasSubstr("format_version=1")));
  EXPECT_THAT(csv.metadata, ::testing::Contains(HasSubstr("seed=")));
}

TEST(PmfCommandTest, TwoLevelsClosedForm) {
  const Result r =
      Invoke({"pmf", "--x", "0.25", "--c", "1", "--delta", "1", "--m", "2"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const Csv csv = ParseCsv(r.out);
  ASSERT_EQ(csv.rows.size(), 2u);
  EXPECT_NEAR(std::stod(csv.rows[0][2]), (2.0 - 0.25) / 4.0, 1e-15);
  EXPECT_NEAR(std::stod(csv.rows[1][2]), (0.25 + 2.0) / 4.0, 1e-15);
}

TEST(PmfCommandTest, OracleColumnAgrees) {
  const Result r = Invoke({"pmf", "--x", "-0.3", "--m", "12", "--q", "0.3",
                           "--delta", "0.66", "--oracle"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const Csv csv = ParseCsv(r.out);
  ASSERT_EQ(csv.header.size(), 4u);
  EXPECT_EQ(csv.header[3], "oracle");
  for (const auto& row : csv.rows) {
    EXPECT_NEAR(std::stod(row[2]), std::stod(row[3]), 1e-12);
  }
  EXPECT_EQ(Invoke({"pmf", "--x", "0", "--m", "21", "--oracle"}).code,
            kExitValidation);
}

TEST(PmfCommandTest, PbmAndErrors) {
  const Result r = Invoke({"pmf", "--mech", "pbm", "--x", "1", "--theta",
                           "0.25", "--m", "16"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_EQ(ParseCsv(r.out).rows.size(), 17u);
  const Result bad = Invoke({"pmf", "--x", "0", "--q", "1.5"});
  EXPECT_EQ(bad.code, kExitValidation);
  EXPECT_THAT(bad.err, HasSubstr("q"));
  EXPECT_EQ(Invoke({"pmf", "--x", "2"}).code, kExitValidation);
  EXPECT_EQ(Invoke({"pmf", "--x", "0", "--mech", "gauss"}).code,
            kExitValidation);
}

TEST(PmfCommandTest, WritesFile) {
  const fs::path dir = TempDir("pmf");
  const fs::path file = dir / "p.csv";
  ASSERT_EQ(Invoke({"pmf", "--x", "0", "--out", file.string()}).code, kExitOk);
  EXPECT_EQ(ParseCsv(ReadFile(file)).rows.size(), 16u);
}

double BoundValue(const Result& r, const std::string& key) {
  for (const auto& row : ParseCsv(r.out).rows) {
    if (row[0] == key) return std::stod(row[1]);
  }
  ADD_FAILURE() << "missing " << key;
  return 0.0;
}

TEST(BoundCommandTest, ValuesAndDomination) {
  const Result r = Invoke({"bound", "--c", "1", "--delta", "1", "--m", "16",
                           "--q", "0.42", "--compare-numeric"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const double bound = BoundValue(r, "bound");
  EXPECT_NEAR(bound, 9.011, 2e-3);
  EXPECT_NEAR(bound,
              std::log(2 * 0.58 * 0.58 * 2) + 16 * std::log(1 / 0.58), 1e-12);
  EXPECT_LT(BoundValue(r, "max_divergence"), bound);

  const Result doubled = Invoke({"bound", "--c", "1", "--delta", "2"});
  EXPECT_LT(BoundValue(doubled, "bound"), bound);

  const Result extreme = Invoke({"bound", "--q", "0.99"});
  ASSERT_EQ(extreme.code, kExitOk);
  const double big = BoundValue(extreme, "bound");
  EXPECT_TRUE(std::isfinite(big));
  EXPECT_GT(big, bound);
}

TEST(DivergenceCommandTest, OrdersAndSplits) {
  const Result r = Invoke({"divergence", "--alpha", "inf", "--n", "5"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const Csv csv = ParseCsv(r.out);
  ASSERT_EQ(csv.rows.size(), 2u);
  EXPECT_EQ(csv.rows[0][0], "rqm");
  EXPECT_EQ(csv.rows[0][1], "inf");
  EXPECT_LT(std::stod(csv.rows[0][3]), std::stod(csv.rows[1][3]));

  const Result two = Invoke({"divergence", "--mech", "rqm", "--n", "1"});
  const double expected = RenyiDivergence(
      RqmPmf(1.0, RqmParams(1.0, 1.0, 16, 0.42)),
      RqmPmf(-1.0, RqmParams(1.0, 1.0, 16, 0.42)), 2.0);
  EXPECT_NEAR(std::stod(ParseCsv(two.out).rows[0][3]), expected, 1e-12);

  EXPECT_EQ(Invoke({"divergence", "--alpha", "1"}).code, kExitValidation);
  EXPECT_EQ(Invoke({"divergence", "--alpha", "two"}).code, kExitValidation);
  EXPECT_EQ(Invoke({"divergence", "--n", "4", "--split-k", "4"}).code,
            kExitValidation);
  EXPECT_EQ(Invoke({"divergence", "--n", "4", "--split-k", "1",
                    "--random-split"})
                .code,
            kExitValidation);
  const Result a = Invoke({"divergence", "--n", "6", "--random-split",
                           "--seed", "3"});
  const Result b = Invoke({"divergence", "--n", "6", "--random-split",
                           "--seed", "3"});
  EXPECT_EQ(a.code, kExitOk);
  EXPECT_EQ(a.out, b.out);
}

TEST(DivergenceCommandTest, UnderflowIsConsistencyFailure) {
  const Result r = Invoke({"divergence", "--mech", "rqm", "--n", "100", "--q",
                           "0.9999", "--m", "40"});
  EXPECT_EQ(r.code, kExitConsistency);
  EXPECT_THAT(r.err, HasSubstr("underflow"));
}

TEST(SweepCommandTest, StandardPresetOrdering) {
  const fs::path dir = TempDir("sweep");
  const Result r =
      Invoke({"sweep", "--preset", "standard", "--out-dir", dir.string()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const Csv devices = ParseCsv(ReadFile(dir / "standard_devices.csv"));
  EXPECT_THAT(devices.header, ::testing::ElementsAre("n", "eps_rqm", "eps_pbm"));
  ASSERT_EQ(devices.rows.size(), 40u);
  for (const auto& row : devices.rows) {
    EXPECT_LT(std::stod(row[1]), std::stod(row[2])) << "n=" << row[0];
  }
  const Csv order = ParseCsv(ReadFile(dir / "standard_order_n1.csv"));
  ASSERT_EQ(order.rows.size(), 999u);
  EXPECT_EQ(order.header[0], "alpha");
  EXPECT_TRUE(fs::exists(dir / "standard_order_n40.csv"));
}

TEST(SweepCommandTest, CustomAxesAndErrors) {
  const Result r = Invoke({"sweep", "--axis", "devices", "--from", "1", "--to",
                           "4", "--alpha", "3"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_EQ(ParseCsv(r.out).rows.size(), 4u);
  const Result order = Invoke({"sweep", "--axis", "order", "--from", "2",
                               "--to", "10", "--step", "2", "--n", "3"});
  ASSERT_EQ(order.code, kExitOk) << order.err;
  EXPECT_EQ(ParseCsv(order.out).rows.size(), 5u);
  EXPECT_EQ(Invoke({"sweep", "--axis", "devices"}).code, kExitValidation);
  EXPECT_EQ(Invoke({"sweep", "--axis", "colour", "--from", "1", "--to", "2"})
                .code,
            kExitValidation);
  EXPECT_EQ(Invoke({"sweep", "--preset", "huge"}).code, kExitValidation);
}

TEST(SimulateCommandTest, RoundsZeroRejected) {
  const Result r = Invoke({"simulate", "--rounds", "0", "--out-dir",
                           TempDir("zero").string()});
  EXPECT_EQ(r.code, kExitValidation);
  EXPECT_THAT(r.err, HasSubstr("rounds"));
}

TEST(SimulateCommandTest, OutputsAndDeterminism) {
  const fs::path a = TempDir("sim_a");
  const fs::path b = TempDir("sim_b");
  for (const fs::path& dir : {a, b}) {
    const Result r = Invoke({"simulate", "--rounds", "30", "--out-dir",
                             dir.string()});
    ASSERT_EQ(r.code, kExitOk) << r.err;
  }
  for (const char* file : {"noisefree.csv", "rqm.csv", "pbm.csv",
                           "comparison.csv", "manifest.json"}) {
    ASSERT_TRUE(fs::exists(a / file)) << file;
    EXPECT_EQ(ReadFile(a / file), ReadFile(b / file)) << file;
  }
  const Csv rqm = ParseCsv(ReadFile(a / "rqm.csv"));
  EXPECT_THAT(rqm.header,
              ::testing::ElementsAre("round", "loss", "accuracy",
                                     "bits_per_device", "mechanism", "seed"));
  ASSERT_EQ(rqm.rows.size(), 30u);
  EXPECT_EQ(rqm.rows[0][3], "24");
  EXPECT_EQ(rqm.rows[0][4], "rqm");
  EXPECT_EQ(rqm.rows[0][5], "2026");

  const auto manifest = nlohmann::json::parse(ReadFile(a / "manifest.json"));
  EXPECT_EQ(manifest["format_version"], kFormatVersion);
  EXPECT_EQ(manifest["config"]["rounds"], 30);
  EXPECT_EQ(manifest["config_hash"],
            GitBlobSha1(manifest["config"].dump()));
  EXPECT_EQ(manifest["outputs"].size(), 4u);
  EXPECT_THAT(ReadFile(a / "comparison.csv"),
              HasSubstr("config_hash=" + manifest["config_hash"].get<std::string>()));
}

TEST(SimulateCommandTest, ConfigFileAndOverrides) {
  const fs::path dir = TempDir("sim_cfg");
  fs::create_directories(dir);
  const fs::path ini = dir / "run.ini";
  std::ofstream(ini) << "[simulate]\nrounds = 5\nmechanisms = rqm,pbm\n"
                        "seed = 11\nclip = 0.5\n";
  const Result r = Invoke({"--config", ini.string(), "simulate", "--seed",
                           "12", "--out-dir", (dir / "out").string()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto manifest =
      nlohmann::json::parse(ReadFile(dir / "out" / "manifest.json"));
  EXPECT_EQ(manifest["config"]["rounds"], 5);
  EXPECT_EQ(manifest["config"]["master_seed"], 12);
  EXPECT_EQ(manifest["config"]["clip"], 0.5);
  EXPECT_FALSE(fs::exists(dir / "out" / "noisefree.csv"));
  EXPECT_TRUE(fs::exists(dir / "out" / "pbm.csv"));
}

TEST(SelftestCommandTest, PassesAndNegativeControlFails) {
  const Result ok = Invoke({"selftest"});
  EXPECT_EQ(ok.code, kExitOk) << ok.out;
  EXPECT_THAT(ok.out, HasSubstr("selftest passed"));
  const Result bad = Invoke({"selftest", "--inject-fault"});
  EXPECT_EQ(bad.code, kExitSelftest);
  EXPECT_THAT(bad.out, HasSubstr("FAIL oracle-equivalence"));
  EXPECT_THAT(bad.out, HasSubstr("x="));
}

TEST(BinaryTest, ExitCodesSurviveTheProcessBoundary) {
  const std::string bin = RQM_CLI_BINARY;
  auto status = [&](const std::string& args) {
    const int raw = std::system((bin + " " + args + " > /dev/null 2>&1").c_str());
    return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  };
  EXPECT_EQ(status("bound"), kExitOk);
  EXPECT_EQ(status("pmf --x 5"), kExitValidation);
  EXPECT_EQ(status("selftest --inject-fault"), kExitSelftest);
}

}  // namespace
}  // namespace rqm::cli
