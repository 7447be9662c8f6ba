// Copyright 2026 The lipgeo Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "lipgeo/cli.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "gmock/gmock.h"
#include "gtest/gtest.h"

namespace lipgeo::cli {
namespace {

namespace fs = std::filesystem;
using ::testing::HasSubstr;

const std::string kExample1 = std::string(LIPGEO_DATA_DIR) + "/example1.json";
const std::string kIdentity = std::string(LIPGEO_DATA_DIR) + "/identity.json";

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome Invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "lipgeo");
  std::vector<const char*> argv;
  for (const std::string& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code =
      RunMain(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() /
           (std::string("lipgeo_cli_") + info->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string Path(const std::string& name) const { return (dir_ / name).string(); }

  std::string Write(const std::string& name, const std::string& text) const {
    WriteFile(Path(name), text);
    return Path(name);
  }

  fs::path dir_;
};

std::vector<std::string> Lines(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) lines.push_back(line);
  return lines;
}

std::vector<std::string> Fields(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream in(line);
  for (std::string f; std::getline(in, f, ',');) out.push_back(f);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

TEST_F(CliTest, AnalyzeExample1) {
  const Outcome r = Invoke({"analyze", kExample1});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const Json j = Json::parse(r.out);
  EXPECT_NEAR(j["sigma_max"].get<double>(), 7.4012, 5e-5);
  EXPECT_NEAR(j["l_star"][0].get<double>(), 0.7984, 1e-4);
  EXPECT_NEAR(j["c1"].get<double>(), 0.0793650793651, 1e-12);
  EXPECT_THAT(r.out, HasSubstr("7.4012"));
}

TEST_F(CliTest, AnalyzeIdentityIsDegenerate) {
  const Outcome r = Invoke({"analyze", kIdentity});
  EXPECT_EQ(r.code, kExitDegenerate);
  EXPECT_EQ(Json::parse(r.err)["error"], "DegenerateSpectrum");
  EXPECT_TRUE(Json::parse(r.out)["degenerate"].get<bool>());
}

TEST_F(CliTest, AnalyzeRejectsBadInput) {
  EXPECT_EQ(Invoke({"analyze", Write("bad.json", "{\"p_xy\": [[0.5, 0.5]")}).code,
            kExitInputError);
  EXPECT_EQ(Invoke({"analyze", Path("missing.json")}).code, kExitInputError);
  const Outcome both = Invoke(
      {"analyze", Write("both.json",
                        R"({"p_xy": [[0.5, 0], [0, 0.5]], "p_y": [0.5, 0.5]})")});
  EXPECT_EQ(both.code, kExitInputError);
  EXPECT_EQ(Json::parse(both.err)["error"], "ParseError");
  const Outcome ragged =
      Invoke({"analyze", Write("ragged.json", R"({"p_xy": [[0.5, 0.25], [0.25]]})")});
  EXPECT_EQ(ragged.code, kExitInputError);
  const Outcome zero = Invoke(
      {"analyze", Write("zero.json", R"({"p_xy": [[0.5, 0], [0.5, 0]]})")});
  EXPECT_EQ(zero.code, kExitInputError);
  EXPECT_EQ(Json::parse(zero.err)["error"], "ZeroMarginal");
}

TEST_F(CliTest, DesignExample1FirstLip) {
  const std::string out = Path("mech.json");
  const Outcome r = Invoke({"design", kExample1, "--approach", "first",
                         "--constraint", "lip", "--epsilon", "0.01", "--out", out});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_THAT(r.out, HasSubstr("lip_first"));
  const Json j = Json::parse(ReadFile(out));
  EXPECT_NEAR(j["p_y_given_u"][0][0].get<double>(), 0.225831, 1e-5);
  EXPECT_NEAR(j["p_y_given_u"][0][1].get<double>(), 0.774169, 1e-5);
  EXPECT_TRUE(j["validity"].get<bool>());
  for (const char* key : {"p_u", "directions", "p_x_given_u", "p_xyu",
                          "exact_utility", "exact_lip", "exact_maxlift",
                          "approx_utility"}) {
    EXPECT_TRUE(j.contains(key)) << key;
  }
}

TEST_F(CliTest, DesignRejectsNonPositiveBudget) {
  EXPECT_EQ(Invoke({"design", kExample1, "--epsilon", "0", "--out", Path("m.json")}).code,
            kExitInputError);
  EXPECT_EQ(Invoke({"design", kExample1, "--approach", "third"}).code,
            kExitInputError);
  EXPECT_EQ(Invoke({"design", kIdentity, "--epsilon", "0.01"}).code, kExitDegenerate);
}

TEST_F(CliTest, DesignUsesBudgetFromInstance) {
  const Outcome r = Invoke({"design", kExample1});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_DOUBLE_EQ(Json::parse(r.out)["epsilon"].get<double>(), 0.01);
}

TEST_F(CliTest, DesignOutOfRangeStillSucceeds) {
  const Outcome r = Invoke({"design", kExample1, "--epsilon", "0.09"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_FALSE(Json::parse(r.out)["validity"].get<bool>());
}

TEST_F(CliTest, DesignSecondMaxLiftRespectsBudget) {
  const Outcome r = Invoke({"design", kExample1, "--approach", "second",
                         "--constraint", "maxlift", "--epsilon", "0.02"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_LE(Json::parse(r.out)["exact_maxlift"].get<double>(), 0.02 + 1e-9);
}

// example1.json declares eps = 0.01; the mechanism's own budget governs.
TEST_F(CliTest, DesignThenVerifyRoundTrips) {
  for (const char* approach : {"first", "second"}) {
    for (const char* constraint : {"lip", "maxlift"}) {
      const std::string out = Path(std::string(approach) + constraint + ".json");
      ASSERT_EQ(Invoke({"design", kExample1, "--approach", approach, "--constraint",
                     constraint, "--epsilon", "0.03", "--out", out})
                    .code,
                kExitOk);
      const Outcome v = Invoke({"verify", kExample1, out});
      EXPECT_EQ(v.code, kExitOk) << v.out << v.err;
      EXPECT_THAT(v.out, HasSubstr("PASS"));
    }
  }
}

TEST_F(CliTest, VerifyRejectsInvalidAndLeakyMechanisms) {
  const Outcome design = Invoke({"design", kExample1, "--epsilon", "0.02"});
  ASSERT_EQ(design.code, kExitOk);
  Json j = Json::parse(design.out);

  Json bad_pu = j;
  bad_pu["p_u"] = {0.6, 0.6};
  const Outcome invalid =
      Invoke({"verify", kExample1, Write("bad_pu.json", bad_pu.dump())});
  EXPECT_EQ(invalid.code, kExitInputError);
  EXPECT_EQ(Json::parse(invalid.err)["error"], "NotNormalized");

  Json leaky = j;
  leaky["epsilon"] = 0.01;
  leaky.erase("directions");
  const Outcome fail = Invoke({"verify", kExample1, Write("leaky.json", leaky.dump())});
  EXPECT_EQ(fail.code, kExitAuditFailure);
  EXPECT_THAT(fail.out, HasSubstr("LeakageExceeded"));

  EXPECT_EQ(Invoke({"verify", kExample1, Write("junk.json", "[1, 2")}).code,
            kExitInputError);
}

TEST_F(CliTest, SweepMatchesClosedForm) {
  const std::string out = Path("sweep.csv");
  const Outcome r = Invoke({"sweep", kExample1, "--eps-start", "0.005", "--eps-end",
                         "0.05", "--eps-steps", "10", "--oracle", "off", "--out",
                         out});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const std::vector<std::string> lines = Lines(ReadFile(out));
  ASSERT_EQ(lines.size(), 11u);
  EXPECT_EQ(lines[0], kSweepHeader);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::vector<std::string> f = Fields(lines[i]);
    ASSERT_EQ(f.size(), 16u) << lines[i];
    const double eps = std::stod(f[0]);
    const double p2 = std::stod(f[6]);
    EXPECT_LT(std::abs(p2 / (15.5771 * (std::exp(eps) + std::exp(-eps) - 2)) - 1),
              1e-3);
    EXPECT_EQ(f[14], "");
    EXPECT_EQ(f[15], "true");
  }
  EXPECT_DOUBLE_EQ(std::stod(Fields(lines.back())[0]), 0.05);
}

TEST_F(CliTest, SweepSingleStep) {
  const Outcome r = Invoke({"sweep", kExample1, "--eps-start", "0.01", "--eps-end",
                         "0.01", "--eps-steps", "1"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_EQ(Lines(r.out).size(), 2u);
}

TEST_F(CliTest, SweepRejectsBadRange) {
  EXPECT_EQ(Invoke({"sweep", kExample1, "--eps-start", "0.05", "--eps-end", "0.01"}).code,
            kExitInputError);
  EXPECT_EQ(Invoke({"sweep", kExample1, "--eps-start", "0", "--eps-end", "0.01"}).code,
            kExitInputError);
  EXPECT_EQ(Invoke({"sweep", kExample1, "--eps-steps", "0"}).code, kExitInputError);
  EXPECT_EQ(Invoke({"sweep", kExample1, "--oracle", "maybe"}).code, kExitInputError);
}

TEST_F(CliTest, SweepWithOracle) {
  const Outcome r =
      Invoke({"sweep", kExample1, "--eps-start", "0.01", "--eps-end", "0.02",
           "--eps-steps", "2", "--oracle", "on", "--oracle-resolution", "1000",
           "--svg", Path("sweep.svg")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const std::vector<std::string> lines = Lines(r.out);
  ASSERT_EQ(lines.size(), 3u);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::vector<std::string> f = Fields(lines[i]);
    const double oracle = std::stod(f[14]);
    const double p2 = std::stod(f[6]);
    EXPECT_LE(std::abs(oracle - p2) / p2, 0.10);
  }
  EXPECT_THAT(ReadFile(Path("sweep.svg")), HasSubstr("<svg"));
}

TEST_F(CliTest, OutputsAreDeterministic) {
  const std::vector<std::string> sweep = {"sweep", kExample1, "--eps-steps", "7"};
  const Outcome a = Invoke(sweep);
  setenv("LIPGEO_THREADS", "3", 1);
  const Outcome b = Invoke(sweep);
  unsetenv("LIPGEO_THREADS");
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(Invoke({"design", kExample1}).out, Invoke({"design", kExample1}).out);
}

TEST_F(CliTest, BitsConvertsInformationOnly) {
  const Json nats = Json::parse(Invoke({"design", kExample1}).out);
  const Json bits = Json::parse(Invoke({"design", kExample1, "--bits"}).out);
  EXPECT_EQ(bits["units"], "bits");
  EXPECT_NEAR(bits["exact_utility"].get<double>(),
              nats["exact_utility"].get<double>() / std::numbers::ln2, 1e-12);
  EXPECT_EQ(bits["exact_lip"], nats["exact_lip"]);
  EXPECT_EQ(bits["epsilon"], nats["epsilon"]);
}

TEST_F(CliTest, UsageErrors) {
  EXPECT_EQ(Invoke({}).code, kExitInputError);
  EXPECT_EQ(Invoke({"frobnicate"}).code, kExitInputError);
  EXPECT_EQ(Invoke({"design", kExample1, "--nope"}).code, kExitInputError);
  const Outcome help = Invoke({"--help"});
  EXPECT_EQ(help.code, kExitOk);
  EXPECT_THAT(help.out, HasSubstr("sweep"));
}

}  // namespace
}  // namespace lipgeo::cli
