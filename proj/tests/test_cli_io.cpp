#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "fraclap/cli_io.hpp"
#include "fraclap/error.hpp"

using namespace fraclap;
namespace fs = std::filesystem;

namespace {

const char* kGap = R"({
  "experiment": "gap-sweep",
  "seed": 3,
  "output_dir": "OUT",
  "parameters": {"n": 1, "orders": [0.4], "r": 0.25, "half_widths": [0.5, 1, 2, 4], "spacing": 0.001953125}
})";

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("fraclap_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string with_dir(std::string text, const fs::path& dir) {
  text.replace(text.find("OUT"), 3, dir.string());
  return text;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

ErrorKind kind_of(const std::string& text, const std::string& hint = {}) {
  try {
    parse_config(text, hint);
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::io;  // sentinel: no error
}

int run_cli(const std::string& args) {
  const int rc = std::system((std::string(FRACLAP_CLI) + " " + args + " > /dev/null 2>&1").c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

}  // namespace

TEST(ParseConfig, EmptyDocumentNeedsExperiment) {
  try {
    parse_config("");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::validation);
    EXPECT_NE(std::string(e.what()).find("experiment"), std::string::npos);
  }
  auto cfg = parse_config("{}", "forms");
  EXPECT_EQ(cfg.experiment, Experiment::forms);
  EXPECT_EQ(cfg.seed, 0u);
  EXPECT_EQ(cfg.parameters["pad_factor"], 8);
  EXPECT_EQ(cfg.parameters["J"], 256);
}

TEST(ParseConfig, ViolatedPreconditionIsNamed) {
  try {
    parse_config(R"({"experiment": "bn-minimize", "parameters": {"m": 0.4, "s": 0.5}})");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::validation);
    EXPECT_NE(std::string(e.what()).find("s < m"), std::string::npos) << e.what();
  }
}

TEST(ParseConfig, MalformedDocumentReportsPosition) {
  try {
    parse_config("{\n  \"experiment\": \"forms\",\n  \"seed\": ,\n}");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::parse);
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
}

TEST(ParseConfig, UnknownKeysRejected) {
  EXPECT_EQ(kind_of(R"({"experiment": "forms", "colour": 1})"), ErrorKind::validation);
  EXPECT_EQ(kind_of(R"({"experiment": "forms", "parameters": {"mm": 1}})"), ErrorKind::validation);
  EXPECT_EQ(kind_of(R"({"experiment": "nope"})"), ErrorKind::validation);
  EXPECT_EQ(kind_of(R"({"experiment": "forms"})", "gap-sweep"), ErrorKind::validation);
}

TEST(ParseConfig, RoundTrip) {
  const auto a = parse_config(kGap);
  const std::string text = serialize(a);
  const auto b = parse_config(text);
  EXPECT_EQ(a, b);
  EXPECT_EQ(serialize(b), text);
}

TEST(ParseConfig, FuzzedParametersOnlyRaiseStructuredErrors) {
  std::mt19937_64 rng(2024);
  const std::vector<nlohmann::ordered_json> values = {
      -1, 0, 1, 2, 3, 7, 1e9, -0.5, 0.3, 0.5, 1.5, "x", true, nullptr, nlohmann::ordered_json::array(),
      nlohmann::ordered_json::array({-1.0, 0.0}), nlohmann::ordered_json::array({"a"}), nlohmann::ordered_json::object()};
  std::uniform_int_distribution<std::size_t> pick_v(0, values.size() - 1);
  int rejected = 0;
  for (const auto& name : experiment_names()) {
    const auto defaults = parse_config("{}", name).parameters;
    std::vector<std::string> keys;
    for (const auto& [k, v] : defaults.items()) keys.push_back(k);
    std::uniform_int_distribution<std::size_t> pick_k(0, keys.size() - 1);
    for (int t = 0; t < 60; ++t) {
      nlohmann::ordered_json doc = {{"experiment", name}, {"parameters", nlohmann::ordered_json::object()}};
      for (int j = 0; j < 2; ++j) doc["parameters"][keys[pick_k(rng)]] = values[pick_v(rng)];
      try {
        parse_config(doc.dump());
      } catch (const Error& e) {
        EXPECT_TRUE(e.kind() == ErrorKind::validation || e.kind() == ErrorKind::parse) << e.what();
        ++rejected;
      }
    }
  }
  EXPECT_GT(rejected, 100);
}

TEST(Run, GapSweepShapeHashesAndDeterminism) {
  const auto dir = scratch("gap");
  auto cfg = parse_config(with_dir(kGap, dir));
  auto man = run(cfg);
  EXPECT_TRUE(man.passed());
  ASSERT_EQ(man.files.size(), 1u);
  const std::string csv = slurp(dir / "gap.csv");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 5);
  EXPECT_EQ(man.files[0].sha256, sha256_hex(csv));
  EXPECT_EQ(man.files[0].bytes, csv.size());
  auto doc = nlohmann::ordered_json::parse(slurp(dir / "manifest.json"));
  EXPECT_EQ(doc["files"][0]["sha256"], man.files[0].sha256);
  EXPECT_EQ(doc["config"]["experiment"], "gap-sweep");

  auto again = run(cfg);
  EXPECT_EQ(again.files[0].sha256, man.files[0].sha256);
  fs::remove_all(dir);
}

TEST(Run, BnMinimizeRecordsSobolevComparison) {
  const auto dir = scratch("bn");
  auto cfg = parse_config(R"({"experiment": "bn-minimize", "parameters": {"points": 256}})");
  cfg.output_dir = dir.string();
  auto man = run(cfg);
  EXPECT_TRUE(man.findings.contains("below_sobolev"));
  EXPECT_TRUE(man.findings.contains("sobolev_ref"));
  EXPECT_TRUE(fs::exists(dir / "bn.csv"));
  EXPECT_TRUE(fs::exists(dir / "minimizer.csv"));
  fs::remove_all(dir);
}

TEST(Sha256, KnownDigest) {
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Cli, ExitCodes) {
  const auto dir = scratch("cli");
  fs::create_directories(dir);
  {
    std::ofstream(dir / "ok.json") << with_dir(kGap, dir / "out");
    std::ofstream(dir / "bad.json") << R"({"parameters": {"r": -1}})";
    std::ofstream(dir / "broken.json") << "{";
  }
  EXPECT_EQ(run_cli("gap-sweep --config " + (dir / "ok.json").string() + " --threads 2"), 0);
  EXPECT_EQ(run_cli("gap-sweep --config " + (dir / "bad.json").string()), 1);
  EXPECT_EQ(run_cli("gap-sweep --config " + (dir / "broken.json").string()), 1);
  EXPECT_EQ(run_cli("gap-sweep --config " + (dir / "missing.json").string()), 3);
  EXPECT_EQ(run_cli("bogus --config " + (dir / "ok.json").string()), 1);
  std::ofstream(dir / "file") << "x";
  EXPECT_EQ(run_cli("gap-sweep --config " + (dir / "ok.json").string() + " --out " + (dir / "file" / "sub").string()), 3);
  fs::remove_all(dir);
}
