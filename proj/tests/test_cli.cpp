#include "squarelab/cli.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace squarelab::cli;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Invocation {
  int code;
  std::string out;
  std::string err;
};

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("squarelab-cli-" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    ledger_ = (dir_ / "runs.jsonl").string();
  }
  void TearDown() override { fs::remove_all(dir_); }

  Invocation call(std::vector<std::string> args) const {
    args.insert(args.begin(), {"--ledger", ledger_});
    std::ostringstream out, err;
    const int code = run(args, out, err);
    return {code, out.str(), err.str()};
  }

  std::vector<ExperimentRecord> records() const { return Ledger(ledger_).read().records; }

  fs::path dir_;
  std::string ledger_;
};

const std::string kTree = SQUARELAB_DATA_DIR "/two_leaf.json";

}  // namespace

TEST_F(CliTest, ChiTwoLeaf) {
  const auto r = call({"chi", "--tree", kTree, "--set", "leaves=0", "--mode", "both"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const json j = json::parse(r.out);
  EXPECT_EQ(j["coeffs"], json({"0/1", "1/8", "3/8", "0/1"}));
  EXPECT_EQ(j["oracle_match"], true);
  const auto recs = records();
  ASSERT_EQ(recs.size(), 1u);
  EXPECT_EQ(recs[0].subcommand, "chi");
  EXPECT_EQ(recs[0].results.at("c2").exact, "3/8");
  EXPECT_EQ(recs[0].output, j);
  EXPECT_EQ(recs[0].params["tree"], kTree);
}

TEST_F(CliTest, CertificateFlag) {
  const auto r = call({"chi", "--tree", kTree, "--set", "leaves=0", "--certificate"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const json c = json::parse(r.out)["certificate"];
  EXPECT_EQ(c["dependency"], json({"1/1", "-2/1", "-8/1"}));
  EXPECT_EQ(c["rank"], 2);
  EXPECT_EQ(c["verified"], true);
}

TEST_F(CliTest, UsageErrors) {
  auto r = call({"chi", "--tree", kTree, "--set", "leaves=0", "--bogus"});
  EXPECT_EQ(r.code, kExitUsage);
  EXPECT_NE(r.err.find("Usage"), std::string::npos);
  EXPECT_TRUE(r.out.empty());
  EXPECT_EQ(call({"frobnicate"}).code, kExitUsage);
  EXPECT_EQ(call({}).code, kExitUsage);
  EXPECT_EQ(call({"eta", "--objective", "mart-eta"}).code, kExitUsage);
  EXPECT_EQ(call({"shift", "--set", "N=2;mask=0x100"}).code, kExitUsage);
  EXPECT_EQ(call({"chi", "--tree", (dir_ / "missing.json").string(), "--set", "leaves=0"}).code, kExitUsage);
  EXPECT_TRUE(records().empty());
}

TEST_F(CliTest, HelpAndVersion) {
  auto r = call({"--help"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("verify"), std::string::npos);
  r = call({"--version"});
  EXPECT_EQ(r.code, 0);
}

TEST_F(CliTest, DeterministicOutput) {
  const std::vector<std::vector<std::string>> commands = {
      {"eta", "--objective", "mart-eta", "--resolution", "3"},
      {"eta", "--objective", "shift-ratio", "--resolution", "5", "--mode", "anneal", "--iters", "500", "--seed", "9"},
      {"wavelet", "--filter", "db4", "--set", "N=2;cells=0,3", "--trials", "300", "--seed", "4", "--grid", "7"},
      {"tensor", "--set", "N=2;mask2d=0x8421"},
      {"shift", "--set", "N=3;cells=0,1,2,5"},
  };
  for (const auto& cmd : commands) {
    const auto a = call(cmd), b = call(cmd);
    EXPECT_EQ(a.code, kExitOk) << a.err;
    EXPECT_EQ(a.out, b.out) << cmd[0];
  }
  const auto recs = records();
  ASSERT_EQ(recs.size(), 2 * commands.size());
  for (std::size_t i = 0; i < recs.size(); i += 2) {
    json x = recs[i].to_json(), y = recs[i + 1].to_json();
    EXPECT_NE(x["id"], y["id"]);
    x.erase("id");
    x.erase("timestamp");
    y.erase("id");
    y.erase("timestamp");
    EXPECT_EQ(x, y);
  }
}

TEST_F(CliTest, ExportEmptyLedger) {
  const auto r = call({"export", "--format", "csv"});
  EXPECT_EQ(r.code, kExitOk);
  EXPECT_EQ(r.out, "id,timestamp,subcommand,objective,resolution,seed,result_name,exact,float\n");
  EXPECT_FALSE(fs::exists(ledger_));
}

TEST_F(CliTest, ExportEtaRows) {
  ASSERT_EQ(call({"eta", "--objective", "mart-eta", "--resolution", "2"}).code, kExitOk);
  const auto r = call({"export"});
  ASSERT_EQ(r.code, kExitOk);
  std::istringstream lines(r.out);
  std::string line;
  std::getline(lines, line);
  while (std::getline(lines, line)) EXPECT_NE(line.find(",eta,mart-eta,2,,"), std::string::npos) << line;
  EXPECT_NE(r.out.find(",best_ratio,3/8,0.375"), std::string::npos);
  EXPECT_NE(r.out.find(",measure,1/4,"), std::string::npos);
  EXPECT_NE(r.out.find(",visited,15,15"), std::string::npos);
  EXPECT_EQ(records().size(), 1u);  // export itself is not recorded
}

TEST_F(CliTest, CorruptLineIsSkipped) {
  for (int i = 0; i < 9; ++i) ASSERT_EQ(call({"shift", "--matrix", "2"}).code, kExitOk);
  {
    std::ofstream f(ledger_, std::ios::app);
    f << "{\"id\": \"truncated\n";
  }
  const auto r = call({"export", "--format", "json", "--output", (dir_ / "out.json").string()});
  EXPECT_EQ(r.code, kExitOk);
  const json summary = json::parse(r.out);
  EXPECT_EQ(summary["records"], 9);
  EXPECT_EQ(summary["warnings"], 1);
  EXPECT_NE(r.err.find("warning"), std::string::npos);
}

TEST_F(CliTest, JsonExportRoundTrips) {
  ASSERT_EQ(call({"chi", "--tree", kTree, "--set", "leaves=0"}).code, kExitOk);
  ASSERT_EQ(call({"wavelet", "--set", "N=2;cells=0", "--trials", "200", "--fit"}).code, kExitOk);
  const auto r = call({"export", "--format", "json"});
  ASSERT_EQ(r.code, kExitOk);
  const json arr = json::parse(r.out);
  const auto original = records();
  ASSERT_EQ(arr.size(), original.size());
  for (std::size_t i = 0; i < arr.size(); ++i) EXPECT_EQ(ExperimentRecord::from_json(arr[i]), original[i]);
}

TEST_F(CliTest, ConfigFileLosesToFlags) {
  const auto config = (dir_ / "run.cfg").string();
  {
    std::ofstream f(config);
    f << "# eta defaults\nobjective = mart-eta\nresolution = 2\n";
  }
  auto r = call({"eta", "--config", config});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_EQ(json::parse(r.out)["best_ratio"]["exact"], "3/8");
  r = call({"eta", "--config", config, "--resolution", "3"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_EQ(json::parse(r.out)["best_ratio"]["exact"], "11/32");
  EXPECT_EQ(records().back().params["resolution"], "3");
}

TEST_F(CliTest, ConfigParsing) {
  const auto config = (dir_ / "bad.cfg").string();
  {
    std::ofstream f(config);
    f << "resolution 2\n";
  }
  EXPECT_EQ(call({"eta", "--config", config}).code, kExitUsage);
  const auto merged = merge_config({"chi", "--set", "leaves=0"}, {{"certificate", "true"}, {"set", "leaves=1"}},
                                   {"certificate"});
  EXPECT_EQ(merged, (std::vector<std::string>{"chi", "--certificate", "--set", "leaves=0"}));
}

TEST_F(CliTest, EnvironmentLedger) {
  const std::string path = (dir_ / "env.jsonl").string();
  ::setenv("SQUARELAB_LEDGER", path.c_str(), 1);
  EXPECT_EQ(default_ledger_path(), path);
  std::ostringstream out, err;
  EXPECT_EQ(run({"shift", "--matrix", "3"}, out, err), kExitOk);
  ::unsetenv("SQUARELAB_LEDGER");
  EXPECT_EQ(Ledger(path).read().records.size(), 1u);
  EXPECT_EQ(default_ledger_path(), "./runs.jsonl");
}

TEST_F(CliTest, NoLedgerFlagAndOutFile) {
  const auto out = (dir_ / "report.json").string();
  const auto r = call({"--no-ledger", "eta", "--objective", "tensor-shift-ratio", "--resolution", "1", "--out", out});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_TRUE(records().empty());
  std::ifstream f(out);
  EXPECT_EQ(json::parse(f), json::parse(r.out));
}

TEST_F(CliTest, VerifySuite) {
  const auto r = call({"verify", "--suite", "certificate"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const json j = json::parse(r.out);
  EXPECT_EQ(j["passed"], true);
  EXPECT_EQ(j["suites"][0]["details"]["dependency"], json({"1/1", "-2/1", "-8/1"}));
  EXPECT_EQ(call({"verify", "--suite", "nope"}).code, kExitUsage);
}

TEST(Ledger, RecordRoundTrip) {
  ExperimentRecord r;
  r.id = new_uuid();
  r.timestamp = utc_timestamp();
  r.subcommand = "eta";
  r.params = {{"objective", "mart-eta"}, {"resolution", "4"}};
  r.seed = 42;
  r.results["best_ratio"] = {"43/128", 0.3359375};
  r.results["estimate"] = {std::nullopt, 0.25};
  r.output = {{"x", 1}};
  r.version = "0.1.0";
  EXPECT_EQ(ExperimentRecord::from_json(json::parse(r.to_json().dump())), r);
  EXPECT_EQ(r.id.size(), 36u);
  EXPECT_NE(new_uuid(), r.id);
  EXPECT_EQ(r.timestamp.size(), 20u);
  EXPECT_EQ(r.timestamp.back(), 'Z');
}
