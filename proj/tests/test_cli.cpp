#include <gtest/gtest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

namespace {

namespace fs = std::filesystem;

struct Outcome {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() /
           (std::string("relembed_cli_") + info->name() + "_" + std::to_string(::getpid()));
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  Outcome run(const std::string& args) const {
    const std::string cmd = std::string(RELEMBED_CLI_PATH) + " " + args + " >" + path("stdout") + " 2>" +
                            path("stderr");
    const int status = std::system(cmd.c_str());
    Outcome o;
    o.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    o.out = slurp(path("stdout"));
    o.err = slurp(path("stderr"));
    return o;
  }

  void write(const std::string& name, const std::string& text) const { std::ofstream(path(name)) << text; }

  fs::path dir_;
};

TEST_F(Cli, PathPipelineVerifies) {
  ASSERT_EQ(run("gen path --n 3 -o " + path("p.el")).code, 0);
  ASSERT_EQ(run("embed --method dag-translational -g " + path("p.el") + " -o " + path("t.json")).code, 0);
  const Outcome v = run("verify -g " + path("p.el") + " -e " + path("t.json"));
  EXPECT_EQ(v.code, 0);
  EXPECT_EQ(v.out, "ok\n");
  const auto j = nlohmann::json::parse(slurp(path("t.json")));
  EXPECT_EQ(j["kind"], "translational");
  EXPECT_EQ(j["n"], 3);
  EXPECT_EQ(j["metadata"]["operation"], "embed:dag-translational");
}

TEST_F(Cli, GenWritesToStdout) {
  const Outcome o = run("gen cycle --n 3");
  EXPECT_EQ(o.code, 0);
  EXPECT_NE(o.out.find("n 3"), std::string::npos);
  EXPECT_NE(o.out.find("2 0"), std::string::npos);
}

TEST_F(Cli, CycleHasNoTranslationalConstruction) {
  ASSERT_EQ(run("gen cycle --n 3 -o " + path("c.el")).code, 0);
  const Outcome o = run("embed --method dag-translational -g " + path("c.el") + " -o " + path("c.json"));
  EXPECT_EQ(o.code, 4);
  EXPECT_NE(o.err.find("error: CyclicGraph"), std::string::npos) << o.err;
}

TEST_F(Cli, VerifyFailurePrintsWitness) {
  ASSERT_EQ(run("gen path --n 3 -o " + path("p.el")).code, 0);
  ASSERT_EQ(run("gen cycle --n 3 -o " + path("c.el")).code, 0);
  ASSERT_EQ(run("embed --method svd -g " + path("p.el") + " -o " + path("e.json")).code, 0);
  const Outcome o = run("verify -g " + path("c.el") + " -e " + path("e.json"));
  EXPECT_EQ(o.code, 1);
  EXPECT_EQ(o.out, "fail\n");
  EXPECT_NE(o.err.find("witness: "), std::string::npos) << o.err;
}

TEST_F(Cli, ReportCompleteBipartite) {
  ASSERT_EQ(run("gen complete_bipartite --n 3 -o " + path("k.el")).code, 0);
  const Outcome o = run("report -g " + path("k.el"));
  ASSERT_EQ(o.code, 0);
  const auto r = nlohmann::json::parse(o.out);
  EXPECT_NEAR(r["sigma1"].get<double>(), 3.0, 1e-9);
  EXPECT_NEAR(r["bound_svd"].get<double>(), 1.0 / 3.0, 1e-9);
  EXPECT_EQ(r["embeddings"].size(), 2u);

  const Outcome t = run("report --table -g " + path("k.el"));
  EXPECT_EQ(t.code, 0);
  EXPECT_NE(t.out.find("sigma1"), std::string::npos);
}

TEST_F(Cli, ConvertAndCompressChain) {
  ASSERT_EQ(run("gen random_gnp --n 12 --p 0.3 --seed 3 -o " + path("g.el")).code, 0);
  ASSERT_EQ(run("embed --method svd --kind similarity -g " + path("g.el") + " -o " + path("s.json")).code, 0);
  ASSERT_EQ(run("convert --to distance -g " + path("g.el") + " -e " + path("s.json") + " -o " + path("d.json")).code,
            0);
  EXPECT_EQ(run("verify -g " + path("g.el") + " -e " + path("d.json")).code, 0);
  ASSERT_EQ(run("compress --method hamming --seed 2 -g " + path("g.el") + " -e " + path("s.json") + " -o " +
                path("h.json"))
                .code,
            0);
  EXPECT_EQ(run("verify -g " + path("g.el") + " -e " + path("h.json")).code, 0);
  EXPECT_EQ(nlohmann::json::parse(slurp(path("h.json")))["kind"], "hamming");
}

TEST_F(Cli, SameSeedSameBytes) {
  ASSERT_EQ(run("gen random_gnp --n 6 --p 0.4 --seed 1 -o " + path("g.el")).code, 0);
  for (const char* out : {"a.json", "b.json"})
    ASSERT_EQ(run("embed --method sdp-distance --seed 4 -g " + path("g.el") + " -o " + path(out)).code, 0);
  EXPECT_EQ(slurp(path("a.json")), slurp(path("b.json")));
}

TEST_F(Cli, WrongKindIsUsageError) {
  ASSERT_EQ(run("gen path --n 3 -o " + path("p.el")).code, 0);
  ASSERT_EQ(run("embed --method svd -g " + path("p.el") + " -o " + path("d.json")).code, 0);
  const Outcome o = run("compress --method hamming -g " + path("p.el") + " -e " + path("d.json"));
  EXPECT_EQ(o.code, 2);
  EXPECT_NE(o.err.find("error: "), std::string::npos);
}

TEST_F(Cli, UsageErrors) {
  EXPECT_EQ(run("").code, 2);
  EXPECT_EQ(run("frobnicate").code, 2);
  EXPECT_EQ(run("embed --method nope -g x").code, 2);
  EXPECT_EQ(run("gen path --n three").code, 2);
  EXPECT_EQ(run("gen hexagon --n 3").code, 2);
}

TEST_F(Cli, InputErrors) {
  Outcome o = run("verify -g " + path("missing.el") + " -e " + path("missing.json"));
  EXPECT_EQ(o.code, 3);
  EXPECT_NE(o.err.find("error: IoError"), std::string::npos) << o.err;

  write("bad.el", "n 2\n0 5\n");
  o = run("report -g " + path("bad.el"));
  EXPECT_EQ(o.code, 3);
  EXPECT_NE(o.err.find("error: ParseError"), std::string::npos) << o.err;

  write("p.el", "n 2\n0 1\n");
  write("bad.json", "{\"kind\": ");
  EXPECT_EQ(run("verify -g " + path("p.el") + " -e " + path("bad.json")).code, 3);
}

TEST_F(Cli, InvalidParametersExitFour) {
  const Outcome o = run("gen random_gnp --n 4 --p 1.5");
  EXPECT_EQ(o.code, 4);
  EXPECT_NE(o.err.find("error: InvalidParams"), std::string::npos) << o.err;
}

TEST_F(Cli, HelpExitsZero) {
  const Outcome o = run("--help");
  EXPECT_EQ(o.code, 0);
  EXPECT_NE(o.out.find("embed"), std::string::npos);
}

}  // namespace
