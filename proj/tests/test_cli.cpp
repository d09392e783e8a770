#include <doctest.h>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "test_util.hpp"
#include "trendcnn/pipeline.hpp"

using json = nlohmann::json;

namespace {

struct Run {
  int code = -1;
  std::string out;
};

// Runs the CLI with stderr folded into the captured output.
Run cli(const std::string& args) {
  const std::string cmd = std::string(TRENDCNN_CLI_PATH) + " " + args + " 2>&1";
  Run r;
  FILE* p = ::popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  std::array<char, 4096> buf;
  std::size_t n;
  while ((n = std::fread(buf.data(), 1, buf.size(), p)) > 0) r.out.append(buf.data(), n);
  const int status = ::pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("end-to-end on a tiny synthetic set") {
  testutil::TempDir dir;
  const std::string d = dir.str();
  auto r = cli("synth --out " + d + "/syn --stocks 2 --bars 1200 --seed 4");
  REQUIRE_MESSAGE(r.code == 0, r.out);
  CHECK(json::parse(r.out)["stocks"] == 2);

  for (const std::string kind : {"chpc", "chpr", "tf"}) {
    r = cli("make-dataset --series " + d + "/syn/series --labels " + d + "/syn/labels --kind " + kind + " --out " + d +
            "/" + kind + ".ctf");
    REQUIRE_MESSAGE(r.code == 0, r.out);
    CHECK(json::parse(r.out)["records"].get<int>() > 0);
    r = cli("train --quiet --dataset " + d + "/" + kind + ".ctf --kind " + kind + " --iterations 3 --minibatch 4 --out " +
            d + "/" + kind + ".ckpt");
    REQUIRE_MESSAGE(r.code == 0, r.out);
    CHECK(std::filesystem::exists(d + "/" + kind + ".ckpt.history.csv"));
    r = cli("evaluate --checkpoint " + d + "/" + kind + ".ckpt --dataset " + d + "/" + kind + ".ctf --out " + d + "/" +
            kind + ".eval.json");
    REQUIRE_MESSAGE(r.code == 0, r.out);
    CHECK(json::parse(trendcnn::read_file(d + "/" + kind + ".eval.json"))["kind"] == kind);
  }

  r = cli("simulate --chpc " + d + "/chpc.ckpt --chpr " + d + "/chpr.ckpt --tf " + d + "/tf.ckpt --series " + d +
          "/syn/series --labels " + d + "/syn/labels --baselines --trade-log " + d + "/log.csv --out " + d + "/sim.json");
  REQUIRE_MESSAGE(r.code == 0, r.out);
  const auto sim = json::parse(trendcnn::read_file(d + "/sim.json"));
  CHECK(sim["data_points"] == 2400);
  CHECK(sim.contains("contingency"));
  CHECK(sim["baselines"]["buy_and_hold"]["times_in"] == 2);
  CHECK(trendcnn::read_file(d + "/log.csv").rfind("stock_id,index,date", 0) == 0);
}

TEST_CASE("ingest and config files") {
  testutil::TempDir dir;
  const std::string d = dir.str();
  std::ofstream(d + "/X.csv") << "Date,Open,High,Low,Close\n2020-01-02,1,2,1,1.5\n";
  auto r = cli("ingest " + d + "/X.csv --out " + d + "/norm");
  REQUIRE_MESSAGE(r.code == 0, r.out);
  CHECK(json::parse(r.out)["count"] == 1);
  std::ofstream(d + "/bad.cfg") << "kind = chpr\nloss = weighted_bce\n";
  r = cli("make-dataset --series " + d + "/norm --labels " + d + " --out " + d + "/x.ctf --config " + d + "/bad.cfg");
  CHECK(r.code == 1);
  CHECK(r.out.find("error: invalid:") != std::string::npos);
}

TEST_CASE("errors and usage") {
  auto r = cli("evaluate --checkpoint /nonexistent.ckpt --dataset /nonexistent.ctf");
  CHECK(r.code == 1);
  CHECK(r.out.rfind("error: io:", 0) == 0);
  r = cli("frobnicate");
  CHECK(r.code == 2);
  r = cli("train --dataset x.ctf");
  CHECK(r.code == 2);
  r = cli("--help");
  CHECK(r.code == 0);
  CHECK(r.out.find("simulate") != std::string::npos);
}

}  // TEST_SUITE
