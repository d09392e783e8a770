#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "test_util.hpp"
#include "trendcnn/error.hpp"
#include "trendcnn/pipeline.hpp"

using namespace trendcnn;
namespace fs = std::filesystem;

TEST_SUITE("pipeline") {

TEST_CASE("synth stocks are named, seeded per stock and reproducible") {
  SynthConfig cfg;
  cfg.bars = 300;
  const auto a = synth_stocks(cfg, 3, 7);
  const auto b = synth_stocks(cfg, 3, 7);
  REQUIRE(a.size() == 3);
  CHECK(a[0].series.stock_id == "SYN00");
  CHECK(a[2].series.stock_id == "SYN02");
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(a[i].series == b[i].series);
    CHECK(a[i].windows == b[i].windows);
    CHECK(a[i].windows.front().stock_id == a[i].series.stock_id);
  }
  CHECK_FALSE(a[0].series.bars == a[1].series.bars);
}

TEST_CASE("write and load stocks round-trip") {
  testutil::TempDir dir;
  SynthConfig cfg;
  cfg.bars = 200;
  const auto stocks = synth_stocks(cfg, 2, 3);
  write_stocks(stocks, dir.str("series"), dir.str("labels"));
  CHECK(fs::exists(dir.path() / "labels" / label_file_name("SYN00", cfg.expert_id)));
  const auto back = load_stocks(dir.str("series"), dir.str("labels"));
  REQUIRE(back.size() == 2);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(back[i].series == stocks[i].series);
    CHECK(back[i].windows == stocks[i].windows);
  }
  CHECK(load_stocks(dir.str("series"), "")[0].windows.empty());
}

TEST_CASE("labels for unknown stocks or beyond the series are rejected") {
  testutil::TempDir dir;
  SynthConfig cfg;
  cfg.bars = 100;
  auto stocks = synth_stocks(cfg, 1, 3);
  write_stocks(stocks, dir.str("series"), dir.str("labels"));
  save_label_file(dir.str("labels/ZZZ__e.json"), {"ZZZ", "e", {testutil::window(0, 5, WindowState::Flat, "e", "ZZZ")}});
  CHECK_THROWS_AS(load_stocks(dir.str("series"), dir.str("labels")), ValidationError);
  fs::remove(dir.str("labels/ZZZ__e.json"));
  save_label_file(dir.str("labels/SYN00__x.json"),
                  {"SYN00", "x", {testutil::window(0, 500, WindowState::Flat, "x", "SYN00")}});
  CHECK_THROWS_AS(load_stocks(dir.str("series"), dir.str("labels")), ValidationError);
}

TEST_CASE("ingest normalizes files and names the bad one") {
  testutil::TempDir dir;
  fs::create_directories(dir.path() / "in");
  std::ofstream(dir.str("in/AAA.csv")) << "Date,Open,High,Low,Close,Volume\n2020-01-02,1.50,2,1,1.5,100\n2020-01-03,1.5,2,1,1.75,90\n";
  std::ofstream(dir.str("in/BBB.csv")) << "Date,Open,High,Low,Close\n2020-01-02,1,1,1,1\n";
  const auto summary = ingest({dir.str("in")}, dir.str("out"));
  CHECK(summary["count"] == 2);
  CHECK(summary["bars"] == 3);
  CHECK(read_file(dir.str("out/AAA.csv")) == "Date,Open,High,Low,Close\n2020-01-02,1.5,2,1,1.5\n2020-01-03,1.5,2,1,1.75\n");
  std::ofstream(dir.str("in/CCC.csv")) << "Date,Open,High,Low,Close\n2020-01-02,1,0.5,1,1\n";
  try {
    ingest({dir.str("in")}, dir.str("out2"));
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("CCC.csv") != std::string::npos);
  }
  CHECK_THROWS_AS(ingest({dir.str("nope")}, dir.str("out3")), Error);
}

TEST_CASE("dataset files and history csv") {
  testutil::TempDir dir;
  SynthConfig cfg;
  cfg.bars = 120;
  const auto stocks = synth_stocks(cfg, 1, 5);
  ModelConfig mc;
  const auto opts = dataset_options(mc);
  const auto ds = make_dataset(stocks, opts);
  const auto n = write_dataset_files(ds, opts, dir.str("d.ctf"), false);
  CHECK(n == ds.records.size());
  const auto manifest = nlohmann::json::parse(read_file(dir.str("d.ctf.manifest.json")));
  CHECK(manifest["records"].size() == n);
  CHECK(manifest["normalized"] == false);
  CHECK(load_ctf_dataset(dir.str("d.ctf"), 1, 9216).size() == n);
  CHECK(history_csv(std::vector<double>{0.5, 0.25}) == "iteration,loss\n0,0.5\n1,0.25\n");
}

TEST_CASE("atomic write leaves no temporary file") {
  testutil::TempDir dir;
  write_file_atomic(dir.str("x.txt"), "hello");
  CHECK(read_file(dir.str("x.txt")) == "hello");
  CHECK_FALSE(fs::exists(dir.str("x.txt.tmp")));
  CHECK_THROWS_AS(write_file_atomic(dir.str("missing/x.txt"), "a"), Error);
}

}  // TEST_SUITE
