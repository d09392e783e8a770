#include <doctest.h>

#include "trendcnn/error.hpp"
#include "trendcnn/labelstore.hpp"
#include "trendcnn/submodels.hpp"
#include "trendcnn/synth.hpp"

using namespace trendcnn;

TEST_SUITE("synth") {

TEST_CASE("same seed gives identical output") {
  SynthConfig cfg;
  cfg.bars = 800;
  const auto a = synth_generate(cfg, 42);
  const auto b = synth_generate(cfg, 42);
  CHECK(a.series == b.series);
  CHECK(a.windows == b.windows);
  CHECK_FALSE(synth_generate(cfg, 43).series == a.series);
}

TEST_CASE("output is valid and windows tile the series") {
  SynthConfig cfg;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto g = synth_generate(cfg, seed);
    CHECK(g.series.size() == cfg.bars);
    CHECK_NOTHROW(validate(g.series));
    CHECK_NOTHROW(validate_windows(g.windows, cfg.bars));
    CHECK(g.windows.front().start == 0);
    CHECK(g.windows.back().end == cfg.bars - 1);
    for (std::size_t k = 1; k < g.windows.size(); ++k) {
      CHECK(g.windows[k].start == g.windows[k - 1].end + 1);
      if (k + 1 < g.windows.size()) {
        CHECK(g.windows[k].length() >= cfg.segment_min);
        CHECK(g.windows[k].length() <= cfg.segment_max + 1);
      }
    }
  }
}

TEST_CASE("derived changepoints equal the generator's boundaries") {
  SynthConfig cfg;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto g = synth_generate(cfg, seed);
    CHECK(derive_changepoints(g.windows).indices == g.boundaries);
  }
}

TEST_CASE("noiseless single up-trend has positive direction") {
  SynthConfig cfg;
  cfg.bars = 200;
  cfg.segment_min = 200;
  cfg.segment_max = 600;
  cfg.noise = 0.0;
  cfg.weight_up = 1.0;
  cfg.weight_down = cfg.weight_flat = 0.0;
  const auto g = synth_generate(cfg, 7);
  REQUIRE(g.windows.size() == 1);
  const auto log_series = to_log(g.series);
  std::vector<double> closes;
  for (const auto& b : log_series.bars) closes.push_back(b.close);
  CHECK(trend_direction(g.windows[0], closes).direction == 1);
}

TEST_CASE("trend directions of generated windows follow their labels") {
  SynthConfig cfg;
  const auto g = synth_generate(cfg, 9);
  const auto log_series = to_log(g.series);
  std::vector<double> closes;
  for (const auto& b : log_series.bars) closes.push_back(b.close);
  for (const auto& w : g.windows) {
    if (w.state == WindowState::TrendUp) CHECK(trend_direction(w, closes).direction == 1);
    if (w.state == WindowState::TrendDown) CHECK(trend_direction(w, closes).direction == -1);
  }
}

TEST_CASE("class imbalance grows as n_days shrinks") {
  SynthConfig cfg;
  std::size_t pos25 = 0, neg25 = 0, pos75 = 0, neg75 = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto g = synth_generate(cfg, seed);
    const auto cps = derive_changepoints(g.windows);
    for (std::size_t s = 0; s + 25 <= cfg.bars; s += 5) (label_chpc_slice(s, 25, cps) ? pos25 : neg25)++;
    for (std::size_t s = 0; s + 75 <= cfg.bars; s += 5) (label_chpc_slice(s, 75, cps) ? pos75 : neg75)++;
  }
  const double ratio25 = static_cast<double>(neg25) / static_cast<double>(pos25);
  const double ratio75 = static_cast<double>(neg75) / static_cast<double>(pos75);
  MESSAGE("neg:pos at n_days=25 " << ratio25 << ", at 75 " << ratio75);
  CHECK(ratio25 > ratio75);
}

TEST_CASE("invalid configs are rejected") {
  SynthConfig cfg;
  cfg.segment_min = 1;
  CHECK_THROWS_AS(synth_generate(cfg, 1), ValidationError);
  cfg = {};
  cfg.drift_max = cfg.drift_min / 2;
  CHECK_THROWS_AS(synth_generate(cfg, 1), ValidationError);
  cfg = {};
  cfg.weight_up = cfg.weight_down = cfg.weight_flat = 0;
  CHECK_THROWS_AS(synth_generate(cfg, 1), ValidationError);
}

}  // TEST_SUITE
