#include <doctest.h>

#include "sim_util.hpp"
#include "test_util.hpp"
#include "trendcnn/error.hpp"
#include "trendcnn/submodels.hpp"

using namespace trendcnn;
using testutil::log_closes;
using testutil::ScriptedModels;
using P = Position;

namespace {

const std::vector<double> kCloses{0, 1, 3, 2, 2, 5, 4, 4, 6, 7};

StepConfig step3x2() {
  StepConfig cfg;
  cfg.slices = {3, 2};
  return cfg;
}

ScriptedModels script() {
  ScriptedModels m;
  m.tf_by_end = {{2, 1}, {4, -1}, {6, 0}, {8, 1}};
  return m;
}

std::vector<double> contributions(const SimulationResult& r) {
  std::vector<double> out;
  for (const auto& e : r.log) out.push_back(e.contribution);
  return out;
}

std::vector<P> held(const SimulationResult& r) {
  std::vector<P> out;
  for (const auto& e : r.log) out.push_back(e.held);
  return out;
}

}  // namespace

TEST_SUITE("simulator") {

TEST_CASE("apply_policy rules") {
  const TradePolicy def{true, false}, no_short{false, false}, ignore{false, true};
  CHECK(apply_policy(1, P::None, def) == P::Long);
  CHECK(apply_policy(-1, P::Long, def) == P::Short);
  CHECK(apply_policy(0, P::Long, def) == P::None);
  CHECK(apply_policy(-1, P::Long, no_short) == P::None);
  CHECK(apply_policy(0, P::Long, ignore) == P::Long);
  // Signals [0, +1, 0, -1].
  std::vector<P> a, b;
  P pa = P::None, pb = P::None;
  for (int s : {0, 1, 0, -1}) {
    a.push_back(pa = apply_policy(s, pa, no_short));
    b.push_back(pb = apply_policy(s, pb, ignore));
  }
  CHECK(a == std::vector<P>{P::None, P::Long, P::None, P::None});
  CHECK(b == std::vector<P>{P::None, P::Long, P::Long, P::None});
}

TEST_CASE("scripted run matches the hand-computed trade log") {
  const std::vector<StockInput> stocks{{log_closes(kCloses, -1), {}}};
  auto models = script();
  const auto r = run_simulation(stocks, models, step3x2(), {true, false});
  CHECK(contributions(r) == std::vector<double>{0, 0, 0, -100, 0, -300, 100, 0, 0, 100});
  CHECK(held(r) == std::vector<P>{P::None, P::None, P::None, P::Long, P::Long, P::Short, P::Short, P::None, P::None,
                                  P::Long});
  std::vector<int> signals;
  for (const auto& e : r.log) signals.push_back(e.signal);
  CHECK(signals == std::vector<int>{0, 0, 1, 1, -1, -1, 0, 0, 1, 1});
  CHECK(r.report.total.profit_pct == -200);
  CHECK(r.report.total.days_in == 5);
  CHECK(r.report.total.times_in == 3);
  CHECK(r.report.total.data_points == 10);
  CHECK(*r.report.total.day_profit_pct == -40);
  CHECK(*r.report.total.year_profit_pct == -10000);
  CHECK(*r.report.total.year_profit_avg_pct == -5000);
  CHECK_FALSE(r.report.contingency);
  // TF always saw the window from bar 0 (no changepoint).
  for (const auto& [s, e] : models.tf_calls) CHECK(s == 0);
}

TEST_CASE("scripted run without shorts and with flats ignored") {
  const std::vector<StockInput> stocks{{log_closes(kCloses, -1), {}}};
  const auto no_short = run_simulation(stocks, script(), step3x2(), {false, false});
  CHECK(contributions(no_short) == std::vector<double>{0, 0, 0, -100, 0, 0, 0, 0, 0, 100});
  CHECK(no_short.report.total.days_in == 3);
  CHECK(no_short.report.total.times_in == 2);
  const auto ignore = run_simulation(stocks, script(), step3x2(), {true, true});
  CHECK(contributions(ignore) == std::vector<double>{0, 0, 0, -100, 0, -300, 100, 0, -200, 100});
  CHECK(ignore.report.total.profit_pct == -400);
  CHECK(ignore.report.total.days_in == 7);
  CHECK(ignore.report.total.times_in == 3);
}

TEST_CASE("changepoints move the trend window and a collapsed window keeps the signal") {
  const std::vector<StockInput> stocks{{log_closes(kCloses, -1), {}}};
  auto models = script();
  models.chpc_by_end = {{4, 0.9}, {6, 0.7}};
  models.chpr_by_end = {{4, 0.5}, {6, 1.0}};
  const auto r = run_simulation(stocks, models, step3x2(), {true, false});
  // t=4: slice [2,4], win_srt = 2 + round(0.5 * 2) = 3. t=6: win_srt = 4 + 2 = 6 -> anomaly.
  REQUIRE(models.tf_calls.size() == 3);
  CHECK(models.tf_calls[0] == std::pair<std::size_t, std::size_t>{0, 2});
  CHECK(models.tf_calls[1] == std::pair<std::size_t, std::size_t>{3, 4});
  CHECK(models.tf_calls[2] == std::pair<std::size_t, std::size_t>{6, 8});
  CHECK(r.report.anomalies == 1);
  CHECK(r.log[6].signal == -1);
  CHECK(r.log[7].held == P::Short);
}

TEST_CASE("step honours the threshold") {
  const auto s = log_closes(kCloses, -1);
  ScriptedModels m;
  m.chpc_by_end = {{5, 0.5}};
  m.chpr_by_end = {{5, 0.0}};
  m.tf_by_end = {{5, 1}};
  StepConfig cfg = step3x2();
  auto r = step({}, 5, s, m, cfg);
  CHECK(r.state.win_srt == 3);
  cfg.chpc_threshold = 0.6;
  r = step({}, 5, s, m, cfg);
  CHECK(r.state.win_srt == 0);
  CHECK(r.signal == 1);
  CHECK_THROWS_AS(step({}, 1, s, m, cfg), ValidationError);
}

TEST_CASE("buy-and-hold: year profit equals its average, one entry per stock") {
  Rng rng(91);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<StockInput> stocks;
    for (int k = 0; k < 3; ++k) stocks.push_back({testutil::random_series(rng, 30 + uniform_index(rng, 50), "S" + std::to_string(k)), {}});
    const auto r = baseline_buy_and_hold(stocks);
    CHECK(r.report.total.times_in == 3);
    CHECK(r.report.total.days_in == r.report.total.data_points);
    CHECK(*r.report.total.year_profit_pct == *r.report.total.year_profit_avg_pct);
    double expected = 0;
    for (const auto& st : stocks) {
      expected += (std::log(st.series.bars.back().close) - std::log(st.series.bars.front().open)) * 100;
    }
    CHECK(r.report.total.profit_pct == doctest::Approx(expected).epsilon(1e-9));
  }
}

TEST_CASE("date range restricts the simulated bars") {
  const std::vector<StockInput> stocks{{log_closes(kCloses, -1), {}}};
  SimRange range{stocks[0].series.bars[3].date, stocks[0].series.bars[7].date};
  const auto r = baseline_buy_and_hold(stocks, range);
  CHECK(r.report.total.data_points == 5);
  CHECK(r.report.total.profit_pct == doctest::Approx((4 - 3) * 100.0));
  SimRange empty{parse_date("2030-01-01"), {}};
  CHECK_THROWS_AS(baseline_buy_and_hold(stocks, empty), ValidationError);
}

TEST_CASE("random scripted runs: accounting identities") {
  Rng rng(92);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 10 + uniform_index(rng, 40);
    std::vector<double> closes(n);
    double level = 0;
    for (auto& c : closes) c = level += uniform01(rng) - 0.5;
    const std::vector<StockInput> stocks{{log_closes(closes, closes[0] - 0.1), {}}};
    ScriptedModels m;
    for (std::size_t t = 0; t < n; ++t) m.tf_by_end[t] = static_cast<int>(uniform_index(rng, 3)) - 1;
    StepConfig cfg;
    cfg.slices = {3, 1 + uniform_index(rng, 3)};
    const TradePolicy policy{uniform_index(rng, 2) == 0, uniform_index(rng, 2) == 0};
    const auto r = run_simulation(stocks, m, cfg, policy);

    // Hand-rolled accumulator over the log.
    double profit = 0;
    std::size_t days = 0, opens = 0;
    P prev = P::None;
    for (std::size_t t = 0; t < r.log.size(); ++t) {
      const auto& e = r.log[t];
      const double ref = t == 0 ? stocks[0].series.bars[0].open : closes[t - 1];
      CHECK(e.contribution == direction(e.held) * (closes[t] - ref) * 100.0);
      profit += e.contribution;
      days += e.held != P::None;
      opens += e.position != P::None && e.position != prev;
      if (t > 0) CHECK(e.held == r.log[t - 1].position);
      if (!policy.allow_short) CHECK(e.position != P::Short);
      prev = e.position;
    }
    CHECK(r.report.total.profit_pct == doctest::Approx(profit).epsilon(1e-12));
    CHECK(r.report.total.days_in == days);
    CHECK(r.report.total.times_in == opens);
    if (!policy.allow_short) {
      std::size_t none_to_open = 0;
      for (std::size_t t = 0; t < r.log.size(); ++t) {
        none_to_open += (t == 0 ? P::None : r.log[t - 1].position) == P::None && r.log[t].position != P::None;
      }
      CHECK(r.report.total.times_in == none_to_open);
    }
    if (r.report.total.profit_pct > 0) {
      CHECK(*r.report.total.year_profit_pct >= *r.report.total.year_profit_avg_pct);
    }
  }
}

TEST_CASE("long-only holding periods earn the sign of their price change") {
  Rng rng(93);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> closes(40);
    double level = 0;
    for (auto& c : closes) c = level += uniform01(rng) - 0.5;
    const std::vector<StockInput> stocks{{log_closes(closes, closes[0]), {}}};
    ScriptedModels m;
    for (std::size_t t = 0; t < 40; ++t) m.tf_by_end[t] = static_cast<int>(uniform_index(rng, 3)) - 1;
    StepConfig cfg;
    cfg.slices = {2, 1};
    const auto r = run_simulation(stocks, m, cfg, {false, uniform_index(rng, 2) == 0});
    double period = 0, change = 0;
    for (std::size_t t = 0; t <= r.log.size(); ++t) {
      const bool in = t < r.log.size() && r.log[t].held == P::Long;
      if (in) {
        period += r.log[t].contribution;
        change += (closes[t] - closes[t - 1]) * 100.0;
      } else if (period != 0 || change != 0) {
        CHECK(period == doctest::Approx(change));
        period = change = 0;
      }
    }
  }
}

TEST_CASE("expert baseline follows the labels with hindsight") {
  const auto s = log_closes(kCloses, -1);
  std::vector<LabelWindow> w{testutil::window(0, 3, WindowState::TrendUp, "a", "S"),
                             testutil::window(4, 5, WindowState::Unknown, "a", "S"),
                             testutil::window(6, 9, WindowState::TrendDown, "a", "S")};
  const std::vector<StockInput> stocks{{s, w}};
  const auto r = baseline_expert(stocks, {true, false});
  CHECK(contributions(r) == std::vector<double>{100, 100, 200, -100, 0, 0, 100, 0, -200, -100});
  CHECK(r.report.total.times_in == 2);
  CHECK(r.report.total.days_in == 8);
  REQUIRE(r.report.contingency);
  CHECK((*r.report.contingency)[1][1] == 4);
  CHECK((*r.report.contingency)[2][2] == 4);
  const auto no_short = baseline_expert(stocks, {false, false});
  CHECK(no_short.report.total.profit_pct == 300);
  const std::vector<StockInput> unlabeled{{s, {}}};
  CHECK_THROWS_AS(baseline_expert(unlabeled, {}), ValidationError);
}

TEST_CASE("contingency rows are truth states, columns signals") {
  const auto s = log_closes(kCloses, -1);
  std::vector<LabelWindow> w{testutil::window(0, 4, WindowState::Flat, "a", "S"),
                             testutil::window(5, 9, WindowState::TrendDown, "a", "S"),
                             testutil::window(0, 9, WindowState::TrendUp, "b", "S")};
  const std::vector<StockInput> stocks{{s, w}};
  const auto r = run_simulation(stocks, script(), step3x2(), {true, false});
  REQUIRE(r.report.contingency);
  const auto& c = *r.report.contingency;
  // Signals per bar: 0 0 1 1 -1 | -1 0 0 1 1; truth: flat x5 then down x5 (expert "a" wins).
  CHECK(c[0] == std::array<std::size_t, 3>{2, 2, 1});
  CHECK(c[2] == std::array<std::size_t, 3>{2, 2, 1});
  CHECK(c[1] == std::array<std::size_t, 3>{0, 0, 0});
  CHECK(*contingency_recall(c, TrendClass::Down) == doctest::Approx(0.2));
  CHECK_FALSE(contingency_recall(c, TrendClass::Up));
}

TEST_CASE("signals are causal under network models") {
  const RenderStyle style;
  const auto in = input_shape(style);
  Rng rng(94);
  for (int trial = 0; trial < 10; ++trial) {
    NetworkModels models(build_chpc(in, 10 + trial), build_chpr(in, 20 + trial), build_tf(10, 30 + trial));
    StepConfig cfg;
    cfg.slices = {5, 3};
    cfg.chpc_threshold = 0.3 + 0.4 * uniform01(rng);
    const auto series = testutil::random_series(rng, 40, "C");
    const std::size_t cut = 10 + uniform_index(rng, 25);
    auto altered = series;
    Rng noise(trial);
    for (std::size_t i = cut + 1; i < altered.size(); ++i) {
      auto& b = altered.bars[i];
      b.open *= 1 + 0.2 * uniform01(noise);
      b.close *= 1 - 0.2 * uniform01(noise);
      b.high = std::max(b.open, b.close) * 1.05;
      b.low = std::min(b.open, b.close) * 0.9;
    }
    const std::vector<StockInput> a{{series, {}}}, b{{altered, {}}};
    const auto ra = run_simulation(a, models, cfg, {});
    const auto rb = run_simulation(b, models, cfg, {});
    for (std::size_t t = 0; t <= cut; ++t) {
      CHECK(ra.log[t].signal == rb.log[t].signal);
      CHECK(ra.log[t].position == rb.log[t].position);
    }
  }
}

TEST_CASE("network models reject mismatched shapes") {
  const auto in = input_shape(RenderStyle{});
  CHECK_THROWS_AS(NetworkModels(build_chpc(in, 1), build_chpr(in, 2), build_tf(20, 3)), ShapeError);
  CHECK_THROWS_AS(NetworkModels(build_tf(10, 1), build_chpr(in, 2), build_tf(10, 3)), ShapeError);
}

TEST_CASE("report json and trade log csv") {
  const std::vector<StockInput> stocks{{log_closes(kCloses, -1), {}}};
  const auto r = run_simulation(stocks, script(), step3x2(), {true, false});
  const auto j = to_json(r.report);
  CHECK(j["profit_pct"] == -200.0);
  CHECK(j["per_stock"]["S"]["times_in"] == 3);
  CHECK_FALSE(j.contains("contingency"));
  const auto csv = trade_log_csv(r.log);
  CHECK(csv.rfind("stock_id,index,date,signal,held,position,contribution\n", 0) == 0);
  CHECK(csv.find("S,3,2020-01-09,1,long,long,-100\n") != std::string::npos);
}

}  // TEST_SUITE
