#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "trendcnn/nn/network.hpp"
#include "trendcnn/rasterizer.hpp"
#include "trendcnn/submodels.hpp"

namespace trendcnn {

enum class Position { None, Long, Short };

std::string_view to_string(Position p);
int direction(Position p);  // +1, -1, 0

struct TradePolicy {
  bool allow_short = true;
  bool flat_ignored = false;
};

// Position after acting on `signal` at the close of a day.
Position apply_policy(int signal, Position current, const TradePolicy& policy);

struct SimState {
  std::size_t win_srt = 0;  // start of the current trend window
  Position position = Position::None;
  std::optional<std::size_t> entry_idx;
  int last_signal = 0;
};

// The three submodels as seen by the simulator. Implementations may read only
// bars [start, end] of the series.
class SignalModels {
 public:
  virtual ~SignalModels() = default;
  virtual double chpc(const OhlcSeries& log_series, std::size_t start, std::size_t end) const = 0;
  virtual double chpr(const OhlcSeries& log_series, std::size_t start, std::size_t end) const = 0;
  virtual int tf(const OhlcSeries& log_series, std::size_t start, std::size_t end) const = 0;  // +1 / -1 / 0
};

// Trained networks behind the SignalModels interface: render, scale, forward.
class NetworkModels : public SignalModels {
 public:
  NetworkModels(nn::Network chpc, nn::Network chpr, nn::Network tf, RenderStyle style = {});

  double chpc(const OhlcSeries& log_series, std::size_t start, std::size_t end) const override;
  double chpr(const OhlcSeries& log_series, std::size_t start, std::size_t end) const override;
  int tf(const OhlcSeries& log_series, std::size_t start, std::size_t end) const override;

 private:
  std::vector<double> run(const nn::Network& net, const OhlcSeries& s, std::size_t start, std::size_t end) const;

  nn::Network chpc_;
  nn::Network chpr_;
  nn::Network tf_;
  RenderStyle style_;
};

struct StepConfig {
  SliceSpec slices;
  double chpc_threshold = 0.5;
};

struct StepResult {
  SimState state;
  int signal = 0;
  bool anomaly = false;  // trend window collapsed to one bar; previous signal kept
};

// One evaluation at bar t: ChP-c on [t-n+1, t], ChP-r to move win_srt when a
// changepoint is detected, then TF on [win_srt, t]. Position is not touched.
StepResult step(const SimState& state, std::size_t t, const OhlcSeries& log_series, const SignalModels& models,
                const StepConfig& cfg);

struct TradeLogEntry {
  std::string stock_id;
  std::size_t index = 0;
  Date date;
  int signal = 0;                   // signal in effect at the close of the day
  Position held = Position::None;   // position earning this day's return
  Position position = Position::None;  // position after the close
  double contribution = 0.0;        // held * (ln C_t - ln C_{t-1}) * 100
};

struct SimMetrics {
  double profit_pct = 0.0;
  std::size_t days_in = 0;
  std::size_t times_in = 0;
  std::size_t data_points = 0;
  std::optional<double> day_profit_pct;       // profit / days_in
  std::optional<double> year_profit_pct;      // day_profit * 250
  std::optional<double> year_profit_avg_pct;  // profit / data_points * 250
};

SimMetrics make_metrics(double profit, std::size_t days_in, std::size_t times_in, std::size_t data_points);

// Rows: true state, columns: signal, both in TrendClass order (Flat, Up, Down).
using Contingency = std::array<std::array<std::size_t, kTrendClasses>, kTrendClasses>;

std::optional<double> contingency_recall(const Contingency& c, TrendClass cls);

struct SimulationReport {
  SimMetrics total;
  std::vector<std::pair<std::string, SimMetrics>> per_stock;
  std::optional<Contingency> contingency;
  std::size_t anomalies = 0;
};

struct SimulationResult {
  SimulationReport report;
  std::vector<TradeLogEntry> log;
};

// Inclusive date range; unset ends mean the series ends.
struct SimRange {
  std::optional<Date> from;
  std::optional<Date> to;
};

// Model-driven run. A signal decided at the close of day t moves the position
// held from day t+1. Windows, if present, give the contingency table.
SimulationResult run_simulation(std::span<const StockInput> stocks, const SignalModels& models, const StepConfig& cfg,
                                const TradePolicy& policy, const SimRange& range = {});

// Long on every day of the range, including the first.
SimulationResult baseline_buy_and_hold(std::span<const StockInput> stocks, const SimRange& range = {});

// Signals read straight from the label windows with hindsight: each day's
// position follows that day's labeled state. Unknown closes the position.
SimulationResult baseline_expert(std::span<const StockInput> stocks, const TradePolicy& policy,
                                 const SimRange& range = {});

// Contingency of day signals against labeled states for any trade log.
Contingency contingency(std::span<const TradeLogEntry> log, std::span<const StockInput> stocks);

// Per bar: state from the first expert (by id) that labels it, else Unknown.
std::vector<WindowState> truth_states(std::span<const LabelWindow> windows, std::size_t length);

nlohmann::json to_json(const SimMetrics& m);
nlohmann::json to_json(const SimulationReport& r);
std::string trade_log_csv(std::span<const TradeLogEntry> log);

}  // namespace trendcnn
