#include "trendcnn/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "trendcnn/error.hpp"

namespace trendcnn {

std::string_view to_string(Position p) {
  switch (p) {
    case Position::None: return "none";
    case Position::Long: return "long";
    case Position::Short: return "short";
  }
  return "none";
}

int direction(Position p) { return p == Position::Long ? 1 : p == Position::Short ? -1 : 0; }

Position apply_policy(int signal, Position current, const TradePolicy& policy) {
  if (signal > 0) return Position::Long;
  if (signal < 0) return policy.allow_short ? Position::Short : Position::None;
  return policy.flat_ignored ? current : Position::None;
}

NetworkModels::NetworkModels(nn::Network chpc, nn::Network chpr, nn::Network tf, RenderStyle style)
    : chpc_(std::move(chpc)), chpr_(std::move(chpr)), tf_(std::move(tf)), style_(style) {
  const auto in = input_shape(style_);
  if (chpc_.input_shape() != in || chpr_.input_shape() != in || tf_.input_shape() != in) {
    throw ShapeError("model input shapes do not match the render style (" + nn::to_string(in) + ")");
  }
  if (chpc_.output_shape().size() != 1 || chpr_.output_shape().size() != 1 ||
      tf_.output_shape().size() != kTrendClasses) {
    throw ShapeError("models have unexpected output sizes (want 1, 1, 3)");
  }
}

std::vector<double> NetworkModels::run(const nn::Network& net, const OhlcSeries& s, std::size_t start,
                                       std::size_t end) const {
  const auto img = render(s, start, end, style_);
  std::vector<double> x(img.data.size());
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = img.data[i] * net.input_scale();
  const auto cache = net.forward(x, 1);
  return {cache.output().begin(), cache.output().end()};
}

double NetworkModels::chpc(const OhlcSeries& s, std::size_t start, std::size_t end) const {
  return run(chpc_, s, start, end)[0];
}

double NetworkModels::chpr(const OhlcSeries& s, std::size_t start, std::size_t end) const {
  return run(chpr_, s, start, end)[0];
}

int NetworkModels::tf(const OhlcSeries& s, std::size_t start, std::size_t end) const {
  const auto p = run(tf_, s, start, end);
  const auto k = static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin());
  return signal_of(static_cast<TrendClass>(k));
}

StepResult step(const SimState& state, std::size_t t, const OhlcSeries& log_series, const SignalModels& models,
                const StepConfig& cfg) {
  const std::size_t n = cfg.slices.n_days;
  if (t + 1 < n) throw ValidationError("step at bar " + std::to_string(t) + " before a full slice is available");
  if (t >= log_series.bars.size()) throw ValidationError("step beyond series end");
  StepResult r{state, state.last_signal, false};
  const std::size_t slice_start = t + 1 - n;
  if (models.chpc(log_series, slice_start, t) >= cfg.chpc_threshold) {
    r.state.win_srt = chpr_bar_index(slice_start, n, models.chpr(log_series, slice_start, t));
  }
  if (r.state.win_srt >= t) {
    r.anomaly = true;
    return r;
  }
  r.signal = models.tf(log_series, r.state.win_srt, t);
  r.state.last_signal = r.signal;
  return r;
}

SimMetrics make_metrics(double profit, std::size_t days_in, std::size_t times_in, std::size_t data_points) {
  SimMetrics m{profit, days_in, times_in, data_points, {}, {}, {}};
  if (days_in > 0) {
    m.day_profit_pct = profit / static_cast<double>(days_in);
    m.year_profit_pct = *m.day_profit_pct * 250.0;
  }
  if (data_points > 0) m.year_profit_avg_pct = profit / static_cast<double>(data_points) * 250.0;
  return m;
}

std::optional<double> contingency_recall(const Contingency& c, TrendClass cls) {
  const auto& row = c[static_cast<std::size_t>(cls)];
  std::size_t total = 0;
  for (auto v : row) total += v;
  if (total == 0) return std::nullopt;
  return static_cast<double>(row[static_cast<std::size_t>(cls)]) / static_cast<double>(total);
}

std::vector<WindowState> truth_states(std::span<const LabelWindow> windows, std::size_t length) {
  std::map<std::string, std::vector<LabelWindow>> by_expert;
  for (const auto& w : windows) by_expert[w.expert_id].push_back(w);
  std::vector<WindowState> out(length, WindowState::Unknown);
  for (const auto& [expert, ws] : by_expert) {
    const auto states = bar_states(ws, length);
    for (std::size_t i = 0; i < length; ++i) {
      if (out[i] == WindowState::Unknown) out[i] = states[i];
    }
  }
  return out;
}

namespace {

struct Range {
  std::size_t lo = 0;
  std::size_t hi = 0;  // exclusive
};

Range index_range(const OhlcSeries& s, const SimRange& range) {
  Range r{0, s.bars.size()};
  if (range.from) r.lo = first_index_on_or_after(s, *range.from);
  if (range.to) {
    r.hi = static_cast<std::size_t>(
        std::upper_bound(s.bars.begin(), s.bars.end(), *range.to, [](Date d, const OhlcBar& b) { return d < b.date; }) -
        s.bars.begin());
  }
  if (r.hi < r.lo) r.hi = r.lo;
  return r;
}

OhlcSeries as_log(const OhlcSeries& s) { return s.scale == PriceScale::NaturalLog ? s : to_log(s); }

struct StockRun {
  double profit = 0.0;
  std::size_t days_in = 0;
  std::size_t times_in = 0;
  std::size_t anomalies = 0;
  std::vector<TradeLogEntry> log;
};

class Accountant {
 public:
  Accountant(const OhlcSeries& log_series, StockRun& out) : s_(log_series), out_(out) {}

  // Books day t with `held` earning the return, then records the close.
  void day(std::size_t t, int signal, Position held, Position after) {
    const double ref = t > 0 ? s_.bars[t - 1].close : s_.bars[t].open;
    const double c = direction(held) * (s_.bars[t].close - ref) * 100.0;
    out_.profit += c;
    if (held != Position::None) ++out_.days_in;
    if (after != Position::None && after != last_) ++out_.times_in;
    last_ = after;
    out_.log.push_back({s_.stock_id, t, s_.bars[t].date, signal, held, after, c});
  }

 private:
  const OhlcSeries& s_;
  StockRun& out_;
  Position last_ = Position::None;
};

template <class PerStock>
SimulationResult run_all(std::span<const StockInput> stocks, const SimRange& range, bool with_contingency,
                         PerStock&& per_stock) {
  if (stocks.empty()) throw ValidationError("no stocks to simulate");
  std::vector<StockRun> runs(stocks.size());
  std::vector<std::size_t> points(stocks.size());
  std::vector<std::string> errors(stocks.size());
#pragma omp parallel for schedule(dynamic)
  for (std::size_t i = 0; i < stocks.size(); ++i) {
    try {
      const OhlcSeries s = as_log(stocks[i].series);
      const Range r = index_range(s, range);
      points[i] = r.hi - r.lo;
      per_stock(stocks[i], s, r, runs[i]);
    } catch (const std::exception& e) {
      errors[i] = stocks[i].series.stock_id + ": " + e.what();
    }
  }
  for (const auto& e : errors) {
    if (!e.empty()) throw ValidationError(e);
  }

  SimulationResult res;
  double profit = 0.0;
  std::size_t days = 0, times = 0, total_points = 0;
  for (std::size_t i = 0; i < stocks.size(); ++i) {
    profit += runs[i].profit;
    days += runs[i].days_in;
    times += runs[i].times_in;
    total_points += points[i];
    res.report.anomalies += runs[i].anomalies;
    res.report.per_stock.emplace_back(stocks[i].series.stock_id,
                                      make_metrics(runs[i].profit, runs[i].days_in, runs[i].times_in, points[i]));
    res.log.insert(res.log.end(), runs[i].log.begin(), runs[i].log.end());
  }
  if (total_points == 0) throw ValidationError("simulation range contains no bars");
  res.report.total = make_metrics(profit, days, times, total_points);
  if (with_contingency) res.report.contingency = contingency(res.log, stocks);
  return res;
}

bool has_labels(std::span<const StockInput> stocks) {
  return std::any_of(stocks.begin(), stocks.end(), [](const auto& s) { return !s.windows.empty(); });
}

}  // namespace

SimulationResult run_simulation(std::span<const StockInput> stocks, const SignalModels& models, const StepConfig& cfg,
                                const TradePolicy& policy, const SimRange& range) {
  cfg.slices.validate();
  return run_all(stocks, range, has_labels(stocks), [&](const StockInput&, const OhlcSeries& s, Range r, StockRun& out) {
    Accountant acc(s, out);
    SimState state;
    const std::size_t first_valid = std::max(r.lo, cfg.slices.n_days - 1);
    int signal = 0;
    for (std::size_t t = r.lo; t < r.hi; ++t) {
      const Position held = state.position;
      if (t >= first_valid && (t - first_valid) % cfg.slices.skip == 0) {
        const auto res = step(state, t, s, models, cfg);
        state = res.state;
        signal = res.signal;
        out.anomalies += res.anomaly;
      }
      const Position next = apply_policy(signal, held, policy);
      if (next != held) state.entry_idx = next == Position::None ? std::nullopt : std::optional<std::size_t>(t);
      state.position = next;
      acc.day(t, signal, held, next);
    }
  });
}

SimulationResult baseline_buy_and_hold(std::span<const StockInput> stocks, const SimRange& range) {
  return run_all(stocks, range, false, [](const StockInput&, const OhlcSeries& s, Range r, StockRun& out) {
    Accountant acc(s, out);
    for (std::size_t t = r.lo; t < r.hi; ++t) acc.day(t, 1, Position::Long, Position::Long);
  });
}

SimulationResult baseline_expert(std::span<const StockInput> stocks, const TradePolicy& policy,
                                 const SimRange& range) {
  bool any_label = false;
  for (const auto& st : stocks) {
    const OhlcSeries s = as_log(st.series);
    const Range r = index_range(s, range);
    const auto truth = truth_states(st.windows, s.bars.size());
    any_label = any_label || std::any_of(truth.begin() + static_cast<long>(r.lo), truth.begin() + static_cast<long>(r.hi),
                                         [](WindowState w) { return w != WindowState::Unknown; });
  }
  if (!any_label) throw ValidationError("expert baseline: no labels in range");

  return run_all(stocks, range, true, [&](const StockInput& st, const OhlcSeries& s, Range r, StockRun& out) {
    Accountant acc(s, out);
    const auto truth = truth_states(st.windows, s.bars.size());
    Position pos = Position::None;
    for (std::size_t t = r.lo; t < r.hi; ++t) {
      const auto cls = class_of_state(truth[t]);
      const int signal = cls ? signal_of(*cls) : 0;
      pos = cls ? apply_policy(signal, pos, policy) : Position::None;
      acc.day(t, signal, pos, pos);
    }
  });
}

Contingency contingency(std::span<const TradeLogEntry> log, std::span<const StockInput> stocks) {
  std::map<std::string, std::vector<WindowState>> truth;
  for (const auto& st : stocks) truth[st.series.stock_id] = truth_states(st.windows, st.series.bars.size());
  Contingency c{};
  for (const auto& e : log) {
    const auto it = truth.find(e.stock_id);
    if (it == truth.end() || e.index >= it->second.size()) continue;
    const auto cls = class_of_state(it->second[e.index]);
    if (!cls) continue;
    ++c[static_cast<std::size_t>(*cls)][static_cast<std::size_t>(class_of_signal(e.signal))];
  }
  return c;
}

namespace {

nlohmann::json opt(const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); }

}  // namespace

nlohmann::json to_json(const SimMetrics& m) {
  return {{"profit_pct", m.profit_pct},
          {"days_in", m.days_in},
          {"times_in", m.times_in},
          {"data_points", m.data_points},
          {"day_profit_pct", opt(m.day_profit_pct)},
          {"year_profit_pct", opt(m.year_profit_pct)},
          {"year_profit_avg_pct", opt(m.year_profit_avg_pct)}};
}

nlohmann::json to_json(const SimulationReport& r) {
  nlohmann::json j = to_json(r.total);
  j["anomalies"] = r.anomalies;
  auto& per = j["per_stock"] = nlohmann::json::object();
  for (const auto& [id, m] : r.per_stock) per[id] = to_json(m);
  if (r.contingency) {
    j["contingency"] = {{"classes", {"flat", "up", "down"}}, {"counts", *r.contingency}};
    j["recall"] = {{"flat", opt(contingency_recall(*r.contingency, TrendClass::Flat))},
                   {"up", opt(contingency_recall(*r.contingency, TrendClass::Up))},
                   {"down", opt(contingency_recall(*r.contingency, TrendClass::Down))}};
  }
  return j;
}

std::string trade_log_csv(std::span<const TradeLogEntry> log) {
  std::ostringstream out;
  out << "stock_id,index,date,signal,held,position,contribution\n";
  for (const auto& e : log) {
    out << e.stock_id << ',' << e.index << ',' << format_date(e.date) << ',' << e.signal << ',' << to_string(e.held)
        << ',' << to_string(e.position) << ',' << format_number(e.contribution) << '\n';
  }
  return out.str();
}

}  // namespace trendcnn
