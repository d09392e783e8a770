#include "trendcnn/synth.hpp"

#include <cmath>
#include <optional>
#include <random>

#include "trendcnn/error.hpp"
#include "trendcnn/random.hpp"

namespace trendcnn {

void SynthConfig::validate() const {
  if (bars < 2) throw ValidationError("synth: bars must be >= 2");
  if (segment_min < 2 || segment_max < segment_min) throw ValidationError("synth: invalid segment length range");
  if (drift_min < 0 || drift_max < drift_min) throw ValidationError("synth: invalid drift range");
  if (!(down_drift_scale > 0)) throw ValidationError("synth: down_drift_scale must be positive");
  if (noise < 0 || gap_noise < 0 || spread < 0) throw ValidationError("synth: negative noise or spread");
  if (weight_up < 0 || weight_down < 0 || weight_flat < 0 || weight_unknown < 0) {
    throw ValidationError("synth: negative state weight");
  }
  int positive = (weight_up > 0) + (weight_down > 0) + (weight_flat > 0) + (weight_unknown > 0);
  if (positive < 1) throw ValidationError("synth: all state weights are zero");
}

SynthOutput synth_generate(const SynthConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  Rng rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  const double weights[] = {cfg.weight_up, cfg.weight_down, cfg.weight_flat, cfg.weight_unknown};
  const WindowState states[] = {WindowState::TrendUp, WindowState::TrendDown, WindowState::Flat, WindowState::Unknown};
  const double total_weight = weights[0] + weights[1] + weights[2] + weights[3];
  int distinct = (weights[0] > 0) + (weights[1] > 0) + (weights[2] > 0) + (weights[3] > 0);

  auto draw_state = [&](std::optional<WindowState> previous) {
    while (true) {
      double u = uniform01(rng) * total_weight;
      std::size_t k = 0;
      while (k < 3 && u >= weights[k]) u -= weights[k++];
      if (weights[k] == 0) continue;
      if (previous && states[k] == *previous && distinct > 1) continue;
      return states[k];
    }
  };

  SynthOutput out;
  std::optional<WindowState> previous;
  std::size_t start = 0;
  while (start < cfg.bars) {
    const std::size_t len = cfg.segment_min + uniform_index(rng, cfg.segment_max - cfg.segment_min + 1);
    std::size_t end = std::min(cfg.bars, start + len) - 1;
    if (cfg.bars - (end + 1) < 2) end = cfg.bars - 1;  // no single-bar tail segment
    const WindowState state = draw_state(previous);
    if (start > 0) out.boundaries.push_back(start);
    out.windows.push_back({cfg.stock_id, cfg.expert_id, start, end, state});
    previous = state;
    start = end + 1;
  }

  const auto dates = business_days(cfg.start_date, cfg.bars);
  out.series.stock_id = cfg.stock_id;
  out.series.scale = PriceScale::Raw;
  out.series.bars.reserve(cfg.bars);

  double base = cfg.start_log_price;
  double prev_close = base;
  for (const auto& w : out.windows) {
    double drift = 0.0;
    if (w.state == WindowState::TrendUp || w.state == WindowState::TrendDown) {
      drift = cfg.drift_min + (cfg.drift_max - cfg.drift_min) * uniform01(rng);
      if (w.state == WindowState::TrendDown) drift = -drift * cfg.down_drift_scale;
    } else if (w.state == WindowState::Unknown) {
      drift = (cfg.drift_max) * (2.0 * uniform01(rng) - 1.0);
    }
    for (std::size_t i = w.start; i <= w.end; ++i) {
      if (i > 0) base += drift;
      const double close = base + cfg.noise * gauss(rng);
      const double open = (i == 0 ? base : prev_close) + cfg.gap_noise * gauss(rng);
      const double high = std::max(open, close) + cfg.spread * uniform01(rng);
      const double low = std::min(open, close) - cfg.spread * uniform01(rng);
      out.series.bars.push_back({dates[i], std::exp(open), std::exp(high), std::exp(low), std::exp(close)});
      prev_close = close;
    }
  }
  return out;
}

}  // namespace trendcnn
