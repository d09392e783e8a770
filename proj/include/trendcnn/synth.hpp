#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "trendcnn/labelstore.hpp"
#include "trendcnn/marketdata.hpp"

namespace trendcnn {

// Piecewise drift-plus-noise log-price process. Every segment is emitted as
// one label window, so the segment boundaries are the ground-truth changepoints.
struct SynthConfig {
  std::string stock_id = "SYN0";
  std::string expert_id = "synth";
  std::size_t bars = 2500;
  std::size_t segment_min = 40;
  std::size_t segment_max = 600;
  double drift_min = 0.0015;  // |log drift| per bar in trend segments
  double drift_max = 0.004;
  double down_drift_scale = 1.0;  // down-trend drift = scale * drawn magnitude
  double noise = 0.01;        // sd of iid log-close noise around the segment line
  double gap_noise = 0.003;   // sd of open relative to previous close
  double spread = 0.008;      // max extra high/low excursion beyond the body
  double weight_up = 0.30;
  double weight_down = 0.15;
  double weight_flat = 0.55;
  double weight_unknown = 0.0;
  double start_log_price = 3.9;  // ~ 50 currency units
  Date start_date = Date{std::chrono::year{2005}, std::chrono::January, std::chrono::day{28}};

  void validate() const;
};

struct SynthOutput {
  OhlcSeries series;  // Raw scale
  std::vector<LabelWindow> windows;
  std::vector<std::size_t> boundaries;  // segment starts after the first, as generated
};

SynthOutput synth_generate(const SynthConfig& cfg, std::uint64_t seed);

}  // namespace trendcnn
