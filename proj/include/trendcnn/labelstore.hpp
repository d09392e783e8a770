#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace trendcnn {

enum class WindowState { TrendUp, TrendDown, Flat, Unknown };

std::string_view to_string(WindowState state);
WindowState parse_window_state(std::string_view text);

// An expert-marked interval of bars [start, end] (both inclusive) in one state.
struct LabelWindow {
  std::string stock_id;
  std::string expert_id;
  std::size_t start = 0;
  std::size_t end = 0;
  WindowState state = WindowState::Unknown;

  std::size_t length() const noexcept { return end - start + 1; }
  bool operator==(const LabelWindow&) const = default;
};

// Bars where the labeled state changes. A changepoint at i means the new
// window starts at bar i.
struct ChangepointSet {
  std::string stock_id;
  std::string expert_id;
  std::vector<std::size_t> indices;

  bool operator==(const ChangepointSet&) const = default;
};

enum class ContradictionMode { KeepAll, Dedup, DedupDropContradictions };

std::string_view to_string(ContradictionMode mode);
ContradictionMode parse_contradiction_mode(std::string_view text);

struct ContradictionPolicy {
  static constexpr std::size_t kMaxSnapTolerance = 10;

  ContradictionMode mode = ContradictionMode::KeepAll;
  std::size_t snap_tolerance_days = 0;

  void validate() const;
};

// Checks ordering, non-overlap and bounds for windows of one stock and expert.
// `series_length` of 0 skips the bounds check.
void validate_windows(std::span<const LabelWindow> windows, std::size_t series_length = 0);

// Index pair of the first two windows that overlap or are out of order, if any.
std::optional<std::pair<std::size_t, std::size_t>> find_overlap(std::span<const LabelWindow> windows);

ChangepointSet derive_changepoints(std::span<const LabelWindow> windows);

// 1 iff a changepoint lies in [slice_start, slice_start + n_days - 1].
int label_chpc_slice(std::size_t slice_start, std::size_t n_days, const ChangepointSet& cps);

// Relative position of the last changepoint inside the slice, in [0, 1].
double label_chpr_slice(std::size_t slice_start, std::size_t n_days, const ChangepointSet& cps);

struct TrendDirection {
  int direction = 0;  // -1, 0, +1
  double slope = 0.0;
  bool anomaly = false;  // trend window with exactly zero slope
};

// OLS slope sign of log close against bar index over the window; Flat -> 0.
TrendDirection trend_direction(const LabelWindow& window, std::span<const double> log_closes);

// Bar-level state per expert: states[i] for bar i, Unknown where unlabeled.
std::vector<WindowState> bar_states(std::span<const LabelWindow> windows, std::size_t series_length);

// Run-length encodes bar states back into windows; Unknown runs are kept as
// Unknown windows when `keep_unknown` is set.
std::vector<LabelWindow> windows_from_states(std::span<const WindowState> states, const std::string& stock_id,
                                             const std::string& expert_id, bool keep_unknown);

// Number of bars where two experts on the same stock assign different known states.
std::size_t count_contradictions(std::span<const LabelWindow> records);

std::vector<LabelWindow> resolve(std::span<const LabelWindow> records, const ContradictionPolicy& policy);

// Label file: {"stock_id":..., "expert_id":..., "windows":[{"start","end","state"}]}.
struct LabelFile {
  std::string stock_id;
  std::string expert_id;
  std::vector<LabelWindow> windows;
};

LabelFile parse_label_json(std::string_view text);
std::string serialize_label_json(const LabelFile& file);
LabelFile load_label_file(const std::string& path);
void save_label_file(const std::string& path, const LabelFile& file);

}  // namespace trendcnn
