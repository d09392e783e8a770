#include "trendcnn/labelstore.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "trendcnn/error.hpp"

namespace trendcnn {

using json = nlohmann::json;

std::string_view to_string(WindowState state) {
  switch (state) {
    case WindowState::TrendUp: return "trend_up";
    case WindowState::TrendDown: return "trend_down";
    case WindowState::Flat: return "flat";
    case WindowState::Unknown: return "unknown";
  }
  return "unknown";
}

WindowState parse_window_state(std::string_view text) {
  if (text == "trend_up") return WindowState::TrendUp;
  if (text == "trend_down") return WindowState::TrendDown;
  if (text == "flat") return WindowState::Flat;
  if (text == "unknown") return WindowState::Unknown;
  throw ParseError("unknown window state '" + std::string(text) + "'");
}

std::string_view to_string(ContradictionMode mode) {
  switch (mode) {
    case ContradictionMode::KeepAll: return "keep_all";
    case ContradictionMode::Dedup: return "dedup";
    case ContradictionMode::DedupDropContradictions: return "dedup_drop_contradictions";
  }
  return "keep_all";
}

ContradictionMode parse_contradiction_mode(std::string_view text) {
  if (text == "keep_all") return ContradictionMode::KeepAll;
  if (text == "dedup") return ContradictionMode::Dedup;
  if (text == "dedup_drop_contradictions") return ContradictionMode::DedupDropContradictions;
  throw ParseError("unknown contradiction policy '" + std::string(text) + "'");
}

void ContradictionPolicy::validate() const {
  if (snap_tolerance_days > kMaxSnapTolerance) {
    throw ValidationError("snap tolerance " + std::to_string(snap_tolerance_days) + " exceeds " +
                          std::to_string(kMaxSnapTolerance) + " days");
  }
}

std::optional<std::pair<std::size_t, std::size_t>> find_overlap(std::span<const LabelWindow> windows) {
  for (std::size_t i = 1; i < windows.size(); ++i) {
    if (windows[i].start <= windows[i - 1].end) return std::pair{i - 1, i};
  }
  return std::nullopt;
}

void validate_windows(std::span<const LabelWindow> windows, std::size_t series_length) {
  for (std::size_t i = 0; i < windows.size(); ++i) {
    const auto& w = windows[i];
    if (w.start > w.end) throw ValidationError("window " + std::to_string(i) + ": start > end");
    if (series_length && w.end >= series_length) {
      throw ValidationError("window " + std::to_string(i) + ": end " + std::to_string(w.end) +
                            " beyond series length " + std::to_string(series_length));
    }
    if (i > 0 && (w.stock_id != windows[0].stock_id || w.expert_id != windows[0].expert_id)) {
      throw ValidationError("windows mix stocks or experts");
    }
  }
  if (auto overlap = find_overlap(windows)) {
    throw ValidationError("overlapping windows " + std::to_string(overlap->first) + " and " +
                          std::to_string(overlap->second));
  }
}

ChangepointSet derive_changepoints(std::span<const LabelWindow> windows) {
  validate_windows(windows);
  ChangepointSet cps;
  if (!windows.empty()) {
    cps.stock_id = windows.front().stock_id;
    cps.expert_id = windows.front().expert_id;
  }
  for (std::size_t i = 1; i < windows.size(); ++i) {
    const auto& prev = windows[i - 1];
    const auto& cur = windows[i];
    if (prev.end + 1 != cur.start) continue;
    if (prev.state == WindowState::Unknown || cur.state == WindowState::Unknown) continue;
    if (prev.state != cur.state) cps.indices.push_back(cur.start);
  }
  return cps;
}

int label_chpc_slice(std::size_t slice_start, std::size_t n_days, const ChangepointSet& cps) {
  if (n_days < 2) throw ValidationError("n_days must be >= 2");
  auto it = std::lower_bound(cps.indices.begin(), cps.indices.end(), slice_start);
  return it != cps.indices.end() && *it <= slice_start + n_days - 1 ? 1 : 0;
}

double label_chpr_slice(std::size_t slice_start, std::size_t n_days, const ChangepointSet& cps) {
  if (n_days < 2) throw ValidationError("n_days must be >= 2");
  const std::size_t last = slice_start + n_days - 1;
  auto it = std::upper_bound(cps.indices.begin(), cps.indices.end(), last);
  if (it == cps.indices.begin() || *std::prev(it) < slice_start) {
    throw ValidationError("no changepoint inside slice starting at " + std::to_string(slice_start));
  }
  return static_cast<double>(*std::prev(it) - slice_start) / static_cast<double>(n_days - 1);
}

TrendDirection trend_direction(const LabelWindow& window, std::span<const double> log_closes) {
  if (window.state == WindowState::Unknown) throw ValidationError("trend direction of an Unknown window");
  if (window.end < window.start || window.length() < 2) throw ValidationError("window too short for a trend direction");
  if (window.end >= log_closes.size()) throw ValidationError("window beyond series end");
  if (window.state == WindowState::Flat) return {};

  const auto n = static_cast<double>(window.length());
  const double mean_x = (n - 1.0) / 2.0;
  double mean_y = 0.0;
  for (std::size_t i = window.start; i <= window.end; ++i) mean_y += log_closes[i];
  mean_y /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = window.start; i <= window.end; ++i) {
    const double dx = static_cast<double>(i - window.start) - mean_x;
    sxy += dx * (log_closes[i] - mean_y);
    sxx += dx * dx;
  }
  TrendDirection out;
  out.slope = sxy / sxx;
  if (sxy > 0) {
    out.direction = 1;
  } else if (sxy < 0) {
    out.direction = -1;
  } else {
    out.anomaly = true;
  }
  return out;
}

std::vector<WindowState> bar_states(std::span<const LabelWindow> windows, std::size_t series_length) {
  std::vector<WindowState> states(series_length, WindowState::Unknown);
  for (const auto& w : windows) {
    for (std::size_t i = w.start; i <= w.end && i < series_length; ++i) states[i] = w.state;
  }
  return states;
}

std::vector<LabelWindow> windows_from_states(std::span<const WindowState> states, const std::string& stock_id,
                                             const std::string& expert_id, bool keep_unknown) {
  std::vector<LabelWindow> out;
  std::size_t i = 0;
  while (i < states.size()) {
    std::size_t j = i;
    while (j + 1 < states.size() && states[j + 1] == states[i]) ++j;
    if (keep_unknown || states[i] != WindowState::Unknown) out.push_back({stock_id, expert_id, i, j, states[i]});
    i = j + 1;
  }
  return out;
}

namespace {

using BarLabels = std::vector<std::optional<WindowState>>;

struct ExpertGroup {
  std::string expert_id;
  std::vector<std::size_t> record_indices;  // into the working copy, in window order
};

// stock -> experts (sorted by expert id), each with its windows sorted by start.
std::map<std::string, std::vector<ExpertGroup>> group_records(std::span<const LabelWindow> records) {
  std::map<std::string, std::map<std::string, std::vector<std::size_t>>> tmp;
  for (std::size_t i = 0; i < records.size(); ++i) tmp[records[i].stock_id][records[i].expert_id].push_back(i);
  std::map<std::string, std::vector<ExpertGroup>> out;
  for (auto& [stock, experts] : tmp) {
    for (auto& [expert, idx] : experts) {
      std::stable_sort(idx.begin(), idx.end(),
                       [&](std::size_t a, std::size_t b) { return records[a].start < records[b].start; });
      std::vector<LabelWindow> ws;
      for (auto k : idx) ws.push_back(records[k]);
      validate_windows(ws);
      out[stock].push_back({expert, std::move(idx)});
    }
  }
  return out;
}

BarLabels labels_of(const std::vector<LabelWindow>& records, const ExpertGroup& group, std::size_t length) {
  BarLabels bars(length);
  for (auto k : group.record_indices) {
    for (std::size_t i = records[k].start; i <= records[k].end; ++i) bars[i] = records[k].state;
  }
  return bars;
}

void snap_changepoints(std::vector<LabelWindow>& records, const std::vector<ExpertGroup>& experts,
                       std::size_t tolerance) {
  struct Cp {
    std::size_t index;
    std::size_t expert;
    std::size_t window;  // position within the expert's window list (window that starts here)
  };
  std::vector<Cp> cps;
  for (std::size_t e = 0; e < experts.size(); ++e) {
    const auto& idx = experts[e].record_indices;
    for (std::size_t k = 1; k < idx.size(); ++k) {
      const auto& prev = records[idx[k - 1]];
      const auto& cur = records[idx[k]];
      if (prev.end + 1 == cur.start && prev.state != cur.state && prev.state != WindowState::Unknown &&
          cur.state != WindowState::Unknown) {
        cps.push_back({cur.start, e, k});
      }
    }
  }
  std::sort(cps.begin(), cps.end(), [](const Cp& a, const Cp& b) {
    return a.index != b.index ? a.index < b.index : a.expert < b.expert;
  });

  std::vector<bool> done(cps.size(), false);
  for (std::size_t a = 0; a < cps.size(); ++a) {
    if (done[a]) continue;
    done[a] = true;
    const std::size_t anchor = cps[a].index;
    std::set<std::size_t> cluster_experts{cps[a].expert};
    for (std::size_t b = a + 1; b < cps.size() && cps[b].index <= anchor + tolerance; ++b) {
      if (done[b] || cluster_experts.count(cps[b].expert)) continue;
      cluster_experts.insert(cps[b].expert);
      done[b] = true;
      if (cps[b].index == anchor) continue;
      const auto& idx = experts[cps[b].expert].record_indices;
      auto& prev = records[idx[cps[b].window - 1]];
      auto& cur = records[idx[cps[b].window]];
      if (anchor <= prev.start) continue;  // would empty the preceding window
      prev.end = anchor - 1;
      cur.start = anchor;
    }
  }
}

std::vector<LabelWindow> from_bar_labels(const BarLabels& bars, const std::string& stock, const std::string& expert) {
  std::vector<LabelWindow> out;
  std::size_t i = 0;
  while (i < bars.size()) {
    std::size_t j = i;
    while (j + 1 < bars.size() && bars[j + 1] == bars[i]) ++j;
    if (bars[i]) out.push_back({stock, expert, i, j, *bars[i]});
    i = j + 1;
  }
  return out;
}

}  // namespace

std::size_t count_contradictions(std::span<const LabelWindow> records) {
  std::vector<LabelWindow> copy(records.begin(), records.end());
  std::size_t total = 0;
  for (const auto& [stock, experts] : group_records(copy)) {
    std::size_t length = 0;
    for (const auto& g : experts) {
      for (auto k : g.record_indices) length = std::max(length, copy[k].end + 1);
    }
    std::vector<BarLabels> per_expert;
    for (const auto& g : experts) per_expert.push_back(labels_of(copy, g, length));
    for (std::size_t i = 0; i < length; ++i) {
      std::optional<WindowState> seen;
      for (const auto& bars : per_expert) {
        if (!bars[i] || *bars[i] == WindowState::Unknown) continue;
        if (seen && *seen != *bars[i]) {
          ++total;
          break;
        }
        seen = bars[i];
      }
    }
  }
  return total;
}

std::vector<LabelWindow> resolve(std::span<const LabelWindow> records, const ContradictionPolicy& policy) {
  policy.validate();
  std::vector<LabelWindow> work(records.begin(), records.end());
  const auto groups = group_records(work);

  if (policy.snap_tolerance_days > 0) {
    for (const auto& [stock, experts] : groups) {
      if (experts.size() > 1) snap_changepoints(work, experts, policy.snap_tolerance_days);
    }
  }
  if (policy.mode == ContradictionMode::KeepAll) return work;

  std::vector<LabelWindow> out;
  for (const auto& [stock, experts] : groups) {
    std::size_t length = 0;
    for (const auto& g : experts) {
      for (auto k : g.record_indices) length = std::max(length, work[k].end + 1);
    }
    std::vector<BarLabels> per_expert;
    for (const auto& g : experts) per_expert.push_back(labels_of(work, g, length));

    if (policy.mode == ContradictionMode::DedupDropContradictions) {
      for (std::size_t i = 0; i < length; ++i) {
        std::set<WindowState> known;
        for (const auto& bars : per_expert) {
          if (bars[i] && *bars[i] != WindowState::Unknown) known.insert(*bars[i]);
        }
        if (known.size() < 2) continue;
        for (auto& bars : per_expert) {
          if (bars[i]) bars[i] = WindowState::Unknown;
        }
      }
    }
    // Earlier experts own a (bar, state) pair; later duplicates are dropped.
    for (std::size_t e = 1; e < per_expert.size(); ++e) {
      for (std::size_t i = 0; i < length; ++i) {
        if (!per_expert[e][i]) continue;
        for (std::size_t p = 0; p < e; ++p) {
          if (per_expert[p][i] == per_expert[e][i]) {
            per_expert[e][i].reset();
            break;
          }
        }
      }
    }
    for (std::size_t e = 0; e < experts.size(); ++e) {
      auto ws = from_bar_labels(per_expert[e], stock, experts[e].expert_id);
      out.insert(out.end(), ws.begin(), ws.end());
    }
  }
  return out;
}

LabelFile parse_label_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("label json: ") + e.what());
  }
  LabelFile file;
  try {
    file.stock_id = doc.at("stock_id").get<std::string>();
    file.expert_id = doc.at("expert_id").get<std::string>();
    for (const auto& w : doc.at("windows")) {
      const auto start = w.at("start").get<long long>();
      const auto end = w.at("end").get<long long>();
      if (start < 0 || end < 0) throw ParseError("label json: negative window index");
      file.windows.push_back({file.stock_id, file.expert_id, static_cast<std::size_t>(start),
                              static_cast<std::size_t>(end), parse_window_state(w.at("state").get<std::string>())});
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("label json: ") + e.what());
  }
  return file;
}

std::string serialize_label_json(const LabelFile& file) {
  json windows = json::array();
  for (const auto& w : file.windows) {
    windows.push_back({{"start", w.start}, {"end", w.end}, {"state", std::string(to_string(w.state))}});
  }
  json doc = {{"stock_id", file.stock_id}, {"expert_id", file.expert_id}, {"windows", windows}};
  return doc.dump() + "\n";
}

LabelFile load_label_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("io", "cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_label_json(buf.str());
}

void save_label_file(const std::string& path, const LabelFile& file) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("io", "cannot write " + tmp);
    out << serialize_label_json(file);
    if (!out.flush()) throw Error("io", "write failed for " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error("io", "cannot rename " + tmp + ": " + ec.message());
}

}  // namespace trendcnn
