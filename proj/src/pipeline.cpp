#include "trendcnn/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "trendcnn/error.hpp"
#include "trendcnn/random.hpp"

namespace trendcnn {

namespace fs = std::filesystem;

nn::LossKind default_loss(SubmodelKind kind) {
  switch (kind) {
    case SubmodelKind::ChPc: return nn::LossKind::WeightedBce;
    case SubmodelKind::ChPr: return nn::LossKind::SquaredError;
    case SubmodelKind::TF: return nn::LossKind::CeSoftmax;
  }
  return nn::LossKind::SquaredError;
}

nn::LossKind ModelConfig::loss_kind() const { return loss ? *loss : default_loss(kind); }

ModelConfig model_config(const KeyValueConfig& kv, ModelConfig cfg) {
  kv.require_known({"kind", "n_days", "skip", "dpi", "loss", "w", "learning_rate", "minibatch", "iterations", "seed",
                    "policy", "snap_tolerance"});
  if (auto v = kv.text("kind")) cfg.kind = parse_submodel_kind(*v);
  if (auto v = kv.integer("n_days")) cfg.slices.n_days = *v;
  if (auto v = kv.integer("skip")) cfg.slices.skip = *v;
  if (auto v = kv.integer("dpi")) cfg.dpi = static_cast<int>(*v);
  if (auto v = kv.text("loss")) cfg.loss = nn::parse_loss_kind(*v);
  if (auto v = kv.real("w")) cfg.w = *v;
  if (auto v = kv.real("learning_rate")) cfg.learning_rate = *v;
  if (auto v = kv.integer("minibatch")) cfg.minibatch = *v;
  if (auto v = kv.integer("iterations")) cfg.iterations = *v;
  if (auto v = kv.integer("seed")) cfg.seed = *v;
  if (auto v = kv.text("policy")) cfg.policy.mode = parse_contradiction_mode(*v);
  if (auto v = kv.integer("snap_tolerance")) cfg.policy.snap_tolerance_days = *v;

  cfg.slices.validate();
  cfg.policy.validate();
  if (!(cfg.learning_rate > 0)) throw ValidationError("learning_rate must be positive");
  if (cfg.minibatch == 0) throw ValidationError("minibatch must be positive");
  if (cfg.w && !(*cfg.w > 0)) throw ValidationError("w must be positive");
  if (!loss_compatible(cfg.kind, cfg.loss_kind())) {
    throw ValidationError("loss " + nn::to_string(cfg.loss_kind()) + " does not fit submodel " + to_string(cfg.kind));
  }
  return cfg;
}

SubmodelTrainConfig train_config(const ModelConfig& cfg) {
  SubmodelTrainConfig t;
  t.kind = cfg.kind;
  t.dpi = cfg.dpi;
  t.train.loss.kind = cfg.loss_kind();
  t.train.loss.weight = cfg.w.value_or(1.0);
  t.auto_weight = !cfg.w.has_value();
  t.train.learning_rate = cfg.learning_rate;
  t.train.minibatch = cfg.minibatch;
  t.train.iterations = cfg.iterations;
  t.train.seed = cfg.seed;
  return t;
}

DatasetOptions dataset_options(const ModelConfig& cfg, std::optional<DateSplit> split) {
  DatasetOptions o;
  o.kind = cfg.kind;
  o.slices = cfg.slices;
  o.policy = cfg.policy;
  o.style.dpi = cfg.dpi;
  o.split = split;
  return o;
}

namespace {

std::vector<fs::path> files_with_extension(const std::string& dir, const std::string& ext) {
  if (!fs::is_directory(dir)) throw Error("io", "not a directory: " + dir);
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ext) out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

[[noreturn]] void rethrow_for(const fs::path& file) {
  try {
    throw;
  } catch (const Error& e) {
    throw Error(e.code(), file.string() + ": " + e.what());
  }
}

}  // namespace

std::vector<OhlcSeries> load_series_dir(const std::string& dir) {
  std::vector<OhlcSeries> out;
  for (const auto& p : files_with_extension(dir, ".csv")) {
    try {
      out.push_back(load_ohlc_csv(p.string()));
    } catch (const Error&) {
      rethrow_for(p);
    }
  }
  return out;
}

std::vector<LabelWindow> load_labels_dir(const std::string& dir) {
  std::vector<LabelWindow> out;
  for (const auto& p : files_with_extension(dir, ".json")) {
    try {
      auto f = load_label_file(p.string());
      out.insert(out.end(), f.windows.begin(), f.windows.end());
    } catch (const Error&) {
      rethrow_for(p);
    }
  }
  return out;
}

std::vector<StockInput> load_stocks(const std::string& series_dir, const std::string& labels_dir) {
  std::vector<StockInput> stocks;
  std::map<std::string, std::size_t> index;
  for (auto& s : load_series_dir(series_dir)) {
    index[s.stock_id] = stocks.size();
    stocks.push_back({std::move(s), {}});
  }
  if (!labels_dir.empty()) {
    for (auto& w : load_labels_dir(labels_dir)) {
      const auto it = index.find(w.stock_id);
      if (it == index.end()) throw ValidationError("labels for unknown stock '" + w.stock_id + "'");
      auto& st = stocks[it->second];
      if (w.end >= st.series.size()) {
        throw ValidationError("label window " + std::to_string(w.start) + ".." + std::to_string(w.end) +
                              " beyond series '" + w.stock_id + "'");
      }
      st.windows.push_back(std::move(w));
    }
  }
  return stocks;
}

std::string label_file_name(const std::string& stock_id, const std::string& expert_id) {
  return stock_id + "__" + expert_id + ".json";
}

std::vector<StockInput> synth_stocks(const SynthConfig& base, std::size_t count, std::uint64_t seed) {
  std::vector<StockInput> out(count);
#pragma omp parallel for schedule(dynamic)
  for (std::size_t i = 0; i < count; ++i) {
    SynthConfig cfg = base;
    char id[16];
    std::snprintf(id, sizeof id, "SYN%02zu", i);
    cfg.stock_id = id;
    auto g = synth_generate(cfg, mix_seed(seed, i));
    out[i] = {std::move(g.series), std::move(g.windows)};
  }
  return out;
}

SynthConfig synth_config(const KeyValueConfig& kv, SynthConfig cfg) {
  kv.require_known({"expert_id", "bars", "segment_min", "segment_max", "drift_min", "drift_max", "down_drift_scale", "noise", "gap_noise",
                    "spread", "weight_up", "weight_down", "weight_flat", "weight_unknown", "start_log_price",
                    "start_date"});
  if (auto v = kv.text("expert_id")) cfg.expert_id = *v;
  if (auto v = kv.integer("bars")) cfg.bars = *v;
  if (auto v = kv.integer("segment_min")) cfg.segment_min = *v;
  if (auto v = kv.integer("segment_max")) cfg.segment_max = *v;
  if (auto v = kv.real("drift_min")) cfg.drift_min = *v;
  if (auto v = kv.real("drift_max")) cfg.drift_max = *v;
  if (auto v = kv.real("down_drift_scale")) cfg.down_drift_scale = *v;
  if (auto v = kv.real("noise")) cfg.noise = *v;
  if (auto v = kv.real("gap_noise")) cfg.gap_noise = *v;
  if (auto v = kv.real("spread")) cfg.spread = *v;
  if (auto v = kv.real("weight_up")) cfg.weight_up = *v;
  if (auto v = kv.real("weight_down")) cfg.weight_down = *v;
  if (auto v = kv.real("weight_flat")) cfg.weight_flat = *v;
  if (auto v = kv.real("weight_unknown")) cfg.weight_unknown = *v;
  if (auto v = kv.real("start_log_price")) cfg.start_log_price = *v;
  if (auto v = kv.text("start_date")) cfg.start_date = parse_date(*v);
  cfg.validate();
  return cfg;
}

void write_stocks(std::span<const StockInput> stocks, const std::string& series_dir, const std::string& labels_dir) {
  fs::create_directories(series_dir);
  fs::create_directories(labels_dir);
  for (const auto& st : stocks) {
    write_file_atomic((fs::path(series_dir) / (st.series.stock_id + ".csv")).string(), serialize_ohlc_csv(st.series));
    std::map<std::string, LabelFile> files;
    for (const auto& w : st.windows) {
      auto& f = files[w.expert_id];
      f.stock_id = w.stock_id;
      f.expert_id = w.expert_id;
      f.windows.push_back(w);
    }
    for (const auto& [expert, f] : files) {
      save_label_file((fs::path(labels_dir) / label_file_name(st.series.stock_id, expert)).string(), f);
    }
  }
}

nlohmann::json ingest(const std::vector<std::string>& inputs, const std::string& out_dir) {
  std::vector<fs::path> files;
  for (const auto& in : inputs) {
    if (fs::is_directory(in)) {
      auto more = files_with_extension(in, ".csv");
      files.insert(files.end(), more.begin(), more.end());
    } else if (fs::is_regular_file(in)) {
      files.emplace_back(in);
    } else {
      throw Error("io", "no such file or directory: " + in);
    }
  }
  if (files.empty()) throw ValidationError("no CSV files to ingest");

  std::vector<OhlcSeries> series;
  std::map<std::string, fs::path> seen;
  for (const auto& p : files) {
    try {
      series.push_back(load_ohlc_csv(p.string()));
    } catch (const Error&) {
      rethrow_for(p);
    }
    const auto [it, fresh] = seen.emplace(series.back().stock_id, p);
    if (!fresh) throw ValidationError("stock '" + it->first + "' appears in both " + it->second.string() + " and " + p.string());
  }

  fs::create_directories(out_dir);
  nlohmann::json summary;
  std::size_t bars = 0;
  auto& list = summary["stocks"] = nlohmann::json::array();
  for (const auto& s : series) {
    write_file_atomic((fs::path(out_dir) / (s.stock_id + ".csv")).string(), serialize_ohlc_csv(s));
    bars += s.size();
    list.push_back({{"stock_id", s.stock_id},
                    {"bars", s.size()},
                    {"first", s.empty() ? "" : format_date(s.bars.front().date)},
                    {"last", s.empty() ? "" : format_date(s.bars.back().date)}});
  }
  summary["count"] = series.size();
  summary["bars"] = bars;
  return summary;
}

std::size_t write_dataset_files(const SubmodelDataset& ds, const DatasetOptions& opts, const std::string& ctf_path,
                                bool normalize) {
  const std::string tmp = ctf_path + ".tmp";
  std::size_t n = 0;
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("io", "cannot write " + tmp);
    n = write_dataset_ctf(ds, out, normalize);
    out.flush();
    if (!out) throw Error("io", "write failed: " + tmp);
  }
  fs::rename(tmp, ctf_path);
  auto manifest = dataset_manifest(ds, opts);
  manifest["normalized"] = normalize;
  write_file_atomic(ctf_path + ".manifest.json", manifest.dump(1) + "\n");
  return n;
}

std::string history_csv(std::span<const double> history) {
  std::string out = "iteration,loss\n";
  for (std::size_t i = 0; i < history.size(); ++i) out += std::to_string(i) + "," + format_number(history[i]) + "\n";
  return out;
}

void write_file_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("io", "cannot write " + tmp);
    out << content;
    if (!out) throw Error("io", "write failed: " + tmp);
  }
  fs::rename(tmp, path);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("io", "cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

nlohmann::json simulation_json(const SimulationReport& report, const StepConfig& step, const TradePolicy& policy,
                               const SimRange& range) {
  nlohmann::json j = to_json(report);
  j["config"] = {{"n_days", step.slices.n_days},
                 {"skip", step.slices.skip},
                 {"chpc_threshold", step.chpc_threshold},
                 {"allow_short", policy.allow_short},
                 {"flat_ignored", policy.flat_ignored},
                 {"from", range.from ? nlohmann::json(format_date(*range.from)) : nlohmann::json(nullptr)},
                 {"to", range.to ? nlohmann::json(format_date(*range.to)) : nlohmann::json(nullptr)}};
  return j;
}

}  // namespace trendcnn
