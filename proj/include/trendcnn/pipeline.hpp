#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "trendcnn/config.hpp"
#include "trendcnn/simulator.hpp"
#include "trendcnn/submodels.hpp"
#include "trendcnn/synth.hpp"

namespace trendcnn {

// Settings shared by make-dataset and train, readable from a key=value file:
// kind, n_days, skip, dpi, loss, w, learning_rate, minibatch, iterations,
// seed, policy, snap_tolerance.
struct ModelConfig {
  SubmodelKind kind = SubmodelKind::ChPc;
  SliceSpec slices;
  int dpi = 10;
  std::optional<nn::LossKind> loss;  // default per kind
  std::optional<double> w;           // WeightedBce; default negatives / positives
  double learning_rate = 0.001;
  std::size_t minibatch = 64;
  std::size_t iterations = 1000;
  std::uint64_t seed = 1;
  ContradictionPolicy policy;

  nn::LossKind loss_kind() const;
};

nn::LossKind default_loss(SubmodelKind kind);
ModelConfig model_config(const KeyValueConfig& kv, ModelConfig defaults = {});
SubmodelTrainConfig train_config(const ModelConfig& cfg);
DatasetOptions dataset_options(const ModelConfig& cfg, std::optional<DateSplit> split = std::nullopt);

// Every *.csv in `dir`, sorted by file name; the stem is the stock id.
std::vector<OhlcSeries> load_series_dir(const std::string& dir);
// Every *.json label file in `dir`, sorted by file name.
std::vector<LabelWindow> load_labels_dir(const std::string& dir);
// Series with their windows; `labels_dir` may be empty.
std::vector<StockInput> load_stocks(const std::string& series_dir, const std::string& labels_dir);

std::string label_file_name(const std::string& stock_id, const std::string& expert_id);

// `count` stocks named SYN00, SYN01, ... each from its own seed stream.
std::vector<StockInput> synth_stocks(const SynthConfig& base, std::size_t count, std::uint64_t seed);
SynthConfig synth_config(const KeyValueConfig& kv, SynthConfig defaults = {});
void write_stocks(std::span<const StockInput> stocks, const std::string& series_dir, const std::string& labels_dir);

// Parses and validates CSV files (or directories of them) and writes them in
// normalized form to out_dir/<stock>.csv. Errors name the offending file.
nlohmann::json ingest(const std::vector<std::string>& inputs, const std::string& out_dir);

// CTF plus `<ctf>.manifest.json` with per-record provenance.
std::size_t write_dataset_files(const SubmodelDataset& ds, const DatasetOptions& opts, const std::string& ctf_path,
                                bool normalize);

std::string history_csv(std::span<const double> history);

// Writes via a temporary file and rename.
void write_file_atomic(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);

nlohmann::json simulation_json(const SimulationReport& report, const StepConfig& step, const TradePolicy& policy,
                               const SimRange& range);

}  // namespace trendcnn
