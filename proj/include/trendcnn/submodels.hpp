#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "trendcnn/dataset.hpp"
#include "trendcnn/labelstore.hpp"
#include "trendcnn/marketdata.hpp"
#include "trendcnn/metrics.hpp"
#include "trendcnn/nn/network.hpp"
#include "trendcnn/nn/train.hpp"
#include "trendcnn/rasterizer.hpp"

namespace trendcnn {

enum class SubmodelKind { ChPc, ChPr, TF };

std::string to_string(SubmodelKind kind);
SubmodelKind parse_submodel_kind(const std::string& text);

// TF classes in one-hot / confusion order.
enum class TrendClass { Flat = 0, Up = 1, Down = 2 };
inline constexpr std::size_t kTrendClasses = 3;

int signal_of(TrendClass c);      // Flat 0, Up +1, Down -1
TrendClass class_of_signal(int signal);
std::optional<TrendClass> class_of_state(WindowState state);  // Unknown -> none

struct SliceSpec {
  std::size_t n_days = 25;
  std::size_t skip = 5;

  void validate() const;
};

nn::Shape3 input_shape(const RenderStyle& style);

// Conv trunk 5x5/8/s2, 5x5/16/s2, 3x3/16/s2 (Same, ReLU) then dense -> 1.
nn::Network build_chpc(nn::Shape3 input, std::uint64_t seed);  // sigmoid head
nn::Network build_chpr(nn::Shape3 input, std::uint64_t seed);  // linear head
// Two conv layers sized per resolution, dense -> 3, softmax. dpi 10 or 20.
nn::Network build_tf(int dpi, std::uint64_t seed);
nn::Network build_submodel(SubmodelKind kind, int dpi, std::uint64_t seed);

std::size_t label_dim(SubmodelKind kind);
bool loss_compatible(SubmodelKind kind, nn::LossKind loss);

// Stock series (any scale) with the label windows of every expert for it.
struct StockInput {
  OhlcSeries series;
  std::vector<LabelWindow> windows;
};

struct DateSplit {
  enum class Side { Before, OnOrAfter };
  Date threshold;
  Side side = Side::Before;
};

struct DatasetOptions {
  SubmodelKind kind = SubmodelKind::ChPc;
  SliceSpec slices;
  ContradictionPolicy policy;
  RenderStyle style;
  std::optional<DateSplit> split;
};

struct RecordInfo {
  std::string stock_id;
  std::string expert_id;
  std::size_t start = 0;  // rendered bar range, inclusive
  std::size_t end = 0;
  Date start_date;
  Date end_date;
};

struct SubmodelDataset {
  Dataset data;
  std::vector<RecordInfo> records;
};

// ChPc: every skip-th full slice fully covered by known labels.
// ChPr: the ChPc slices that contain a changepoint.
// TF:   one record per known window, clipped to the split side.
// Throws ValidationError if nothing qualifies.
SubmodelDataset make_dataset(std::span<const StockInput> stocks, const DatasetOptions& opts);

// Writes the records as CTF; `normalize` divides pixel values by 255.
std::size_t write_dataset_ctf(const SubmodelDataset& ds, std::ostream& sink, bool normalize);
nlohmann::json dataset_manifest(const SubmodelDataset& ds, const DatasetOptions& opts);

struct SubmodelTrainConfig {
  SubmodelKind kind = SubmodelKind::ChPc;
  int dpi = 10;
  nn::TrainConfig train;
  bool auto_weight = true;  // WeightedBce: w = negatives / positives of the training set
};

struct SubmodelTrainResult {
  nn::Network network;
  std::vector<double> history;
  double bce_weight = 1.0;
  std::map<std::string, std::string> metadata;
};

SubmodelTrainResult train_submodel(const Dataset& data, SubmodelTrainConfig cfg,
                                   const std::function<void(std::size_t, double)>& on_iteration = {});

// Full-network outputs for every record, [size, output_dim] row-major.
std::vector<double> predict_dataset(const nn::Network& net, const Dataset& data);

double chpr_position(double raw);  // clamp to [0, 1]
std::size_t chpr_bar_index(std::size_t slice_start, std::size_t n_days, double position);

struct EvalReport {
  SubmodelKind kind = SubmodelKind::ChPc;
  std::size_t records = 0;
  std::optional<double> accuracy;
  std::optional<double> majority_accuracy;
  std::optional<double> auc;
  std::optional<ConfusionMatrix> confusion;
  std::map<int, PrecisionRecallF> per_class;
  std::optional<int> minority_class;
  std::optional<R2Mae> regression;
  double pred_mean = 0.0;
  double pred_std = 0.0;
  double target_mean = 0.0;
  double target_std = 0.0;
};

EvalReport evaluate(SubmodelKind kind, const nn::Network& net, const Dataset& data);
nlohmann::json to_json(const EvalReport& report);

}  // namespace trendcnn
