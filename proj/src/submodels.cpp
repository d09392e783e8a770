#include "trendcnn/submodels.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <ostream>

#include "trendcnn/ctf.hpp"
#include "trendcnn/error.hpp"

namespace trendcnn {

using nn::LayerSpec;
using nn::Padding;

std::string to_string(SubmodelKind kind) {
  switch (kind) {
    case SubmodelKind::ChPc: return "chpc";
    case SubmodelKind::ChPr: return "chpr";
    case SubmodelKind::TF: return "tf";
  }
  return "chpc";
}

SubmodelKind parse_submodel_kind(const std::string& text) {
  if (text == "chpc") return SubmodelKind::ChPc;
  if (text == "chpr") return SubmodelKind::ChPr;
  if (text == "tf") return SubmodelKind::TF;
  throw ParseError("unknown submodel kind '" + text + "' (expected chpc, chpr or tf)");
}

int signal_of(TrendClass c) {
  switch (c) {
    case TrendClass::Flat: return 0;
    case TrendClass::Up: return 1;
    case TrendClass::Down: return -1;
  }
  return 0;
}

TrendClass class_of_signal(int signal) {
  if (signal > 0) return TrendClass::Up;
  if (signal < 0) return TrendClass::Down;
  return TrendClass::Flat;
}

std::optional<TrendClass> class_of_state(WindowState state) {
  switch (state) {
    case WindowState::TrendUp: return TrendClass::Up;
    case WindowState::TrendDown: return TrendClass::Down;
    case WindowState::Flat: return TrendClass::Flat;
    case WindowState::Unknown: return std::nullopt;
  }
  return std::nullopt;
}

void SliceSpec::validate() const {
  if (n_days < 2) throw ValidationError("n_days must be >= 2");
  if (skip < 1 || skip > n_days) throw ValidationError("skip must be in [1, n_days]");
}

nn::Shape3 input_shape(const RenderStyle& style) {
  style.validate();
  return {3, static_cast<std::size_t>(style.height_px()), static_cast<std::size_t>(style.width_px())};
}

namespace {

std::vector<LayerSpec> chp_trunk() {
  return {LayerSpec::conv2d(5, 5, 8, 2, 2), LayerSpec::relu(), LayerSpec::conv2d(5, 5, 16, 2, 2), LayerSpec::relu(),
          LayerSpec::conv2d(3, 3, 16, 2, 2), LayerSpec::relu(), LayerSpec::dense(1)};
}

}  // namespace

nn::Network build_chpc(nn::Shape3 input, std::uint64_t seed) {
  auto layers = chp_trunk();
  layers.push_back(LayerSpec::sigmoid());
  return nn::Network(input, std::move(layers), seed);
}

nn::Network build_chpr(nn::Shape3 input, std::uint64_t seed) { return nn::Network(input, chp_trunk(), seed); }

nn::Network build_tf(int dpi, std::uint64_t seed) {
  RenderStyle style;
  style.dpi = dpi;
  std::vector<LayerSpec> layers;
  if (dpi == 10) {
    layers = {LayerSpec::conv2d(25, 25, 8, 5, 5), LayerSpec::relu(), LayerSpec::conv2d(5, 5, 16, 2, 2)};
  } else if (dpi == 20) {
    layers = {LayerSpec::conv2d(50, 50, 8, 10, 10), LayerSpec::relu(), LayerSpec::conv2d(10, 10, 16, 4, 4)};
  } else {
    throw ValidationError("TF model defined for dpi 10 and 20 only, got " + std::to_string(dpi));
  }
  layers.push_back(LayerSpec::relu());
  layers.push_back(LayerSpec::dense(kTrendClasses));
  layers.push_back(LayerSpec::softmax());
  return nn::Network(input_shape(style), std::move(layers), seed);
}

nn::Network build_submodel(SubmodelKind kind, int dpi, std::uint64_t seed) {
  RenderStyle style;
  style.dpi = dpi;
  switch (kind) {
    case SubmodelKind::ChPc: return build_chpc(input_shape(style), seed);
    case SubmodelKind::ChPr: return build_chpr(input_shape(style), seed);
    case SubmodelKind::TF: return build_tf(dpi, seed);
  }
  throw ValidationError("unknown submodel kind");
}

std::size_t label_dim(SubmodelKind kind) { return kind == SubmodelKind::TF ? kTrendClasses : 1; }

bool loss_compatible(SubmodelKind kind, nn::LossKind loss) {
  switch (kind) {
    case SubmodelKind::ChPc: return loss == nn::LossKind::WeightedBce || loss == nn::LossKind::FMeasure;
    case SubmodelKind::ChPr: return loss == nn::LossKind::SquaredError;
    case SubmodelKind::TF: return loss == nn::LossKind::CeSoftmax;
  }
  return false;
}

namespace {

struct StockRecords {
  std::vector<double> labels;
  std::vector<std::uint8_t> pixels;
  std::vector<RecordInfo> info;
};

StockRecords stock_records(const StockInput& stock, const DatasetOptions& opts, const std::vector<LabelWindow>& resolved) {
  const OhlcSeries log_series = stock.series.scale == PriceScale::NaturalLog ? stock.series : to_log(stock.series);
  const std::size_t n = log_series.bars.size();
  std::size_t lo = 0, hi = n;
  if (opts.split) {
    const std::size_t cut = first_index_on_or_after(log_series, opts.split->threshold);
    if (opts.split->side == DateSplit::Side::Before) hi = cut;
    else lo = cut;
  }

  std::map<std::string, std::vector<LabelWindow>> by_expert;
  for (const auto& w : resolved) {
    if (w.stock_id == log_series.stock_id) by_expert[w.expert_id].push_back(w);
  }

  StockRecords out;
  auto emit = [&](const std::string& expert, std::size_t start, std::size_t end, std::span<const double> labels) {
    const auto img = render(log_series, start, end, opts.style);
    out.pixels.insert(out.pixels.end(), img.data.begin(), img.data.end());
    out.labels.insert(out.labels.end(), labels.begin(), labels.end());
    out.info.push_back({log_series.stock_id, expert, start, end, log_series.bars[start].date, log_series.bars[end].date});
  };

  for (auto& [expert, windows] : by_expert) {
    std::sort(windows.begin(), windows.end(), [](const auto& a, const auto& b) { return a.start < b.start; });
    validate_windows(windows, n);

    if (opts.kind == SubmodelKind::TF) {
      std::vector<double> closes(n);
      for (std::size_t i = 0; i < n; ++i) closes[i] = log_series.bars[i].close;
      for (const auto& w : windows) {
        if (w.state == WindowState::Unknown) continue;
        LabelWindow clipped = w;
        clipped.start = std::max(w.start, lo);
        clipped.end = std::min(w.end, hi == 0 ? 0 : hi - 1);
        if (hi == 0 || clipped.start > clipped.end || clipped.length() < 2) continue;
        const auto dir = trend_direction(clipped, closes);
        std::array<double, kTrendClasses> onehot{};
        onehot[static_cast<std::size_t>(class_of_signal(dir.direction))] = 1.0;
        emit(expert, clipped.start, clipped.end, onehot);
      }
      continue;
    }

    const auto states = bar_states(windows, n);
    const auto cps = derive_changepoints(windows);
    const std::size_t len = opts.slices.n_days;
    for (std::size_t s = lo; s + len <= hi; s += opts.slices.skip) {
      const bool known = std::none_of(states.begin() + static_cast<long>(s), states.begin() + static_cast<long>(s + len),
                                      [](WindowState st) { return st == WindowState::Unknown; });
      if (!known) continue;
      const int has_cp = label_chpc_slice(s, len, cps);
      if (opts.kind == SubmodelKind::ChPc) {
        const double y = has_cp;
        emit(expert, s, s + len - 1, std::span<const double>(&y, 1));
      } else if (has_cp) {
        const double y = label_chpr_slice(s, len, cps);
        emit(expert, s, s + len - 1, std::span<const double>(&y, 1));
      }
    }
  }
  return out;
}

}  // namespace

SubmodelDataset make_dataset(std::span<const StockInput> stocks, const DatasetOptions& opts) {
  opts.slices.validate();
  opts.style.validate();
  if (opts.kind == SubmodelKind::TF && opts.style.dpi != 10 && opts.style.dpi != 20) {
    throw ValidationError("TF datasets need dpi 10 or 20");
  }
  std::vector<LabelWindow> all;
  for (const auto& s : stocks) {
    for (const auto& w : s.windows) {
      if (w.stock_id != s.series.stock_id) {
        throw ValidationError("label window for stock '" + w.stock_id + "' attached to series '" + s.series.stock_id + "'");
      }
      all.push_back(w);
    }
  }
  const auto resolved = resolve(all, opts.policy);

  std::vector<StockRecords> parts(stocks.size());
  std::vector<std::string> errors(stocks.size());
#pragma omp parallel for schedule(dynamic)
  for (std::size_t i = 0; i < stocks.size(); ++i) {
    try {
      parts[i] = stock_records(stocks[i], opts, resolved);
    } catch (const std::exception& e) {
      errors[i] = stocks[i].series.stock_id + ": " + e.what();
    }
  }
  for (const auto& e : errors) {
    if (!e.empty()) throw ValidationError(e);
  }

  const auto shape = input_shape(opts.style);
  const std::size_t ld = label_dim(opts.kind);
  SubmodelDataset out{Dataset(ld, shape.size()), {}};
  for (auto& p : parts) {
    for (std::size_t r = 0; r < p.info.size(); ++r) {
      out.data.add(std::span<const double>(p.labels).subspan(r * ld, ld),
                   std::span<const std::uint8_t>(p.pixels).subspan(r * shape.size(), shape.size()));
      out.records.push_back(std::move(p.info[r]));
    }
    p = {};
  }
  if (out.records.empty()) throw ValidationError("dataset is empty: no slice qualifies");
  return out;
}

std::size_t write_dataset_ctf(const SubmodelDataset& ds, std::ostream& sink, bool normalize) {
  CtfWriter writer(sink);
  const double scale = normalize ? 1.0 / 255.0 : 1.0;
  std::vector<double> features(ds.data.feature_dim());
  for (std::size_t i = 0; i < ds.data.size(); ++i) {
    ds.data.features(i, features, scale);
    writer.write(ds.data.labels(i), features);
  }
  if (!sink) throw Error("io", "CTF write failed");
  return writer.count();
}

nlohmann::json dataset_manifest(const SubmodelDataset& ds, const DatasetOptions& opts) {
  nlohmann::json m;
  m["kind"] = to_string(opts.kind);
  m["n_days"] = opts.slices.n_days;
  m["skip"] = opts.slices.skip;
  m["dpi"] = opts.style.dpi;
  m["policy"] = std::string(to_string(opts.policy.mode));
  m["snap_tolerance"] = opts.policy.snap_tolerance_days;
  if (opts.split) {
    m["split_date"] = format_date(opts.split->threshold);
    m["split_side"] = opts.split->side == DateSplit::Side::Before ? "before" : "on_or_after";
  }
  m["label_dim"] = ds.data.label_dim();
  m["feature_dim"] = ds.data.feature_dim();
  auto& recs = m["records"] = nlohmann::json::array();
  for (std::size_t i = 0; i < ds.records.size(); ++i) {
    const auto& r = ds.records[i];
    const auto labels = ds.data.labels(i);
    recs.push_back({{"stock_id", r.stock_id},
                    {"expert_id", r.expert_id},
                    {"start", r.start},
                    {"end", r.end},
                    {"start_date", format_date(r.start_date)},
                    {"end_date", format_date(r.end_date)},
                    {"labels", std::vector<double>(labels.begin(), labels.end())}});
  }
  return m;
}

SubmodelTrainResult train_submodel(const Dataset& data, SubmodelTrainConfig cfg,
                                   const std::function<void(std::size_t, double)>& on_iteration) {
  if (!loss_compatible(cfg.kind, cfg.train.loss.kind)) {
    throw ValidationError("loss " + nn::to_string(cfg.train.loss.kind) + " does not fit submodel " + to_string(cfg.kind));
  }
  if (data.empty()) throw ValidationError("training set is empty");
  if (data.label_dim() != label_dim(cfg.kind)) throw ShapeError("dataset label dimension does not fit " + to_string(cfg.kind));

  if (cfg.train.loss.kind == nn::LossKind::WeightedBce && cfg.auto_weight) {
    std::size_t pos = 0;
    for (std::size_t i = 0; i < data.size(); ++i) pos += data.labels(i)[0] > 0.5;
    const std::size_t neg = data.size() - pos;
    if (pos == 0 || neg == 0) throw ValidationError("cannot derive class weight: training set has one class");
    cfg.train.loss.weight = static_cast<double>(neg) / static_cast<double>(pos);
  }

  nn::Network net = build_submodel(cfg.kind, cfg.dpi, cfg.train.seed);
  if (data.max_feature() > 1.0) net.set_input_scale(1.0 / 255.0);

  auto trained = nn::sgd_train(std::move(net), data, cfg.train, on_iteration);
  SubmodelTrainResult out{std::move(trained.network), std::move(trained.history), cfg.train.loss.weight, {}};
  out.metadata = {{"kind", to_string(cfg.kind)},
                  {"dpi", std::to_string(cfg.dpi)},
                  {"loss", nn::to_string(cfg.train.loss.kind)},
                  {"w", format_number(cfg.train.loss.weight)},
                  {"learning_rate", format_number(cfg.train.learning_rate)},
                  {"minibatch", std::to_string(cfg.train.minibatch)},
                  {"iterations", std::to_string(cfg.train.iterations)},
                  {"train_seed", std::to_string(cfg.train.seed)},
                  {"param_count", std::to_string(out.network.param_count())}};
  return out;
}

std::vector<double> predict_dataset(const nn::Network& net, const Dataset& data) {
  if (data.feature_dim() != net.input_shape().size()) throw ShapeError("dataset features do not fit the network input");
  const std::size_t in_dim = data.feature_dim();
  const std::size_t out_dim = net.output_shape().size();
  constexpr std::size_t kBatch = 64;
  std::vector<double> out(data.size() * out_dim);
  std::vector<double> inputs;
  for (std::size_t first = 0; first < data.size(); first += kBatch) {
    const std::size_t b = std::min(kBatch, data.size() - first);
    inputs.resize(b * in_dim);
    for (std::size_t k = 0; k < b; ++k) {
      data.features(first + k, std::span<double>(inputs).subspan(k * in_dim, in_dim), net.input_scale());
    }
    const auto cache = net.forward(inputs, b);
    const auto y = cache.output();
    std::copy(y.begin(), y.end(), out.begin() + static_cast<long>(first * out_dim));
  }
  return out;
}

double chpr_position(double raw) { return std::clamp(raw, 0.0, 1.0); }

std::size_t chpr_bar_index(std::size_t slice_start, std::size_t n_days, double position) {
  return slice_start + static_cast<std::size_t>(std::lround(chpr_position(position) * static_cast<double>(n_days - 1)));
}

namespace {

void mean_std(std::span<const double> v, double& mean, double& sd) {
  mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  sd = std::sqrt(ss / static_cast<double>(v.size()));
}

}  // namespace

EvalReport evaluate(SubmodelKind kind, const nn::Network& net, const Dataset& data) {
  if (data.empty()) throw ValidationError("evaluation set is empty");
  if (data.label_dim() != label_dim(kind) || net.output_shape().size() != label_dim(kind)) {
    throw ShapeError("network/dataset dimensions do not fit submodel " + to_string(kind));
  }
  EvalReport r;
  r.kind = kind;
  r.records = data.size();
  const auto pred = predict_dataset(net, data);
  const std::size_t n = data.size();

  if (kind == SubmodelKind::ChPr) {
    std::vector<double> p(n), t(n);
    for (std::size_t i = 0; i < n; ++i) {
      p[i] = chpr_position(pred[i]);
      t[i] = data.labels(i)[0];
    }
    r.regression = r2_mae(p, t);
    mean_std(p, r.pred_mean, r.pred_std);
    mean_std(t, r.target_mean, r.target_std);
    return r;
  }

  std::vector<int> truth(n), guess(n);
  std::vector<int> classes;
  if (kind == SubmodelKind::ChPc) {
    classes = {0, 1};
    std::vector<double> scores(n);
    for (std::size_t i = 0; i < n; ++i) {
      truth[i] = data.labels(i)[0] > 0.5 ? 1 : 0;
      guess[i] = pred[i] >= 0.5 ? 1 : 0;
      scores[i] = pred[i];
    }
    const auto pos = static_cast<std::size_t>(std::count(truth.begin(), truth.end(), 1));
    if (pos > 0 && pos < n) r.auc = auc_roc(scores, truth);
    r.minority_class = 2 * pos <= n ? 1 : 0;
    mean_std(scores, r.pred_mean, r.pred_std);
  } else {
    classes = {0, 1, 2};
    for (std::size_t i = 0; i < n; ++i) {
      const auto y = data.labels(i);
      truth[i] = static_cast<int>(std::max_element(y.begin(), y.end()) - y.begin());
      const double* p = pred.data() + i * kTrendClasses;
      guess[i] = static_cast<int>(std::max_element(p, p + kTrendClasses) - p);
    }
  }
  r.confusion = confusion(truth, guess, classes);
  r.accuracy = r.confusion->accuracy();
  std::size_t majority = 0;
  for (const auto& row : r.confusion->counts) {
    majority = std::max(majority, std::accumulate(row.begin(), row.end(), std::size_t{0}));
  }
  r.majority_accuracy = static_cast<double>(majority) / static_cast<double>(n);
  for (int c : classes) r.per_class[c] = precision_recall_f(*r.confusion, c);
  return r;
}

namespace {

nlohmann::json opt(const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); }

}  // namespace

nlohmann::json to_json(const EvalReport& r) {
  nlohmann::json j;
  j["kind"] = to_string(r.kind);
  j["records"] = r.records;
  if (r.regression) {
    j["r2"] = opt(r.regression->r2);
    j["mae"] = r.regression->mae;
    j["pred_mean"] = r.pred_mean;
    j["pred_std"] = r.pred_std;
    j["target_mean"] = r.target_mean;
    j["target_std"] = r.target_std;
    return j;
  }
  j["accuracy"] = opt(r.accuracy);
  j["majority_accuracy"] = opt(r.majority_accuracy);
  if (r.kind == SubmodelKind::ChPc) {
    j["auc"] = opt(r.auc);
    j["minority_class"] = r.minority_class ? nlohmann::json(*r.minority_class) : nlohmann::json(nullptr);
  }
  if (r.confusion) {
    j["classes"] = r.confusion->classes;
    j["confusion"] = r.confusion->counts;
    j["confusion_normalized"] = r.confusion->normalized();
  }
  auto& pc = j["per_class"] = nlohmann::json::object();
  for (const auto& [c, m] : r.per_class) {
    pc[std::to_string(c)] = {{"precision", opt(m.precision)}, {"recall", opt(m.recall)}, {"f1", opt(m.f1)}};
  }
  return j;
}

}  // namespace trendcnn
