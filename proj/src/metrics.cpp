#include "trendcnn/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "trendcnn/error.hpp"

namespace trendcnn {

std::size_t ConfusionMatrix::total() const {
  std::size_t n = 0;
  for (const auto& row : counts) n = std::accumulate(row.begin(), row.end(), n);
  return n;
}

double ConfusionMatrix::accuracy() const {
  const std::size_t n = total();
  if (n == 0) throw ValidationError("accuracy of an empty confusion matrix");
  std::size_t hit = 0;
  for (std::size_t i = 0; i < counts.size(); ++i) hit += counts[i][i];
  return static_cast<double>(hit) / static_cast<double>(n);
}

std::vector<std::vector<double>> ConfusionMatrix::normalized(std::vector<std::size_t>* empty_rows) const {
  std::vector<std::vector<double>> out(counts.size(), std::vector<double>(classes.size(), 0.0));
  if (empty_rows) empty_rows->clear();
  for (std::size_t i = 0; i < counts.size(); ++i) {
    const std::size_t row = std::accumulate(counts[i].begin(), counts[i].end(), std::size_t{0});
    if (row == 0) {
      if (empty_rows) empty_rows->push_back(i);
      continue;
    }
    for (std::size_t j = 0; j < counts[i].size(); ++j) {
      out[i][j] = static_cast<double>(counts[i][j]) / static_cast<double>(row);
    }
  }
  return out;
}

std::size_t ConfusionMatrix::index_of(int label) const {
  const auto it = std::find(classes.begin(), classes.end(), label);
  if (it == classes.end()) throw ValidationError("unknown class label " + std::to_string(label));
  return static_cast<std::size_t>(it - classes.begin());
}

ConfusionMatrix confusion(std::span<const int> truth, std::span<const int> predicted, std::vector<int> classes) {
  if (truth.size() != predicted.size()) throw ShapeError("truth and prediction lengths differ");
  ConfusionMatrix cm;
  cm.classes = std::move(classes);
  cm.counts.assign(cm.classes.size(), std::vector<std::size_t>(cm.classes.size(), 0));
  for (std::size_t i = 0; i < truth.size(); ++i) ++cm.counts[cm.index_of(truth[i])][cm.index_of(predicted[i])];
  return cm;
}

namespace {

void check_binary(std::span<const double> scores, std::span<const int> labels, std::size_t& pos, std::size_t& neg) {
  if (scores.size() != labels.size()) throw ShapeError("scores and labels lengths differ");
  pos = neg = 0;
  for (int y : labels) {
    if (y == 1) ++pos;
    else if (y == 0) ++neg;
    else throw ValidationError("AUC labels must be 0 or 1");
  }
  if (pos == 0 || neg == 0) throw ValidationError("AUC undefined: only one class present");
}

// Indices sorted by descending score.
std::vector<std::size_t> order_desc(std::span<const double> scores) {
  std::vector<std::size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  return idx;
}

}  // namespace

double auc_roc(std::span<const double> scores, std::span<const int> labels) {
  std::size_t pos = 0, neg = 0;
  check_binary(scores, labels, pos, neg);
  // Walk tie groups from the lowest score up; each positive beats every
  // negative already seen and ties half of those in its own group.
  auto idx = order_desc(scores);
  std::reverse(idx.begin(), idx.end());
  double wins = 0.0;
  std::size_t neg_below = 0;
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i, gp = 0, gn = 0;
    while (j < idx.size() && scores[idx[j]] == scores[idx[i]]) {
      (labels[idx[j]] == 1 ? gp : gn)++;
      ++j;
    }
    wins += static_cast<double>(gp) * (static_cast<double>(neg_below) + 0.5 * static_cast<double>(gn));
    neg_below += gn;
    i = j;
  }
  return wins / (static_cast<double>(pos) * static_cast<double>(neg));
}

double auc_trapezoid(std::span<const double> scores, std::span<const int> labels) {
  std::size_t pos = 0, neg = 0;
  check_binary(scores, labels, pos, neg);
  const auto idx = order_desc(scores);
  // Integrate in counts (tp against fp) and scale once at the end.
  double area = 0.0;
  std::size_t tp = 0, fp = 0;
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i, gp = 0, gn = 0;
    while (j < idx.size() && scores[idx[j]] == scores[idx[i]]) {
      (labels[idx[j]] == 1 ? gp : gn)++;
      ++j;
    }
    area += static_cast<double>(gn) * (static_cast<double>(tp) + 0.5 * static_cast<double>(gp));
    tp += gp;
    fp += gn;
    i = j;
  }
  return area / (static_cast<double>(pos) * static_cast<double>(neg));
}

PrecisionRecallF precision_recall_f(const ConfusionMatrix& cm, int positive) {
  const std::size_t k = cm.index_of(positive);
  std::size_t tp = cm.counts[k][k], predicted = 0, actual = 0;
  for (std::size_t i = 0; i < cm.counts.size(); ++i) {
    predicted += cm.counts[i][k];
    actual += cm.counts[k][i];
  }
  PrecisionRecallF r;
  if (predicted > 0) r.precision = static_cast<double>(tp) / static_cast<double>(predicted);
  if (actual > 0) r.recall = static_cast<double>(tp) / static_cast<double>(actual);
  if (predicted + actual > 0 && (r.precision && r.recall)) {
    if (tp == 0) r.f1 = 0.0;
    else r.f1 = 2.0 * static_cast<double>(tp) / static_cast<double>(predicted + actual);
  }
  return r;
}

R2Mae r2_mae(std::span<const double> pred, std::span<const double> target) {
  if (pred.size() != target.size()) throw ShapeError("prediction and target lengths differ");
  if (pred.empty()) throw ValidationError("R2/MAE of an empty sample");
  const double n = static_cast<double>(pred.size());
  double mean = 0.0;
  for (double t : target) mean += t;
  mean /= n;
  double ss_res = 0.0, ss_tot = 0.0, abs_err = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double e = pred[i] - target[i];
    ss_res += e * e;
    abs_err += std::abs(e);
    ss_tot += (target[i] - mean) * (target[i] - mean);
  }
  R2Mae r;
  r.mae = abs_err / n;
  if (ss_tot > 0.0) r.r2 = 1.0 - ss_res / ss_tot;
  return r;
}

}  // namespace trendcnn
