#pragma once

#include <optional>
#include <span>
#include <vector>

namespace trendcnn {

// counts[i][j] = number of records with true class classes[i] predicted as classes[j].
struct ConfusionMatrix {
  std::vector<int> classes;
  std::vector<std::vector<std::size_t>> counts;

  std::size_t total() const;
  double accuracy() const;
  // Row-normalized view; rows with no records stay zero and are listed in `empty_rows`.
  std::vector<std::vector<double>> normalized(std::vector<std::size_t>* empty_rows = nullptr) const;
  std::size_t index_of(int label) const;
};

ConfusionMatrix confusion(std::span<const int> truth, std::span<const int> predicted, std::vector<int> classes);

// Probability that a random positive outscores a random negative, ties count 1/2.
// Throws ValidationError unless both classes are present.
double auc_roc(std::span<const double> scores, std::span<const int> labels);
// Area under the step ROC curve by the trapezoid rule; equal to auc_roc.
double auc_trapezoid(std::span<const double> scores, std::span<const int> labels);

struct PrecisionRecallF {
  std::optional<double> precision;
  std::optional<double> recall;
  std::optional<double> f1;
};

// Undefined ratios (zero denominators) are left empty.
PrecisionRecallF precision_recall_f(const ConfusionMatrix& cm, int positive);

struct R2Mae {
  std::optional<double> r2;  // empty when the target has zero variance
  double mae = 0.0;
};

R2Mae r2_mae(std::span<const double> pred, std::span<const double> target);

}  // namespace trendcnn
