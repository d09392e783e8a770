#pragma once

#include <span>
#include <string>
#include <vector>

namespace trendcnn::nn {

enum class LossKind { WeightedBce, FMeasure, SquaredError, CeSoftmax };

std::string to_string(LossKind kind);
LossKind parse_loss_kind(const std::string& text);

struct LossSpec {
  LossKind kind = LossKind::SquaredError;
  double weight = 1.0;  // WeightedBce: multiplier on the positive-class term
};

struct LossResult {
  double value = 0.0;
  std::vector<double> grad;  // d value / d pred, same layout as pred
};

// `pred` and `target` are [batch, dim] row-major.
//   WeightedBce  -mean(w*y*ln p + (1-y)*ln(1-p)), p in (0,1)
//   SquaredError mean((p-y)^2)
//   CeSoftmax    mean over samples of -sum y*log softmax(p), p are raw scores
//   FMeasure     1 - 2*TP/(2*TP + FP + FN) with soft counts over the batch
LossResult loss_and_grad(const LossSpec& loss, std::span<const double> pred, std::span<const double> target,
                         std::size_t batch);

}  // namespace trendcnn::nn
