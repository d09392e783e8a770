#include "trendcnn/nn/loss.hpp"

#include <algorithm>
#include <cmath>

#include "trendcnn/error.hpp"

namespace trendcnn::nn {

std::string to_string(LossKind kind) {
  switch (kind) {
    case LossKind::WeightedBce: return "weighted_bce";
    case LossKind::FMeasure: return "f_measure";
    case LossKind::SquaredError: return "squared_error";
    case LossKind::CeSoftmax: return "ce_softmax";
  }
  return "squared_error";
}

LossKind parse_loss_kind(const std::string& text) {
  if (text == "weighted_bce") return LossKind::WeightedBce;
  if (text == "f_measure") return LossKind::FMeasure;
  if (text == "squared_error") return LossKind::SquaredError;
  if (text == "ce_softmax") return LossKind::CeSoftmax;
  throw ParseError("unknown loss '" + text + "'");
}

LossResult loss_and_grad(const LossSpec& loss, std::span<const double> pred, std::span<const double> target,
                         std::size_t batch) {
  if (batch == 0 || pred.empty()) throw ValidationError("loss of an empty batch");
  if (pred.size() != target.size()) throw ShapeError("prediction and target sizes differ");
  if (pred.size() % batch != 0) throw ShapeError("prediction size is not a multiple of the batch");

  const std::size_t n = pred.size();
  const std::size_t dim = n / batch;
  LossResult r;
  r.grad.assign(n, 0.0);

  switch (loss.kind) {
    case LossKind::WeightedBce: {
      const double w = loss.weight;
      if (!(w > 0)) throw ValidationError("weighted BCE needs a positive weight");
      double sum = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double p = pred[i], y = target[i];
        if (!(p > 0.0 && p < 1.0)) throw ValidationError("weighted BCE prediction outside (0, 1)");
        sum += w * y * std::log(p) + (1.0 - y) * std::log(1.0 - p);
        r.grad[i] = -(w * y / p - (1.0 - y) / (1.0 - p)) / static_cast<double>(n);
      }
      r.value = -sum / static_cast<double>(n);
      break;
    }
    case LossKind::SquaredError: {
      double sum = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double d = pred[i] - target[i];
        sum += d * d;
        r.grad[i] = 2.0 * d / static_cast<double>(n);
      }
      r.value = sum / static_cast<double>(n);
      break;
    }
    case LossKind::CeSoftmax: {
      double total = 0.0;
      for (std::size_t b = 0; b < batch; ++b) {
        const double* x = pred.data() + b * dim;
        const double* y = target.data() + b * dim;
        const double mx = *std::max_element(x, x + dim);
        double sum_exp = 0.0;
        for (std::size_t k = 0; k < dim; ++k) sum_exp += std::exp(x[k] - mx);
        const double lse = mx + std::log(sum_exp);
        double ysum = 0.0;
        for (std::size_t k = 0; k < dim; ++k) {
          total -= y[k] * (x[k] - lse);
          ysum += y[k];
        }
        for (std::size_t k = 0; k < dim; ++k) {
          const double soft = std::exp(x[k] - lse);
          r.grad[b * dim + k] = (soft * ysum - y[k]) / static_cast<double>(batch);
        }
      }
      r.value = total / static_cast<double>(batch);
      break;
    }
    case LossKind::FMeasure: {
      double tp = 0.0, sum_p = 0.0, sum_y = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (pred[i] < 0.0 || pred[i] > 1.0) throw ValidationError("f-measure prediction outside [0, 1]");
        tp += pred[i] * target[i];
        sum_p += pred[i];
        sum_y += target[i];
      }
      // 2TP + FP + FN == sum(p) + sum(y)
      const double denom = sum_p + sum_y;
      if (denom <= 0.0) throw ValidationError("f-measure undefined: no positive predictions or labels");
      r.value = 1.0 - 2.0 * tp / denom;
      for (std::size_t i = 0; i < n; ++i) r.grad[i] = -2.0 * (target[i] * denom - tp) / (denom * denom);
      break;
    }
  }
  return r;
}

}  // namespace trendcnn::nn
