#include "trendcnn/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "trendcnn/error.hpp"

namespace trendcnn {

Dataset::Dataset(std::size_t label_dim, std::size_t feature_dim) : label_dim_(label_dim), feature_dim_(feature_dim) {}

namespace {

bool fits_scale(std::span<const double> values, double scale) {
  for (double v : values) {
    const double k = std::round(v / scale);
    if (k < 0 || k > 255 || k * scale != v) return false;
  }
  return true;
}

}  // namespace

void Dataset::to_dense() {
  dense_.resize(pixels_.size());
  for (std::size_t i = 0; i < pixels_.size(); ++i) dense_[i] = pixels_[i] * byte_scale_;
  pixels_.clear();
  pixels_.shrink_to_fit();
  bytes_ = false;
}

void Dataset::add(std::span<const double> labels, std::span<const double> features) {
  if (labels.size() != label_dim_ || features.size() != feature_dim_) throw ShapeError("dataset record dimension mismatch");
  if (bytes_) {
    if (byte_scale_ == 0.0) byte_scale_ = fits_scale(features, 1.0) ? 1.0 : 1.0 / 255.0;
    if (!fits_scale(features, byte_scale_)) {
      // Records seen so far used only 0/1, which also reads as 0/255 at scale 1/255.
      const bool binary_so_far = byte_scale_ == 1.0 &&
                                 std::all_of(pixels_.begin(), pixels_.end(), [](auto p) { return p <= 1; });
      if (binary_so_far && fits_scale(features, 1.0 / 255.0)) {
        for (auto& p : pixels_) p = static_cast<std::uint8_t>(p * 255);
        byte_scale_ = 1.0 / 255.0;
      } else {
        to_dense();
      }
    }
  }
  if (bytes_) {
    for (double v : features) pixels_.push_back(static_cast<std::uint8_t>(std::lround(v / byte_scale_)));
  } else {
    dense_.insert(dense_.end(), features.begin(), features.end());
  }
  labels_.insert(labels_.end(), labels.begin(), labels.end());
}

void Dataset::add(std::span<const double> labels, std::span<const std::uint8_t> pixels) {
  if (labels.size() != label_dim_ || pixels.size() != feature_dim_) throw ShapeError("dataset record dimension mismatch");
  if (bytes_ && (byte_scale_ == 0.0 || byte_scale_ == 1.0)) {
    byte_scale_ = 1.0;
    pixels_.insert(pixels_.end(), pixels.begin(), pixels.end());
  } else {
    if (bytes_) to_dense();
    for (auto p : pixels) dense_.push_back(p);
  }
  labels_.insert(labels_.end(), labels.begin(), labels.end());
}

void Dataset::features(std::size_t i, std::span<double> out, double scale) const {
  if (out.size() != feature_dim_) throw ShapeError("feature buffer size mismatch");
  if (bytes_) {
    const double s = byte_scale_ * scale;
    const auto* src = pixels_.data() + i * feature_dim_;
    for (std::size_t k = 0; k < feature_dim_; ++k) out[k] = src[k] * s;
  } else {
    const auto* src = dense_.data() + i * feature_dim_;
    for (std::size_t k = 0; k < feature_dim_; ++k) out[k] = src[k] * scale;
  }
}

double Dataset::max_feature() const {
  if (bytes_) {
    if (pixels_.empty()) return 0.0;
    return *std::max_element(pixels_.begin(), pixels_.end()) * byte_scale_;
  }
  if (dense_.empty()) return 0.0;
  return *std::max_element(dense_.begin(), dense_.end());
}

Dataset load_ctf_dataset(const std::string& path, std::size_t label_dim, std::size_t feature_dim) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("io", "cannot open " + path);
  CtfReader reader(in, label_dim, feature_dim);
  Dataset data(label_dim, feature_dim);
  CtfRecord record;
  while (reader.next(record)) data.add(record.labels, record.features);
  return data;
}

}  // namespace trendcnn
