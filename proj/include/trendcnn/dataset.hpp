#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "trendcnn/ctf.hpp"

namespace trendcnn {

// In-memory training set. Pixel datasets (all features integers in 0..255,
// or all exactly k/255) are stored as bytes; anything else as doubles.
class Dataset {
 public:
  Dataset(std::size_t label_dim, std::size_t feature_dim);

  void add(std::span<const double> labels, std::span<const double> features);
  void add(std::span<const double> labels, std::span<const std::uint8_t> pixels);

  std::size_t size() const noexcept { return labels_.size() / (label_dim_ ? label_dim_ : 1); }
  bool empty() const noexcept { return size() == 0; }
  std::size_t label_dim() const noexcept { return label_dim_; }
  std::size_t feature_dim() const noexcept { return feature_dim_; }

  std::span<const double> labels(std::size_t i) const {
    return {labels_.data() + i * label_dim_, label_dim_};
  }
  // Copies record i's features, multiplied by `scale`, into `out`.
  void features(std::size_t i, std::span<double> out, double scale = 1.0) const;

  // Largest feature value over the whole set.
  double max_feature() const;

 private:
  void to_dense();

  std::size_t label_dim_;
  std::size_t feature_dim_;
  std::vector<double> labels_;
  bool bytes_ = true;
  double byte_scale_ = 0.0;  // 0 until the first record fixes it (1 or 1/255)
  std::vector<std::uint8_t> pixels_;
  std::vector<double> dense_;
};

Dataset load_ctf_dataset(const std::string& path, std::size_t label_dim, std::size_t feature_dim);

}  // namespace trendcnn
