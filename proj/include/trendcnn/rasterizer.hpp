#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "trendcnn/marketdata.hpp"

namespace trendcnn {

using Rgb = std::array<std::uint8_t, 3>;

struct RenderStyle {
  int dpi = 10;
  double canvas_width_in = 6.4;
  double canvas_height_in = 4.8;
  Rgb up_color{0, 255, 0};
  Rgb down_color{255, 0, 0};
  Rgb background{255, 255, 255};
  int wick_width_px = 1;

  int width_px() const;
  int height_px() const;
  void validate() const;
};

// Channel-major 8-bit image: data[c * height * width + y * width + x].
struct PixelTensor {
  int channels = 3;
  int height = 0;
  int width = 0;
  std::vector<std::uint8_t> data;

  std::size_t size() const noexcept { return data.size(); }
  std::uint8_t at(int c, int y, int x) const {
    return data[(static_cast<std::size_t>(c) * height + y) * width + x];
  }
  bool operator==(const PixelTensor&) const = default;
};

// Axes-free candlestick chart of bars [start, end] of a log-scaled series.
PixelTensor render(const OhlcSeries& series, std::size_t start, std::size_t end, const RenderStyle& style = {});

// 0 below 128, 255 otherwise.
PixelTensor render_binary(const PixelTensor& tensor);

// Binary P6 PPM, for eyeballing renders.
std::string to_ppm(const PixelTensor& tensor);
void write_ppm(const std::string& path, const PixelTensor& tensor);

}  // namespace trendcnn
