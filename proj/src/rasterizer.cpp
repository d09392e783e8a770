#include "trendcnn/rasterizer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "trendcnn/error.hpp"

namespace trendcnn {

int RenderStyle::width_px() const { return static_cast<int>(std::lround(canvas_width_in * dpi)); }
int RenderStyle::height_px() const { return static_cast<int>(std::lround(canvas_height_in * dpi)); }

void RenderStyle::validate() const {
  if (dpi != 10 && dpi != 20 && dpi != 60) throw ValidationError("unsupported dpi " + std::to_string(dpi));
  if (canvas_width_in <= 0 || canvas_height_in <= 0) throw ValidationError("canvas size must be positive");
  if (up_color == down_color) throw ValidationError("up and down colors must differ");
  if (up_color == background || down_color == background) throw ValidationError("candle colors must differ from background");
  if (wick_width_px < 1) throw ValidationError("wick width must be positive");
}

namespace {

struct Canvas {
  int width;
  int height;
  std::vector<std::uint8_t> data;

  void fill_rect(int x0, int x1, int y0, int y1, const Rgb& color) {
    x0 = std::max(x0, 0);
    y0 = std::max(y0, 0);
    x1 = std::min(x1, width - 1);
    y1 = std::min(y1, height - 1);
    const std::size_t plane = static_cast<std::size_t>(width) * height;
    for (int c = 0; c < 3; ++c) {
      for (int y = y0; y <= y1; ++y) {
        auto* row = data.data() + c * plane + static_cast<std::size_t>(y) * width;
        std::fill(row + x0, row + x1 + 1, color[c]);
      }
    }
  }
};

// Horizontal layout of candle i out of n on a canvas `width` pixels wide.
// Slot edges are mirror-symmetric: edge(n - i) == width - edge(i).
struct Columns {
  int body_x0, body_x1;
  int wick_x0, wick_x1;
};

Columns candle_columns(std::size_t i, std::size_t n, int width, int wick_width) {
  auto edge = [&](std::size_t k) -> long {
    if (2 * k <= n) return static_cast<long>(k * static_cast<std::size_t>(width) / n);
    return width - static_cast<long>((n - k) * static_cast<std::size_t>(width) / n);
  };
  long x0 = edge(i);
  long x1 = edge(i + 1) - 1;
  if (x1 < x0) x1 = x0 = std::min<long>(x0, width - 1);
  const long slot = x1 - x0 + 1;
  const long body = std::clamp<long>(static_cast<long>(width / static_cast<long>(n)) - 1, 1, slot);
  const bool right_half = x0 + x1 > width - 1;

  long gap_left = (slot - body) / 2;
  if (right_half) gap_left = slot - body - gap_left;
  Columns out;
  out.body_x0 = static_cast<int>(x0 + gap_left);
  out.body_x1 = static_cast<int>(out.body_x0 + body - 1);

  const long center = right_half ? x0 + slot / 2 : x0 + (slot - 1) / 2;
  const long half_lo = right_half ? wick_width / 2 : (wick_width - 1) / 2;
  const long half_hi = wick_width - 1 - half_lo;
  out.wick_x0 = static_cast<int>(std::max(x0, center - half_lo));
  out.wick_x1 = static_cast<int>(std::min(x1, center + half_hi));
  return out;
}

}  // namespace

PixelTensor render(const OhlcSeries& series, std::size_t start, std::size_t end, const RenderStyle& style) {
  style.validate();
  if (series.scale != PriceScale::NaturalLog) throw ValidationError("render expects a log-scaled series");
  if (end < start || end >= series.size()) {
    throw ValidationError("slice [" + std::to_string(start) + ", " + std::to_string(end) + "] out of range");
  }
  const std::size_t n = end - start + 1;
  if (n < 2) throw ValidationError("slice must contain at least 2 bars");

  const int width = style.width_px();
  const int height = style.height_px();
  Canvas canvas{width, height, std::vector<std::uint8_t>(3 * static_cast<std::size_t>(width) * height)};
  canvas.fill_rect(0, width - 1, 0, height - 1, style.background);

  double hi = series[start].high;
  double lo = series[start].low;
  for (std::size_t i = start; i <= end; ++i) {
    hi = std::max(hi, series[i].high);
    lo = std::min(lo, series[i].low);
  }

  if (hi == lo) {
    const int mid = height / 2;
    for (std::size_t i = 0; i < n; ++i) {
      const auto cols = candle_columns(i, n, width, style.wick_width_px);
      canvas.fill_rect(cols.body_x0, cols.body_x1, mid, mid, style.up_color);
    }
  } else {
    const double pad = 0.02 * (hi - lo);
    const double span = (hi - lo) + 2.0 * pad;
    // Distances are taken from the slice maximum so a constant shift of all
    // prices cancels before any scaling.
    auto row = [&](double price) {
      const double frac = ((hi - price) + pad) / span;
      return std::clamp(static_cast<int>(std::floor(frac * height)), 0, height - 1);
    };
    for (std::size_t i = 0; i < n; ++i) {
      const auto& bar = series[start + i];
      const auto cols = candle_columns(i, n, width, style.wick_width_px);
      const Rgb& color = bar.close >= bar.open ? style.up_color : style.down_color;
      canvas.fill_rect(cols.wick_x0, cols.wick_x1, row(bar.high), row(bar.low), color);
      canvas.fill_rect(cols.body_x0, cols.body_x1, row(std::max(bar.open, bar.close)),
                       row(std::min(bar.open, bar.close)), color);
    }
  }
  return PixelTensor{3, height, width, std::move(canvas.data)};
}

PixelTensor render_binary(const PixelTensor& tensor) {
  PixelTensor out = tensor;
  for (auto& v : out.data) v = v < 128 ? 0 : 255;
  return out;
}

std::string to_ppm(const PixelTensor& tensor) {
  if (tensor.channels != 3) throw ValidationError("PPM export needs 3 channels");
  std::string out = "P6\n" + std::to_string(tensor.width) + " " + std::to_string(tensor.height) + "\n255\n";
  const std::size_t plane = static_cast<std::size_t>(tensor.width) * tensor.height;
  out.reserve(out.size() + 3 * plane);
  for (std::size_t p = 0; p < plane; ++p) {
    for (int c = 0; c < 3; ++c) out.push_back(static_cast<char>(tensor.data[c * plane + p]));
  }
  return out;
}

void write_ppm(const std::string& path, const PixelTensor& tensor) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("io", "cannot write " + path);
  out << to_ppm(tensor);
}

}  // namespace trendcnn
