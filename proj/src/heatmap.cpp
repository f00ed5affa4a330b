#include "mapperscope/heatmap.hpp"

#include <algorithm>
#include <cmath>

#include "mapperscope/error.hpp"

namespace mapperscope {

ChannelReduce parse_channel_reduce(std::string_view name) {
  if (name == "l2") return ChannelReduce::L2;
  if (name == "sum") return ChannelReduce::Sum;
  if (name == "max") return ChannelReduce::Max;
  throw Error(ErrorCode::BadParams, "unknown channel reduction '" + std::string(name) + "'");
}

Grid aggregate_channels(const SpatialActivation& t, ChannelReduce mode) {
  if (t.height == 0 || t.width == 0 || t.channels == 0 || t.values.size() != t.height * t.width * t.channels) {
    throw Error(ErrorCode::BadParams, "malformed activation tensor");
  }
  Grid g{t.height, t.width, std::vector<double>(t.height * t.width)};
  for (std::size_t cell = 0; cell < g.values.size(); ++cell) {
    const float* v = t.values.data() + cell * t.channels;
    double acc = mode == ChannelReduce::Max ? static_cast<double>(v[0]) : 0.0;
    for (std::size_t c = 0; c < t.channels; ++c) {
      switch (mode) {
        case ChannelReduce::L2: acc += static_cast<double>(v[c]) * v[c]; break;
        case ChannelReduce::Sum: acc += v[c]; break;
        case ChannelReduce::Max: acc = std::max(acc, static_cast<double>(v[c])); break;
      }
    }
    g.values[cell] = mode == ChannelReduce::L2 ? std::sqrt(acc) : acc;
  }
  return g;
}

Grid normalize_field(const Grid& grid) {
  Grid out = grid;
  if (grid.values.empty()) return out;
  const auto [lo, hi] = std::minmax_element(grid.values.begin(), grid.values.end());
  const double min = *lo, span = *hi - *lo;
  for (double& v : out.values) v = span > 0.0 ? std::clamp((v - min) / span, 0.0, 1.0) : 0.0;
  return out;
}

Grid upsample_bilinear(const Grid& grid, std::size_t height, std::size_t width) {
  if (grid.height == 0 || grid.width == 0 || height == 0 || width == 0) {
    throw Error(ErrorCode::BadParams, "grid dimensions must be >= 1");
  }
  if (grid.height == height && grid.width == width) return grid;

  auto source = [](std::size_t i, std::size_t out_n, std::size_t in_n) {
    if (out_n == 1 || in_n == 1) return 0.0;
    return static_cast<double>(i) * static_cast<double>(in_n - 1) / static_cast<double>(out_n - 1);
  };
  Grid out{height, width, std::vector<double>(height * width)};
  for (std::size_t y = 0; y < height; ++y) {
    const double sy = source(y, height, grid.height);
    const auto y0 = std::min(static_cast<std::size_t>(sy), grid.height - 1);
    const std::size_t y1 = std::min(y0 + 1, grid.height - 1);
    const double fy = sy - static_cast<double>(y0);
    for (std::size_t x = 0; x < width; ++x) {
      const double sx = source(x, width, grid.width);
      const auto x0 = std::min(static_cast<std::size_t>(sx), grid.width - 1);
      const std::size_t x1 = std::min(x0 + 1, grid.width - 1);
      const double fx = sx - static_cast<double>(x0);
      const double top = grid.at(y0, x0) * (1.0 - fx) + grid.at(y0, x1) * fx;
      const double bottom = grid.at(y1, x0) * (1.0 - fx) + grid.at(y1, x1) * fx;
      out.values[y * width + x] = top * (1.0 - fy) + bottom * fy;
    }
  }
  return out;
}

Grid heat_field(const SpatialActivation& t, ChannelReduce mode, std::size_t height, std::size_t width) {
  return upsample_bilinear(normalize_field(aggregate_channels(t, mode)), height, width);
}

RgbaImage render_overlay(const Grid& field, const RgbaImage& base, double alpha) {
  if (field.height != base.height || field.width != base.width) {
    throw Error(ErrorCode::DimensionMismatch, "heat field and image sizes differ");
  }
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw Error(ErrorCode::BadParams, "alpha must lie in [0,1]");
  constexpr double kMagenta[3] = {255.0, 0.0, 170.0};

  RgbaImage out = base;
  for (std::size_t y = 0; y < base.height; ++y) {
    for (std::size_t x = 0; x < base.width; ++x) {
      const double opacity = alpha * std::clamp(field.at(y, x), 0.0, 1.0);
      if (opacity <= 0.0) continue;
      std::uint8_t* px = out.pixel(y, x);
      for (int c = 0; c < 3; ++c) {
        px[c] = static_cast<std::uint8_t>(std::lround(px[c] * (1.0 - opacity) + kMagenta[c] * opacity));
      }
      px[3] = static_cast<std::uint8_t>(std::lround(px[3] + opacity * (255.0 - px[3])));
    }
  }
  return out;
}

}  // namespace mapperscope
