#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

#include "mapperscope/dataset.hpp"
#include "mapperscope/png_io.hpp"

namespace mapperscope {

/// Row-major scalar grid.
struct Grid {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<double> values;

  double at(std::size_t y, std::size_t x) const { return values[y * width + x]; }
};

enum class ChannelReduce { L2, Sum, Max };

ChannelReduce parse_channel_reduce(std::string_view name);

Grid aggregate_channels(const SpatialActivation& t, ChannelReduce mode = ChannelReduce::L2);

/// Min-max rescale to [0,1]; a constant grid maps to all zeros.
Grid normalize_field(const Grid& grid);

/// Bilinear resampling with corner-aligned sample positions.
Grid upsample_bilinear(const Grid& grid, std::size_t height, std::size_t width);

/// aggregate -> normalize -> upsample to the target image size.
Grid heat_field(const SpatialActivation& t, ChannelReduce mode, std::size_t height, std::size_t width);

/// Over-composites magenta (#FF00AA) onto `base` with per-pixel opacity
/// alpha * field. Field dims must match the image.
RgbaImage render_overlay(const Grid& field, const RgbaImage& base, double alpha);

}  // namespace mapperscope
