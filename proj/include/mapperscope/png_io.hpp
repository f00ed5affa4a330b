#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace mapperscope {

/// 8-bit RGBA raster, row-major, 4 bytes per pixel.
struct RgbaImage {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> pixels;

  std::uint8_t* pixel(std::size_t y, std::size_t x) { return pixels.data() + 4 * (y * width + x); }
  const std::uint8_t* pixel(std::size_t y, std::size_t x) const { return pixels.data() + 4 * (y * width + x); }

  friend bool operator==(const RgbaImage&, const RgbaImage&) = default;
};

/// Any PNG color type/bit depth is expanded to RGBA8. Throws UnsupportedImage.
RgbaImage decode_png(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> encode_png(const RgbaImage& image);

RgbaImage read_png(const std::filesystem::path& path);
void write_png(const RgbaImage& image, const std::filesystem::path& path);

}  // namespace mapperscope
