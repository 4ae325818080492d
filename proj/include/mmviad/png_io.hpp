#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace mmviad {

// 8-bit RGB raster, row-major, 3 bytes per pixel.
struct Raster {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> rgb;

  Raster() = default;
  Raster(int w, int h, std::uint8_t r = 0, std::uint8_t g = 0, std::uint8_t b = 0);

  std::uint8_t* at(int x, int y) { return rgb.data() + 3 * (static_cast<std::size_t>(y) * width + x); }
  const std::uint8_t* at(int x, int y) const {
    return rgb.data() + 3 * (static_cast<std::size_t>(y) * width + x);
  }
  void fill_rect(int x0, int y0, int w, int h, std::uint8_t r, std::uint8_t g, std::uint8_t b);

  friend bool operator==(const Raster&, const Raster&) = default;
};

struct PngHeader {
  int width = 0;
  int height = 0;
};

/// Decodes a PNG to 8-bit RGB: palettes and gray are expanded, 16-bit is
/// stripped, alpha is dropped. Throws FrameError on missing or corrupt files.
Raster read_png(const std::filesystem::path& path);
Raster decode_png(std::span<const std::uint8_t> bytes);
PngHeader read_png_header(const std::filesystem::path& path);

void write_png(const std::filesystem::path& path, const Raster& image);

}  // namespace mmviad
