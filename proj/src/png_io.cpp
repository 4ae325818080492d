#include "mmviad/png_io.hpp"

#include <png.h>

#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>

#include "mmviad/error.hpp"

namespace mmviad {

Raster::Raster(int w, int h, std::uint8_t r, std::uint8_t g, std::uint8_t b)
    : width(w), height(h), rgb(static_cast<std::size_t>(w) * h * 3) {
  for (std::size_t i = 0; i < rgb.size(); i += 3) {
    rgb[i] = r;
    rgb[i + 1] = g;
    rgb[i + 2] = b;
  }
}

void Raster::fill_rect(int x0, int y0, int w, int h, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  for (int y = std::max(0, y0); y < std::min(height, y0 + h); ++y) {
    for (int x = std::max(0, x0); x < std::min(width, x0 + w); ++x) {
      auto* p = at(x, y);
      p[0] = r;
      p[1] = g;
      p[2] = b;
    }
  }
}

namespace {

std::vector<std::uint8_t> slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FrameError("missing frame " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

Raster decode_png(std::span<const std::uint8_t> bytes) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size())) {
    throw FrameError(std::string("undecodable PNG: ") + image.message);
  }
  image.format = PNG_FORMAT_RGB;
  Raster out;
  out.width = static_cast<int>(image.width);
  out.height = static_cast<int>(image.height);
  out.rgb.resize(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, out.rgb.data(), 0, nullptr)) {
    const std::string msg = image.message;
    png_image_free(&image);
    throw FrameError("undecodable PNG: " + msg);
  }
  return out;
}

Raster read_png(const std::filesystem::path& path) {
  const auto bytes = slurp(path);
  try {
    return decode_png(bytes);
  } catch (const FrameError& e) {
    throw FrameError(path.string() + ": " + e.what());
  }
}

PngHeader read_png_header(const std::filesystem::path& path) {
  const auto bytes = slurp(path);
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size())) {
    throw FrameError(path.string() + ": undecodable PNG: " + image.message);
  }
  PngHeader h{static_cast<int>(image.width), static_cast<int>(image.height)};
  png_image_free(&image);
  return h;
}

void write_png(const std::filesystem::path& path, const Raster& raster) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(raster.width);
  image.height = static_cast<png_uint_32>(raster.height);
  image.format = PNG_FORMAT_RGB;
  if (!png_image_write_to_file(&image, path.c_str(), 0, raster.rgb.data(), 0, nullptr)) {
    throw FrameError("cannot write PNG " + path.string() + ": " + image.message);
  }
}

}  // namespace mmviad
