#pragma once

#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <memory>
#include <string>
#include <vector>

#include <png.h>

#include "flowfuse/tsdf/camera.hpp"

namespace flowfuse {

namespace detail {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

}  // namespace detail

/// 16-bit grayscale PNG; pixel value / depth_scale = meters, 0 = invalid.
inline DepthMap read_depth_png(const std::string& path, const Intrinsics& k) {
  detail::FilePtr fp(std::fopen(path.c_str(), "rb"));
  if (!fp) fail(ErrorKind::Data, "cannot open " + path);
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    fail(ErrorKind::Data, "libpng initialisation failed");
  }
  std::vector<std::uint16_t> raw;
  std::vector<png_bytep> rows;
  volatile png_uint_32 width = 0, height = 0;
  volatile bool ok = false;
  if (setjmp(png_jmpbuf(png)) == 0) {
    png_init_io(png, fp.get());
    png_read_info(png, info);
    width = png_get_image_width(png, info);
    height = png_get_image_height(png, info);
    const int depth_bits = png_get_bit_depth(png, info);
    const int color = png_get_color_type(png, info);
    if (depth_bits == 16 && color == PNG_COLOR_TYPE_GRAY) {
      png_set_swap(png);  // PNG stores big-endian samples
      raw.resize(std::size_t(width) * height);
      rows.resize(height);
      for (png_uint_32 r = 0; r < height; ++r) rows[r] = reinterpret_cast<png_bytep>(raw.data() + std::size_t(r) * width);
      png_read_image(png, rows.data());
      png_read_end(png, nullptr);
      ok = true;
    }
  }
  png_destroy_read_struct(&png, &info, nullptr);
  if (!ok) fail(ErrorKind::Data, path + ": not a readable 16-bit grayscale PNG");
  if (int(width) != k.width || int(height) != k.height)
    fail(ErrorKind::Data, path + ": image size does not match intrinsics");

  DepthMap depth(k);
  for (std::size_t i = 0; i < raw.size(); ++i) depth.depth[i] = raw[i] / k.depth_scale;
  return depth;
}

/// Writes depth quantized to round(d * depth_scale); values beyond 65535 become invalid.
inline void write_depth_png(const std::string& path, const DepthMap& depth) {
  const double scale = depth.intrinsics.depth_scale;
  std::vector<std::uint16_t> raw(depth.depth.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const double q = std::round(depth.depth[i] * scale);
    raw[i] = (q > 0.0 && q <= 65535.0) ? static_cast<std::uint16_t>(q) : 0;
  }
  detail::FilePtr fp(std::fopen(path.c_str(), "wb"));
  if (!fp) fail(ErrorKind::Data, "cannot write " + path);
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    fail(ErrorKind::Data, "libpng initialisation failed");
  }
  volatile bool ok = false;
  if (setjmp(png_jmpbuf(png)) == 0) {
    png_init_io(png, fp.get());
    png_set_IHDR(png, info, png_uint_32(depth.width), png_uint_32(depth.height), 16, PNG_COLOR_TYPE_GRAY,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    png_set_swap(png);
    for (int r = 0; r < depth.height; ++r)
      png_write_row(png, reinterpret_cast<png_const_bytep>(raw.data() + std::size_t(r) * depth.width));
    png_write_end(png, nullptr);
    ok = true;
  }
  png_destroy_write_struct(&png, &info);
  if (!ok) fail(ErrorKind::Data, "failed to encode " + path);
}

}  // namespace flowfuse
