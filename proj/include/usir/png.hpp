#pragma once

#include <png.h>

#include <algorithm>
#include <cmath>
#include <csetjmp>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <memory>
#include <vector>

#include "usir/errors.hpp"
#include "usir/variance.hpp"

namespace usir {

namespace detail {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f != nullptr)
      std::fclose(f);
  }
};
using FileHandle = std::unique_ptr<std::FILE, FileCloser>;

} // namespace detail

/// 8-bit grayscale PNG of row-major pixel data.
inline void write_png_gray(const std::filesystem::path& path,
                           const std::vector<std::uint8_t>& pixels, int width,
                           int height) {
  if (width < 1 || height < 1 ||
      pixels.size() != static_cast<std::size_t>(width) * height)
    throw DimensionError("write_png_gray: pixel buffer size mismatch");

  detail::FileHandle file(std::fopen(path.string().c_str(), "wb"));
  if (!file)
    throw IoError(IoError::Kind::OpenFailed,
                  "write_png_gray: cannot open " + path.string());

  png_structp png =
      png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png != nullptr ? png_create_info_struct(png) : nullptr;
  if (png == nullptr || info == nullptr) {
    png_destroy_write_struct(&png, &info);
    throw IoError(IoError::Kind::WriteFailed,
                  "write_png_gray: libpng initialization failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError(IoError::Kind::WriteFailed,
                  "write_png_gray: libpng write failed for " + path.string());
  }

  png_init_io(png, file.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(width),
               static_cast<png_uint_32>(height), 8, PNG_COLOR_TYPE_GRAY,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int r = 0; r < height; ++r)
    png_write_row(png, const_cast<png_bytep>(
                           pixels.data() + static_cast<std::size_t>(r) * width));
  png_write_end(png, info);
  png_destroy_write_struct(&png, &info);
}

/// Reads an 8-bit grayscale PNG back (test helper); any other layout is an
/// error.
inline std::vector<std::uint8_t> read_png_gray(const std::filesystem::path& path,
                                               int& width, int& height) {
  detail::FileHandle file(std::fopen(path.string().c_str(), "rb"));
  if (!file)
    throw IoError(IoError::Kind::OpenFailed,
                  "read_png_gray: cannot open " + path.string());

  png_structp png =
      png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png != nullptr ? png_create_info_struct(png) : nullptr;
  if (png == nullptr || info == nullptr) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError(IoError::Kind::OpenFailed,
                  "read_png_gray: libpng initialization failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError(IoError::Kind::Truncated,
                  "read_png_gray: libpng read failed for " + path.string());
  }

  png_init_io(png, file.get());
  png_read_info(png, info);
  width = static_cast<int>(png_get_image_width(png, info));
  height = static_cast<int>(png_get_image_height(png, info));
  if (png_get_color_type(png, info) != PNG_COLOR_TYPE_GRAY ||
      png_get_bit_depth(png, info) != 8) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError(IoError::Kind::BadKind,
                  "read_png_gray: not an 8-bit grayscale PNG");
  }
  std::vector<std::uint8_t> pixels(static_cast<std::size_t>(width) * height);
  for (int r = 0; r < height; ++r)
    png_read_row(png, pixels.data() + static_cast<std::size_t>(r) * width,
                 nullptr);
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return pixels;
}

/// Gray level of one compressed value: the dB floor maps to 0 (black) and
/// 0 dB to 255 (white), linearly in between.
inline std::uint8_t db_to_gray(double db, double dynamic_range_db) {
  const double unit = 1.0 + db / dynamic_range_db;
  const long level = std::lround(255.0 * unit);
  return static_cast<std::uint8_t>(std::clamp(level, 0L, 255L));
}

/// Log-compresses an image to the given dynamic range and writes it as an
/// 8-bit grayscale PNG.
inline void render_png(const std::filesystem::path& path,
                       const std::vector<double>& values, int width, int height,
                       double dynamic_range_db) {
  const std::vector<double> db = db_compress(values, dynamic_range_db);
  std::vector<std::uint8_t> pixels(db.size());
  for (std::size_t i = 0; i < db.size(); ++i)
    pixels[i] = db_to_gray(db[i], dynamic_range_db);
  write_png_gray(path, pixels, width, height);
}

} // namespace usir
