#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "usir/errors.hpp"

namespace usir {

/// Rectangular image grid in physical units. Lateral axis x grows to the
/// right, axial axis z grows downward (depth). Pixels sample the extents
/// endpoint-inclusively, so pitch = extent / (count - 1).
///
/// Pixel layout is row-major with depth major: index = row * width_px + col,
/// where row indexes the axial (z) direction and col the lateral (x) one.
struct ImageGrid {
  int width_px = 0;
  int depth_px = 0;
  double x_min_mm = 0.0;
  double x_max_mm = 0.0;
  double z_min_mm = 0.0;
  double z_max_mm = 0.0;

  ImageGrid(int width, int depth, double x_min, double x_max, double z_min,
            double z_max)
      : width_px(width), depth_px(depth), x_min_mm(x_min), x_max_mm(x_max),
        z_min_mm(z_min), z_max_mm(z_max) {
    if (width_px < 2 || depth_px < 2)
      throw ValidationError("ImageGrid: need at least 2 pixels per axis");
    if (!(x_max_mm > x_min_mm) || !(z_max_mm > z_min_mm))
      throw ValidationError("ImageGrid: extents must have positive size");
    if (!(pitch_x_mm() > 0.0) || !(pitch_z_mm() > 0.0))
      throw ValidationError("ImageGrid: pixel pitch must be positive");
  }

  [[nodiscard]] int pixel_count() const { return width_px * depth_px; }

  // [mm] lateral / axial pixel pitch (endpoint-inclusive sampling)
  [[nodiscard]] double pitch_x_mm() const {
    return (x_max_mm - x_min_mm) / (width_px - 1);
  }
  [[nodiscard]] double pitch_z_mm() const {
    return (z_max_mm - z_min_mm) / (depth_px - 1);
  }

  [[nodiscard]] int index_of(int row, int col) const {
    return row * width_px + col;
  }
  [[nodiscard]] int row_of(int index) const { return index / width_px; }
  [[nodiscard]] int col_of(int index) const { return index % width_px; }

  /// Physical center (x, z) in mm of pixel `index`.
  [[nodiscard]] std::pair<double, double> pixel_position(int index) const {
    if (index < 0 || index >= pixel_count())
      throw std::out_of_range("ImageGrid::pixel_position: index " +
                              std::to_string(index) + " out of range");
    const int row = row_of(index);
    const int col = col_of(index);
    return {x_min_mm + col * pitch_x_mm(), z_min_mm + row * pitch_z_mm()};
  }

  [[nodiscard]] bool contains(double x_mm, double z_mm) const {
    return x_mm >= x_min_mm && x_mm <= x_max_mm && z_mm >= z_min_mm &&
           z_mm <= z_max_mm;
  }

  /// Index of the pixel whose center is nearest to (x, z). The point must lie
  /// inside the grid extents.
  [[nodiscard]] int nearest_index(double x_mm, double z_mm) const {
    if (!contains(x_mm, z_mm))
      throw ValidationError("ImageGrid::nearest_index: point outside grid");
    int col = static_cast<int>(std::lround((x_mm - x_min_mm) / pitch_x_mm()));
    int row = static_cast<int>(std::lround((z_mm - z_min_mm) / pitch_z_mm()));
    col = std::min(std::max(col, 0), width_px - 1);
    row = std::min(std::max(row, 0), depth_px - 1);
    return index_of(row, col);
  }

  [[nodiscard]] bool same_shape(const ImageGrid& other) const {
    return width_px == other.width_px && depth_px == other.depth_px &&
           x_min_mm == other.x_min_mm && x_max_mm == other.x_max_mm &&
           z_min_mm == other.z_min_mm && z_max_mm == other.z_max_mm;
  }
};

/// Nonnegative tissue echogenicity sampled on an image grid.
struct EchogenicityMap {
  ImageGrid grid;
  std::vector<double> values;

  EchogenicityMap(ImageGrid g, std::vector<double> v)
      : grid(g), values(std::move(v)) {
    if (static_cast<int>(values.size()) != grid.pixel_count())
      throw DimensionError("EchogenicityMap: value count != pixel count");
    for (double x : values)
      if (!(x >= 0.0))
        throw ValidationError("EchogenicityMap: values must be nonnegative");
  }
};

/// Signed tissue reflectivity (echogenicity modulated by speckle).
struct ReflectivityMap {
  ImageGrid grid;
  std::vector<double> values;

  ReflectivityMap(ImageGrid g, std::vector<double> v)
      : grid(g), values(std::move(v)) {
    if (static_cast<int>(values.size()) != grid.pixel_count())
      throw DimensionError("ReflectivityMap: value count != pixel count");
  }
};

/// Raw per-element RF time samples, element-major: element j occupies the
/// contiguous block [j*K, (j+1)*K).
struct RFChannelData {
  int num_elements = 0;     // L
  int num_time_samples = 0; // K
  double sampling_rate_hz = 0.0;
  std::vector<double> values;

  RFChannelData(int elements, int time_samples, double fs,
                std::vector<double> v)
      : num_elements(elements), num_time_samples(time_samples),
        sampling_rate_hz(fs), values(std::move(v)) {
    if (num_elements < 1 || num_time_samples < 1)
      throw ValidationError("RFChannelData: need >= 1 element and sample");
    if (!(sampling_rate_hz > 0.0))
      throw ValidationError("RFChannelData: sampling rate must be positive");
    if (values.size() !=
        static_cast<std::size_t>(num_elements) * num_time_samples)
      throw DimensionError("RFChannelData: value count != K*L");
  }

  [[nodiscard]] double sample(int element, int time_index) const {
    return values[static_cast<std::size_t>(element) * num_time_samples +
                  time_index];
  }
};

/// Boolean pixel membership mask on a grid.
struct RegionMask {
  ImageGrid grid;
  std::vector<std::uint8_t> member; // 0 or 1 per pixel

  RegionMask(ImageGrid g, std::vector<std::uint8_t> m)
      : grid(g), member(std::move(m)) {
    if (static_cast<int>(member.size()) != grid.pixel_count())
      throw DimensionError("RegionMask: member count != pixel count");
  }

  [[nodiscard]] std::size_t count() const {
    std::size_t n = 0;
    for (auto b : member)
      n += (b != 0);
    return n;
  }

  [[nodiscard]] bool overlaps(const RegionMask& other) const {
    const std::size_t n = std::min(member.size(), other.member.size());
    for (std::size_t i = 0; i < n; ++i)
      if (member[i] && other.member[i])
        return true;
    return false;
  }
};

} // namespace usir
