#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "usir/grid.hpp"
#include "usir/random.hpp"

namespace usir {

/// Circular occlusion phantom: disks stamped on a uniform background.
/// The first disk containing a pixel wins. `inside_level` 0 makes a disk
/// anechoic.
struct OcclusionSpec {
  struct Disk {
    double center_x_mm = 0.0;
    double center_z_mm = 0.0;
    double radius_mm = 0.0;
    double inside_level = 0.0;
  };
  std::vector<Disk> disks;
  double background_level = 1.0;
};

/// Point scatterer phantom: isolated bright pixels on a uniform background.
struct ScattererSpec {
  struct Point {
    double x_mm = 0.0;
    double z_mm = 0.0;
    double amplitude = 1.0;
  };
  std::vector<Point> points;
  double background_level = 0.0;
};

inline void validate_spec(const ImageGrid& grid, const OcclusionSpec& spec) {
  if (!(spec.background_level >= 0.0))
    throw ValidationError("occlusion phantom: background must be >= 0");
  for (const auto& d : spec.disks) {
    if (!(d.radius_mm > 0.0))
      throw ValidationError("occlusion phantom: disk radius must be > 0");
    if (!(d.inside_level >= 0.0))
      throw ValidationError("occlusion phantom: disk level must be >= 0");
    if (d.center_x_mm - d.radius_mm < grid.x_min_mm ||
        d.center_x_mm + d.radius_mm > grid.x_max_mm ||
        d.center_z_mm - d.radius_mm < grid.z_min_mm ||
        d.center_z_mm + d.radius_mm > grid.z_max_mm)
      throw ValidationError("occlusion phantom: disk outside grid extent");
  }
}

inline void validate_spec(const ImageGrid& grid, const ScattererSpec& spec) {
  if (!(spec.background_level >= 0.0))
    throw ValidationError("scatterer phantom: background must be >= 0");
  for (const auto& p : spec.points) {
    if (!(p.amplitude > 0.0))
      throw ValidationError("scatterer phantom: amplitude must be > 0");
    if (!grid.contains(p.x_mm, p.z_mm))
      throw ValidationError("scatterer phantom: point outside grid extent");
  }
}

inline EchogenicityMap make_occlusion_phantom(const ImageGrid& grid,
                                              const OcclusionSpec& spec) {
  validate_spec(grid, spec);
  std::vector<double> values(grid.pixel_count(), spec.background_level);
  for (int i = 0; i < grid.pixel_count(); ++i) {
    const auto [x, z] = grid.pixel_position(i);
    for (const auto& d : spec.disks) {
      const double dx = x - d.center_x_mm;
      const double dz = z - d.center_z_mm;
      if (dx * dx + dz * dz <= d.radius_mm * d.radius_mm) {
        values[i] = d.inside_level;
        break; // first disk wins
      }
    }
  }
  return {grid, std::move(values)};
}

inline EchogenicityMap make_scatterer_phantom(const ImageGrid& grid,
                                              const ScattererSpec& spec) {
  validate_spec(grid, spec);
  std::vector<double> values(grid.pixel_count(), spec.background_level);
  for (const auto& p : spec.points) {
    const int i = grid.nearest_index(p.x_mm, p.z_mm);
    values[i] = std::max(values[i], p.amplitude);
  }
  return {grid, std::move(values)};
}

/// Multiplicative speckle: o_i = m_i * p_i with m iid standard normal drawn
/// from a deterministic stream.
inline ReflectivityMap apply_multiplicative_noise(const EchogenicityMap& p,
                                                  std::uint64_t seed) {
  NormalStream stream(seed);
  std::vector<double> values(p.values.size());
  for (std::size_t i = 0; i < values.size(); ++i)
    values[i] = stream.next() * p.values[i];
  return {p.grid, std::move(values)};
}

/// 3x3 grid of anechoic disks, radius 2 mm, evenly spaced in the field of
/// view. Matches the shipped occlusion configs.
inline OcclusionSpec default_occlusion_layout(const ImageGrid& grid,
                                              double radius_mm = 2.0,
                                              double background = 1.0) {
  OcclusionSpec spec;
  spec.background_level = background;
  const double wx = grid.x_max_mm - grid.x_min_mm;
  const double wz = grid.z_max_mm - grid.z_min_mm;
  for (int r = 1; r <= 3; ++r)
    for (int c = 1; c <= 3; ++c)
      spec.disks.push_back({grid.x_min_mm + wx * c / 4.0,
                            grid.z_min_mm + wz * r / 4.0, radius_mm, 0.0});
  return spec;
}

/// 5x5 lattice of unit scatterers on a dark background.
inline ScattererSpec default_scatterer_layout(const ImageGrid& grid,
                                              double amplitude = 1.0) {
  ScattererSpec spec;
  spec.background_level = 0.0;
  const double wx = grid.x_max_mm - grid.x_min_mm;
  const double wz = grid.z_max_mm - grid.z_min_mm;
  for (int r = 1; r <= 5; ++r)
    for (int c = 1; c <= 5; ++c)
      spec.points.push_back({grid.x_min_mm + wx * c / 6.0,
                             grid.z_min_mm + wz * r / 6.0, amplitude});
  return spec;
}

} // namespace usir
