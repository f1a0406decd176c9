#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "usir/errors.hpp"
#include "usir/grid.hpp"

namespace usir {

/// Generalized contrast-to-noise ratio: one minus the overlap of the
/// normalized value histograms of the two regions, binned over the joint
/// min-max range. 1 means perfectly separable regions, 0 identical ones.
inline double gcnr(const std::vector<double>& img, const RegionMask& inside,
                   const RegionMask& outside, int num_bins = 256) {
  if (num_bins < 2)
    throw ValidationError("gcnr: need >= 2 bins");
  if (inside.count() == 0 || outside.count() == 0)
    throw ValidationError("gcnr: empty region");
  if (inside.overlaps(outside))
    throw ValidationError("gcnr: regions overlap");
  if (img.size() != inside.member.size() || img.size() != outside.member.size())
    throw DimensionError("gcnr: image/mask size mismatch");

  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < img.size(); ++i)
    if (inside.member[i] || outside.member[i]) {
      lo = std::min(lo, img[i]);
      hi = std::max(hi, img[i]);
    }
  if (!(hi > lo))
    return 0.0; // all values identical: full histogram overlap

  std::vector<double> g_in(static_cast<std::size_t>(num_bins), 0.0);
  std::vector<double> g_out(static_cast<std::size_t>(num_bins), 0.0);
  const double scale = num_bins / (hi - lo);
  for (std::size_t i = 0; i < img.size(); ++i) {
    if (!inside.member[i] && !outside.member[i])
      continue;
    int bin = static_cast<int>((img[i] - lo) * scale);
    bin = std::clamp(bin, 0, num_bins - 1);
    if (inside.member[i])
      g_in[static_cast<std::size_t>(bin)] += 1.0;
    else
      g_out[static_cast<std::size_t>(bin)] += 1.0;
  }
  const double n_in = static_cast<double>(inside.count());
  const double n_out = static_cast<double>(outside.count());
  double overlap = 0.0;
  for (int b = 0; b < num_bins; ++b)
    overlap += std::min(g_in[static_cast<std::size_t>(b)] / n_in,
                        g_out[static_cast<std::size_t>(b)] / n_out);
  return 1.0 - overlap;
}

/// Mean over population standard deviation of the ROI values.
inline double snr(const std::vector<double>& img, const RegionMask& roi) {
  if (roi.count() < 2)
    throw ValidationError("snr: ROI needs >= 2 pixels");
  if (img.size() != roi.member.size())
    throw DimensionError("snr: image/mask size mismatch");
  double sum = 0.0;
  for (std::size_t i = 0; i < img.size(); ++i)
    if (roi.member[i])
      sum += img[i];
  const double n = static_cast<double>(roi.count());
  const double mu = sum / n;
  double sq = 0.0;
  for (std::size_t i = 0; i < img.size(); ++i)
    if (roi.member[i])
      sq += (img[i] - mu) * (img[i] - mu);
  const double sigma = std::sqrt(sq / n);
  if (sigma == 0.0)
    throw UndefinedMetricError("snr: zero standard deviation in ROI");
  return mu / sigma;
}

enum class ProfileAxis { Axial, Lateral };

/// Full width at half maximum of the amplitude profile through the
/// brightest pixel near the hint (searched within a +-search_radius_mm
/// box). Crossings of half the peak amplitude are located by linear
/// interpolation between neighboring pixels; the width is returned in mm.
inline double fwhm(const std::vector<double>& img, const ImageGrid& grid,
                   double peak_x_mm, double peak_z_mm, ProfileAxis axis,
                   double search_radius_mm = 1.0) {
  if (img.size() != static_cast<std::size_t>(grid.width_px) * grid.depth_px)
    throw DimensionError("fwhm: image/grid size mismatch");

  int peak_index = -1;
  double peak_value = -1.0;
  for (int i = 0; i < static_cast<int>(img.size()); ++i) {
    const auto [x, z] = grid.pixel_position(i);
    if (std::abs(x - peak_x_mm) > search_radius_mm ||
        std::abs(z - peak_z_mm) > search_radius_mm)
      continue;
    const double v = std::abs(img[static_cast<std::size_t>(i)]);
    if (v > peak_value) {
      peak_value = v;
      peak_index = i;
    }
  }
  if (peak_index < 0 || peak_value <= 0.0)
    throw UndefinedMetricError("fwhm: no peak found near the hint");

  const int peak_row = peak_index / grid.width_px;
  const int peak_col = peak_index % grid.width_px;
  const int profile_len =
      axis == ProfileAxis::Lateral ? grid.width_px : grid.depth_px;
  const int peak_pos = axis == ProfileAxis::Lateral ? peak_col : peak_row;
  const double pitch = axis == ProfileAxis::Lateral ? grid.pitch_x_mm()
                                                    : grid.pitch_z_mm();
  const auto profile_at = [&](int p) {
    const int i = axis == ProfileAxis::Lateral
                      ? peak_row * grid.width_px + p
                      : p * grid.width_px + peak_col;
    return std::abs(img[static_cast<std::size_t>(i)]);
  };

  const double half = peak_value / 2.0;
  const auto crossing = [&](int direction) {
    for (int p = peak_pos + direction; p >= 0 && p < profile_len;
         p += direction) {
      const double v = profile_at(p);
      if (v < half) {
        const double prev = profile_at(p - direction);
        // position between samples where the profile hits the half level
        const double frac = (prev - half) / (prev - v);
        return (static_cast<double>(p - direction) + direction * frac) * pitch;
      }
    }
    throw UndefinedMetricError(
        "fwhm: profile does not fall below half maximum inside the grid");
  };
  return crossing(+1) - crossing(-1);
}

/// Geometry of the scoring regions around a circular target, as radius
/// multiples.
struct RegionGeometry {
  double inside_radius_factor = 0.9; // disk eroded by 10%
  double outside_inner_factor = 1.25;
  double outside_outer_factor = 1.6; // annulus area ~ disk area

  void validate() const {
    if (!(inside_radius_factor > 0.0) ||
        !(outside_inner_factor > inside_radius_factor) ||
        !(outside_outer_factor > outside_inner_factor))
      throw ValidationError("RegionGeometry: need 0 < in < out_inner < out_outer");
  }
};

inline RegionMask disk_mask(const ImageGrid& grid, double center_x_mm,
                            double center_z_mm, double radius_mm) {
  if (!(radius_mm > 0.0))
    throw ValidationError("disk_mask: radius must be > 0");
  RegionMask mask{grid, std::vector<std::uint8_t>(
                            static_cast<std::size_t>(grid.width_px) *
                                grid.depth_px,
                            0)};
  for (int i = 0; i < static_cast<int>(mask.member.size()); ++i) {
    const auto [x, z] = grid.pixel_position(i);
    const double dx = x - center_x_mm;
    const double dz = z - center_z_mm;
    if (dx * dx + dz * dz <= radius_mm * radius_mm)
      mask.member[static_cast<std::size_t>(i)] = 1;
  }
  return mask;
}

inline RegionMask annulus_mask(const ImageGrid& grid, double center_x_mm,
                               double center_z_mm, double inner_radius_mm,
                               double outer_radius_mm) {
  if (!(inner_radius_mm >= 0.0) || !(outer_radius_mm > inner_radius_mm))
    throw ValidationError("annulus_mask: need 0 <= inner < outer");
  RegionMask mask{grid, std::vector<std::uint8_t>(
                            static_cast<std::size_t>(grid.width_px) *
                                grid.depth_px,
                            0)};
  for (int i = 0; i < static_cast<int>(mask.member.size()); ++i) {
    const auto [x, z] = grid.pixel_position(i);
    const double dx = x - center_x_mm;
    const double dz = z - center_z_mm;
    const double d2 = dx * dx + dz * dz;
    if (d2 >= inner_radius_mm * inner_radius_mm &&
        d2 <= outer_radius_mm * outer_radius_mm)
      mask.member[static_cast<std::size_t>(i)] = 1;
  }
  return mask;
}

inline RegionMask target_inside_mask(const ImageGrid& grid, double center_x_mm,
                                     double center_z_mm, double radius_mm,
                                     const RegionGeometry& geom = {}) {
  geom.validate();
  return disk_mask(grid, center_x_mm, center_z_mm,
                   geom.inside_radius_factor * radius_mm);
}

inline RegionMask target_outside_mask(const ImageGrid& grid, double center_x_mm,
                                      double center_z_mm, double radius_mm,
                                      const RegionGeometry& geom = {}) {
  geom.validate();
  return annulus_mask(grid, center_x_mm, center_z_mm,
                      geom.outside_inner_factor * radius_mm,
                      geom.outside_outer_factor * radius_mm);
}

/// Scores of one metric over several target regions with summary
/// statistics; non-finite scores are kept in `values` but excluded from the
/// mean and standard deviation.
struct MetricReport {
  std::string metric;
  std::vector<double> values;
  double mean = std::numeric_limits<double>::quiet_NaN();
  double stddev = std::numeric_limits<double>::quiet_NaN();
};

inline MetricReport make_metric_report(std::string metric,
                                       std::vector<double> values) {
  MetricReport report{std::move(metric), std::move(values), 0.0, 0.0};
  double sum = 0.0;
  int n = 0;
  for (double v : report.values)
    if (std::isfinite(v)) {
      sum += v;
      ++n;
    }
  if (n == 0) {
    report.mean = std::numeric_limits<double>::quiet_NaN();
    report.stddev = std::numeric_limits<double>::quiet_NaN();
    return report;
  }
  report.mean = sum / n;
  double sq = 0.0;
  for (double v : report.values)
    if (std::isfinite(v))
      sq += (v - report.mean) * (v - report.mean);
  report.stddev = n > 1 ? std::sqrt(sq / (n - 1)) : 0.0;
  return report;
}

} // namespace usir
