#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "usir/errors.hpp"
#include "usir/grid.hpp"
#include "usir/operators.hpp"
#include "usir/pulse.hpp"
#include "usir/system_matrix.hpp"

namespace usir {

struct ApodizationConfig {
  double tukey_alpha = 0.25;
  double f_number = 1.4;

  void validate() const {
    if (!(tukey_alpha >= 0.0 && tukey_alpha <= 1.0))
      throw ValidationError("ApodizationConfig: alpha must be in [0,1]");
    if (!(f_number > 0.0))
      throw ValidationError("ApodizationConfig: f-number must be > 0");
  }
};

/// Tukey(alpha) window on normalized position u in [0,1]; zero outside.
inline double tukey_window(double u, double alpha) {
  if (u < 0.0 || u > 1.0)
    return 0.0;
  if (alpha <= 0.0)
    return 1.0;
  const double edge = alpha / 2.0;
  if (u < edge)
    return 0.5 * (1.0 + std::cos(std::numbers::pi * (2.0 * u / alpha - 1.0)));
  if (u > 1.0 - edge)
    return 0.5 *
           (1.0 + std::cos(std::numbers::pi * (2.0 * u / alpha - 2.0 / alpha + 1.0)));
  return 1.0;
}

/// Per-element receive apodization for one pixel: Tukey(alpha) over the
/// aperture of half-width z/(2 f#) centered at the pixel's lateral
/// position, normalized to unit sum when any element is active.
inline std::vector<double> apodization_weights(const ProbeConfig& probe,
                                               const ApodizationConfig& apod,
                                               double x_mm, double z_mm) {
  const double half_mm = z_mm / (2.0 * apod.f_number);
  std::vector<double> w(static_cast<std::size_t>(probe.num_elements), 0.0);
  double sum = 0.0;
  for (int j = 0; j < probe.num_elements; ++j) {
    const double u = (probe.element_x_mm(j) - (x_mm - half_mm)) / (2.0 * half_mm);
    const double v = tukey_window(u, apod.tukey_alpha);
    w[static_cast<std::size_t>(j)] = v;
    sum += v;
  }
  if (sum > 0.0)
    for (double& v : w)
      v /= sum;
  return w;
}

struct BeamformerBuildReport {
  /// Pixel indices whose aperture contained no active element; the
  /// corresponding beamformer row is all zero.
  std::vector<int> zero_rows;
};

/// Weighted matched filter B = W o H^T (N x KL): row i scales the transpose
/// column of pixel i by that pixel's per-element apodization weights.
inline DenseOperator build_beamformer(const DenseOperator& h,
                                      const ProbeConfig& probe,
                                      const ImageGrid& grid,
                                      const ApodizationConfig& apod,
                                      BeamformerBuildReport* report = nullptr) {
  probe.validate();
  apod.validate();
  const int L = probe.num_elements;
  const int K = probe.num_time_samples;
  const int n = grid.width_px * grid.depth_px;
  if (h.rows != L * K || h.cols != n)
    throw DimensionError("build_beamformer: H dims inconsistent with probe/grid");

  DenseOperator b(n, L * K);
  for (int i = 0; i < n; ++i) {
    const auto [x_mm, z_mm] = grid.pixel_position(i);
    const std::vector<double> w = apodization_weights(probe, apod, x_mm, z_mm);
    bool any = false;
    for (int j = 0; j < L; ++j) {
      const double wj = w[static_cast<std::size_t>(j)];
      if (wj == 0.0)
        continue;
      any = true;
      for (int k = 0; k < K; ++k)
        b.at(i, j * K + k) = wj * h.at(j * K + k, i);
    }
    if (!any && report != nullptr)
      report->zero_rows.push_back(i);
  }
  return b;
}

/// Delay-and-sum baseline: per pixel, the apodization-weighted sum of
/// linearly interpolated channel samples at the round-trip delay. Delays
/// outside the acquisition window contribute zero.
inline ReflectivityMap das_beamform(const RFChannelData& rf,
                                    const ProbeConfig& probe,
                                    const ImageGrid& grid,
                                    const ApodizationConfig& apod) {
  probe.validate();
  apod.validate();
  if (rf.num_elements != probe.num_elements ||
      rf.num_time_samples != probe.num_time_samples)
    throw DimensionError("das_beamform: RF dims inconsistent with probe");
  const int n = grid.width_px * grid.depth_px;
  const double fs = probe.sampling_rate_hz;
  const double t0 = probe.acquisition_start_time_s;

  ReflectivityMap image{grid, std::vector<double>(static_cast<std::size_t>(n), 0.0)};
  for (int i = 0; i < n; ++i) {
    const auto [x_mm, z_mm] = grid.pixel_position(i);
    const std::vector<double> w = apodization_weights(probe, apod, x_mm, z_mm);
    double acc = 0.0;
    for (int j = 0; j < probe.num_elements; ++j) {
      const double wj = w[static_cast<std::size_t>(j)];
      if (wj == 0.0)
        continue;
      const double s = (plane_wave_delay_s(probe, j, x_mm, z_mm) - t0) * fs;
      const int k0 = static_cast<int>(std::floor(s));
      if (k0 < 0 || k0 + 1 >= probe.num_time_samples)
        continue;
      const double frac = s - k0;
      acc += wj * ((1.0 - frac) * rf.sample(j, k0) + frac * rf.sample(j, k0 + 1));
    }
    image.values[static_cast<std::size_t>(i)] = acc;
  }
  return image;
}

/// Separable image-domain surrogate of B·H: Gaussian lateral kernel and
/// cosine-modulated Gaussian axial kernel, both with the given sigma,
/// sampled at the grid pitch.
inline SeparableOperator build_separable_psf(const ImageGrid& grid,
                                             double sigma_mm,
                                             double carrier_hz,
                                             double sound_speed_m_per_s,
                                             bool* under_resolved = nullptr) {
  const double px = grid.pitch_x_mm();
  const double pz = grid.pitch_z_mm();
  if (under_resolved != nullptr)
    *under_resolved = sigma_mm < px / 2.0 || sigma_mm < pz / 2.0;
  return SeparableOperator(
      modulated_axial_kernel(sigma_mm, pz, carrier_hz, sound_speed_m_per_s),
      gaussian_lateral_kernel(sigma_mm, px), grid);
}

} // namespace usir
