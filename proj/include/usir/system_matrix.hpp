#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "usir/errors.hpp"
#include "usir/grid.hpp"
#include "usir/operators.hpp"
#include "usir/pulse.hpp"

namespace usir {

/// Round-trip delay for a 0-degree plane-wave transmit: the wavefront
/// reaches depth z at z/c, the echo returns over the direct path to the
/// element.
inline double plane_wave_delay_s(const ProbeConfig& probe, int element,
                                 double x_mm, double z_mm) {
  const double xe_mm = probe.element_x_mm(element);
  const double dx_m = (x_mm - xe_mm) * 1e-3;
  const double z_m = z_mm * 1e-3;
  return (z_m + std::sqrt(dx_m * dx_m + z_m * z_m)) /
         probe.sound_speed_m_per_s;
}

/// Copy of the probe with the acquisition window fitted to the grid: the
/// window starts at the earliest echo onset (clamped at zero) and ends
/// after the latest echo has fully decayed.
inline ProbeConfig with_derived_window(ProbeConfig probe,
                                       const ImageGrid& grid) {
  probe.validate();
  const PulseKernel pulse = build_pulse(probe);
  double tau_min = std::numeric_limits<double>::infinity();
  double tau_max = 0.0;
  // delay extrema occur at grid corners
  for (const double x : {grid.x_min_mm, grid.x_max_mm})
    for (const double z : {grid.z_min_mm, grid.z_max_mm})
      for (const int j : {0, probe.num_elements - 1}) {
        const double tau = plane_wave_delay_s(probe, j, x, z);
        tau_min = std::min(tau_min, tau);
        tau_max = std::max(tau_max, tau);
      }
  const double dt = 1.0 / probe.sampling_rate_hz;
  const double start = std::max(0.0, tau_min - pulse.half_support_s());
  probe.acquisition_start_time_s = std::floor(start / dt) * dt;
  const double end = tau_max + pulse.half_support_s();
  probe.num_time_samples = static_cast<int>(
      std::ceil((end - probe.acquisition_start_time_s) / dt)) + 1;
  return probe;
}

struct SystemMatrixBuildReport {
  double min_delay_s = 0.0;
  double max_delay_s = 0.0;
  /// Pixels whose echo peak falls outside the sampled window for at least
  /// one element (their response is partially or fully truncated).
  int truncated_pixel_count = 0;
};

/// Dense acquisition model H mapping a reflectivity image (row-major,
/// depth-major) to channel data. Row j*K + k holds the response of element
/// j at time sample k; entry value is the pulse kernel evaluated at the
/// arrival-time offset of that pixel.
inline DenseOperator build_system_matrix(const ProbeConfig& probe,
                                         const ImageGrid& grid,
                                         SystemMatrixBuildReport* report = nullptr) {
  probe.validate();
  if (probe.num_time_samples < 1)
    throw ValidationError(
        "build_system_matrix: time sample count not set; derive the window first");
  const PulseKernel pulse = build_pulse(probe);
  const int L = probe.num_elements;
  const int K = probe.num_time_samples;
  const int n = grid.width_px * grid.depth_px;
  const double dt = 1.0 / probe.sampling_rate_hz;
  const double t0 = probe.acquisition_start_time_s;
  const double t_last = t0 + (K - 1) * dt;

  DenseOperator h(L * K, n);
  double tau_lo = std::numeric_limits<double>::infinity();
  double tau_hi = 0.0;
  int truncated = 0;
  for (int i = 0; i < n; ++i) {
    const auto [x_mm, z_mm] = grid.pixel_position(i);
    bool pixel_truncated = false;
    for (int j = 0; j < L; ++j) {
      const double tau = plane_wave_delay_s(probe, j, x_mm, z_mm);
      tau_lo = std::min(tau_lo, tau);
      tau_hi = std::max(tau_hi, tau);
      if (tau < t0 || tau > t_last)
        pixel_truncated = true;
      // only samples within the pulse support contribute; the nearest-sample
      // lookup reaches half a period past the stored extent
      const double reach = pulse.half_support_s() + 0.5 * pulse.sample_period_s;
      const int k_first = std::max(
          0, static_cast<int>(std::ceil((tau - reach - t0) / dt)));
      const int k_last = std::min(
          K - 1, static_cast<int>(std::floor((tau + reach - t0) / dt)));
      for (int k = k_first; k <= k_last; ++k) {
        const double t = t0 + k * dt;
        const double v = pulse.value_at(t - tau);
        if (v != 0.0)
          h.at(j * K + k, i) = v;
      }
    }
    if (pixel_truncated)
      ++truncated;
  }
  if (report != nullptr) {
    report->min_delay_s = tau_lo;
    report->max_delay_s = tau_hi;
    report->truncated_pixel_count = truncated;
  }
  return h;
}

} // namespace usir
