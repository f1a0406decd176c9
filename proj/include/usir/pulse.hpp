#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "usir/errors.hpp"

namespace usir {

/// Linear-array acquisition parameters. Element x positions are centered on
/// the origin: x_j = (j - (L-1)/2) * pitch.
struct ProbeConfig {
  int num_elements = 128;             // L
  double element_pitch_mm = 0.3;      // [mm]
  double center_frequency_hz = 5.208e6;
  double sampling_rate_hz = 20.8e6;
  double bandwidth_ratio = 0.67;      // -6 dB fractional bandwidth
  double sound_speed_m_per_s = 1540.0;
  int num_time_samples = 0;           // K; 0 means "derive from the grid"
  double acquisition_start_time_s = 0.0;

  void validate() const {
    if (num_elements < 1)
      throw ValidationError("ProbeConfig: need >= 1 element");
    if (!(element_pitch_mm > 0.0))
      throw ValidationError("ProbeConfig: pitch must be > 0");
    if (!(center_frequency_hz > 0.0) || !(sampling_rate_hz > 0.0))
      throw ValidationError("ProbeConfig: frequencies must be > 0");
    if (!(bandwidth_ratio > 0.0 && bandwidth_ratio < 1.0))
      throw ValidationError("ProbeConfig: bandwidth ratio must be in (0,1)");
    if (!(sound_speed_m_per_s > 0.0))
      throw ValidationError("ProbeConfig: sound speed must be > 0");
    if (num_time_samples < 0)
      throw ValidationError("ProbeConfig: negative sample count");
  }

  // [mm] lateral position of element j
  [[nodiscard]] double element_x_mm(int j) const {
    return (j - 0.5 * (num_elements - 1)) * element_pitch_mm;
  }
};

/// Sampled pulse-echo kernel (excitation convolved with the transducer
/// response), peak-normalized, finite support, center sample at t = 0.
struct PulseKernel {
  std::vector<double> samples;
  double sample_period_s = 0.0;
  int center_index = 0;

  /// Kernel value at time offset t, nearest-sample lookup, zero outside the
  /// stored support.
  [[nodiscard]] double value_at(double t_s) const {
    const long idx =
        center_index + std::lround(t_s / sample_period_s);
    if (idx < 0 || idx >= static_cast<long>(samples.size()))
      return 0.0;
    return samples[static_cast<std::size_t>(idx)];
  }

  // [s] half support (center to last stored sample)
  [[nodiscard]] double half_support_s() const {
    return (static_cast<double>(samples.size() - 1) - center_index) *
           sample_period_s;
  }
};

/// Gaussian-modulated cosine pulse at the probe's center frequency. The
/// envelope std is chosen so the -6 dB spectral full width equals
/// bandwidth_ratio * center frequency; support is truncated where the
/// envelope drops below 1e-4 of the peak.
inline PulseKernel build_pulse(const ProbeConfig& probe) {
  probe.validate();
  const double width_hz = probe.bandwidth_ratio * probe.center_frequency_hz;
  // envelope exp(-t^2 / (2 s^2)) has -6 dB amplitude full width
  // sqrt(2 ln 2) / (pi s) in frequency, solve for s
  const double sigma_t =
      std::sqrt(2.0 * std::numbers::ln2) / (std::numbers::pi * width_hz);
  const double dt = 1.0 / probe.sampling_rate_hz;
  const double cut = sigma_t * std::sqrt(-2.0 * std::log(1e-4));
  const int half = static_cast<int>(std::ceil(cut / dt));

  PulseKernel kernel;
  kernel.sample_period_s = dt;
  kernel.center_index = half;
  kernel.samples.resize(2 * half + 1);
  for (int i = -half; i <= half; ++i) {
    const double t = i * dt;
    kernel.samples[static_cast<std::size_t>(i + half)] =
        std::cos(2.0 * std::numbers::pi * probe.center_frequency_hz * t) *
        std::exp(-0.5 * t * t / (sigma_t * sigma_t));
  }
  // cos(0) * exp(0) = 1 at the center, so the peak is already normalized
  return kernel;
}

} // namespace usir
