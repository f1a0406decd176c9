#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <ostream>
#include <vector>

#include "usir/errors.hpp"
#include "usir/grid.hpp"
#include "usir/random.hpp"
#include "usir/svd.hpp"

namespace usir {

/// Predicts the clean image from a noisy one at noise level sigma. Must be
/// deterministic and length-preserving.
using Denoiser =
    std::function<std::vector<double>(const std::vector<double>&, double)>;

inline constexpr int kDefaultLadderLength = 1000;
inline constexpr double kDefaultSigmaMin = 1e-3;

/// Geometric noise ladder sigma_1 < ... < sigma_T with terminal sigma_0 = 0,
/// plus the decreasing subsequence of timesteps the sampler visits.
struct DiffusionSchedule {
  std::vector<double> sigma_by_t; // index t in [0, T]; sigma_by_t[0] == 0
  std::vector<int> step_indices;  // strictly decreasing, T ... 0

  [[nodiscard]] int ladder_length() const {
    return static_cast<int>(sigma_by_t.size()) - 1;
  }
  [[nodiscard]] int num_updates() const {
    return static_cast<int>(step_indices.size()) - 1;
  }
  [[nodiscard]] double sigma(int t) const {
    return sigma_by_t[static_cast<std::size_t>(t)];
  }
  [[nodiscard]] double sigma_start() const {
    return sigma(step_indices.front());
  }
};

/// Geometric ladder over T levels traversed in num_steps evenly spaced
/// jumps from t = T down to t = 0.
inline DiffusionSchedule make_schedule(int ladder_length, double sigma_max,
                                       double sigma_min, int num_steps) {
  if (num_steps < 1 || ladder_length < num_steps)
    throw ValidationError("make_schedule: need ladder_length >= num_steps >= 1");
  if (!(sigma_max > sigma_min) || !(sigma_min > 0.0))
    throw ValidationError("make_schedule: need sigma_max > sigma_min > 0");

  DiffusionSchedule sched;
  sched.sigma_by_t.resize(static_cast<std::size_t>(ladder_length) + 1);
  sched.sigma_by_t[0] = 0.0;
  if (ladder_length == 1) {
    sched.sigma_by_t[1] = sigma_max;
  } else {
    const double ratio = std::pow(sigma_max / sigma_min,
                                  1.0 / static_cast<double>(ladder_length - 1));
    for (int t = 1; t <= ladder_length; ++t)
      sched.sigma_by_t[static_cast<std::size_t>(t)] =
          sigma_min * std::pow(ratio, static_cast<double>(t - 1));
    // endpoints exact despite pow round-off
    sched.sigma_by_t[1] = sigma_min;
    sched.sigma_by_t[static_cast<std::size_t>(ladder_length)] = sigma_max;
  }

  sched.step_indices.resize(static_cast<std::size_t>(num_steps) + 1);
  for (int i = 0; i <= num_steps; ++i) {
    int t = static_cast<int>(std::lround(
        static_cast<double>(ladder_length) *
        (1.0 - static_cast<double>(i) / static_cast<double>(num_steps))));
    // rounding can repeat a level; force strict decrease (room exists since
    // ladder_length >= num_steps)
    if (i > 0 && t >= sched.step_indices[static_cast<std::size_t>(i) - 1])
      t = sched.step_indices[static_cast<std::size_t>(i) - 1] - 1;
    sched.step_indices[static_cast<std::size_t>(i)] = t;
  }
  sched.step_indices.front() = ladder_length;
  sched.step_indices.back() = 0;
  return sched;
}

/// Ladder top for a given spectral measurement: twice the largest observed
/// coefficient magnitude, or 1 when the measurement is identically zero.
inline double suggest_sigma_max(const SpectralVector& ybar) {
  double peak = 0.0;
  for (std::size_t c = 0; c < ybar.coefficients.size(); ++c)
    if (!ybar.unobserved[c])
      peak = std::max(peak, std::abs(ybar.coefficients[c]));
  return peak > 0.0 ? 2.0 * peak : 1.0;
}

struct SamplerConfig {
  double eta = 0.85;
  double eta_b = 1.0;
  int num_steps = 50;
  double measurement_noise_std = 0.0; // sigma_d
  std::uint64_t seed = 0;

  void validate() const {
    if (!(eta >= 0.0 && eta <= 1.0))
      throw ValidationError("SamplerConfig: eta must be in [0,1]");
    if (!(eta_b >= 0.0 && eta_b <= 1.0))
      throw ValidationError("SamplerConfig: eta_b must be in [0,1]");
    if (num_steps < 1)
      throw ValidationError("SamplerConfig: num_steps must be >= 1");
    if (!(measurement_noise_std >= 0.0))
      throw ValidationError("SamplerConfig: measurement noise std must be >= 0");
  }
};

/// Mixing weights of one spectral component for one update
/// x_next = A x_t + B ybar + C x_theta + D xi.
struct StepCoefficients {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  double d = 0.0;
};

/// Transition weights taking a component from noise level sigma_t to
/// sigma_next. Three branches: unobserved components mix the current state
/// with the prediction; observed components follow the measurement when its
/// effective noise sigma_d/s is at or below sigma_next, and a
/// prediction-anchored step scaled by the signal-to-noise ratio
/// sigma_next*s/sigma_d otherwise. The two mixture identities
///   A + B + C = 1
///   (A sigma_t)^2 + (B sigma_d/s)^2 + D^2 = sigma_next^2
/// are re-checked on every call; a violation is an internal error.
inline StepCoefficients compute_coefficients(double sigma_t, double sigma_next,
                                             double sigma_d, double s_i,
                                             const SamplerConfig& cfg) {
  if (!(sigma_t > sigma_next) || !(sigma_next >= 0.0))
    throw ValidationError("compute_coefficients: need sigma_t > sigma_next >= 0");
  if (!(s_i >= 0.0))
    throw ValidationError("compute_coefficients: need s_i >= 0");

  StepCoefficients k;
  if (s_i == 0.0) {
    k.a = std::sqrt(1.0 - cfg.eta * cfg.eta) * sigma_next / sigma_t;
    k.b = 0.0;
    k.c = 1.0 - k.a;
    k.d = cfg.eta * sigma_next;
  } else {
    const double noise_over_s = sigma_d / s_i;
    if (noise_over_s <= sigma_next) {
      k.a = 0.0;
      k.b = cfg.eta_b;
      k.c = 1.0 - cfg.eta_b;
      k.d = std::sqrt(sigma_next * sigma_next -
                      cfg.eta_b * cfg.eta_b * noise_over_s * noise_over_s);
    } else {
      k.a = 0.0;
      k.b = std::sqrt(1.0 - cfg.eta * cfg.eta) * sigma_next / noise_over_s;
      k.c = 1.0 - k.b;
      k.d = cfg.eta * sigma_next;
    }
  }

  const double mix = k.a + k.b + k.c - 1.0;
  const double meas_term = s_i > 0.0 ? k.b * sigma_d / s_i : 0.0;
  const double var = k.a * sigma_t * k.a * sigma_t + meas_term * meas_term +
                     k.d * k.d - sigma_next * sigma_next;
  const double scale = std::max(1.0, sigma_next * sigma_next);
  if (std::abs(mix) > 1e-12 || std::abs(var) > 1e-12 * scale)
    throw NumericalError("compute_coefficients: mixture identity violated");
  return k;
}

/// One restored reflectivity sample. Starts from measurement-aware noise at
/// the ladder top, walks the schedule applying per-component transition
/// weights, calling the denoiser in image space at each level, and returns
/// the image-space result at sigma = 0.
///
/// Draw order (fixed for reproducibility): one normal per component at
/// initialization, then one per component per update in natural component
/// order.
inline ReflectivityMap sample(const SpectralVector& ybar,
                              const SvdFactorization& f,
                              const Denoiser& denoiser,
                              const DiffusionSchedule& schedule,
                              const SamplerConfig& cfg, const ImageGrid& grid,
                              std::ostream* trace = nullptr) {
  cfg.validate();
  const int n = f.num_components();
  if (static_cast<int>(ybar.coefficients.size()) != n)
    throw DimensionError("sample: spectral measurement length != components");
  if (grid.width_px * grid.depth_px != n)
    throw DimensionError("sample: grid size != spectral components");

  const std::vector<double>& s = f.singular_values();
  const double sigma_d = cfg.measurement_noise_std;
  NormalStream stream(cfg.seed);

  // state at the ladder top: follow the measurement where its effective
  // noise is below sigma_T, topped up to total std sigma_T; pure noise
  // elsewhere
  const double sigma_top = schedule.sigma_start();
  std::vector<double> xb(static_cast<std::size_t>(n));
  for (int c = 0; c < n; ++c) {
    const double xi = stream.next();
    const std::size_t uc = static_cast<std::size_t>(c);
    if (!ybar.unobserved[uc]) {
      const double noise_over_s = sigma_d / s[uc];
      if (noise_over_s < sigma_top) {
        xb[uc] = ybar.coefficients[uc] +
                 std::sqrt(sigma_top * sigma_top - noise_over_s * noise_over_s) *
                     xi;
        continue;
      }
    }
    xb[uc] = sigma_top * xi;
  }

  for (int step = 0; step < schedule.num_updates(); ++step) {
    const int t = schedule.step_indices[static_cast<std::size_t>(step)];
    const int t_next = schedule.step_indices[static_cast<std::size_t>(step) + 1];
    const double sigma_t = schedule.sigma(t);
    const double sigma_next = schedule.sigma(t_next);

    const std::vector<double> denoised = denoiser(f.apply_v(xb), sigma_t);
    if (static_cast<int>(denoised.size()) != n)
      throw ContractError("sample: denoiser changed the vector length");
    const std::vector<double> xb_theta = f.apply_vt(denoised);

    double worst_mix = 0.0;
    double worst_var = 0.0;
    for (int c = 0; c < n; ++c) {
      const std::size_t uc = static_cast<std::size_t>(c);
      const double xi = stream.next();
      const double s_eff = f.observed(c) ? s[uc] : 0.0;
      const StepCoefficients k =
          compute_coefficients(sigma_t, sigma_next, sigma_d, s_eff, cfg);
      if (trace != nullptr) {
        const double meas = s_eff > 0.0 ? k.b * sigma_d / s_eff : 0.0;
        worst_mix = std::max(worst_mix, std::abs(k.a + k.b + k.c - 1.0));
        worst_var = std::max(
            worst_var, std::abs(k.a * sigma_t * k.a * sigma_t + meas * meas +
                                k.d * k.d - sigma_next * sigma_next));
      }
      xb[uc] = k.a * xb[uc] + k.b * ybar.coefficients[uc] +
               k.c * xb_theta[uc] + k.d * xi;
    }
    if (trace != nullptr)
      *trace << t << '\t' << sigma_t << '\t' << t_next << '\t' << sigma_next
             << '\t' << worst_mix << '\t' << worst_var << '\n';
  }

  return ReflectivityMap{grid, f.apply_v(xb)};
}

} // namespace usir
