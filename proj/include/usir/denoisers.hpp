#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <vector>

#include "usir/ddrm.hpp"
#include "usir/errors.hpp"

namespace usir {

/// MMSE denoiser for a zero-mean Gaussian prior of the given per-pixel
/// variance: shrinks uniformly by v/(v + sigma^2).
inline Denoiser gaussian_prior_denoiser(double prior_variance) {
  if (!(prior_variance > 0.0))
    throw ValidationError("gaussian_prior_denoiser: variance must be > 0");
  return [prior_variance](const std::vector<double>& x, double sigma) {
    const double gain = prior_variance / (prior_variance + sigma * sigma);
    std::vector<double> out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i)
      out[i] = gain * x[i];
    return out;
  };
}

namespace detail {

inline int dyadic_side_of(std::size_t len) {
  const int side = static_cast<int>(std::lround(std::sqrt(
      static_cast<double>(len))));
  if (side < 2 || static_cast<std::size_t>(side) * side != len ||
      (side & (side - 1)) != 0)
    throw UnsupportedSizeError(
        "multiscale shrinkage needs a square grid with a power-of-two side");
  return side;
}

/// One orthonormal pairing pass over the leading n entries of each row
/// (stride 1) or column (stride = side) segment: averages to the front
/// half, differences to the back half, both scaled by 1/sqrt(2).
inline void haar_pass_1d(double* base, int n, int stride, bool inverse,
                         std::vector<double>& scratch) {
  const int half = n / 2;
  if (!inverse) {
    for (int i = 0; i < half; ++i) {
      const double a = base[2 * i * stride];
      const double b = base[(2 * i + 1) * stride];
      scratch[static_cast<std::size_t>(i)] = (a + b) * std::numbers::sqrt2 / 2.0;
      scratch[static_cast<std::size_t>(half + i)] =
          (a - b) * std::numbers::sqrt2 / 2.0;
    }
  } else {
    for (int i = 0; i < half; ++i) {
      const double lo = base[i * stride];
      const double hi = base[(half + i) * stride];
      scratch[static_cast<std::size_t>(2 * i)] =
          (lo + hi) * std::numbers::sqrt2 / 2.0;
      scratch[static_cast<std::size_t>(2 * i + 1)] =
          (lo - hi) * std::numbers::sqrt2 / 2.0;
    }
  }
  for (int i = 0; i < n; ++i)
    base[i * stride] = scratch[static_cast<std::size_t>(i)];
}

} // namespace detail

/// Multilevel 2-D orthonormal Haar transform of a square power-of-two
/// image, recursing on the coarse quadrant down to a single coefficient at
/// index 0. In place, exact inverse available below.
inline void haar_forward_2d(std::vector<double>& img) {
  const int side = detail::dyadic_side_of(img.size());
  std::vector<double> scratch(static_cast<std::size_t>(side));
  for (int n = side; n >= 2; n /= 2) {
    for (int r = 0; r < n; ++r)
      detail::haar_pass_1d(img.data() + static_cast<std::size_t>(r) * side, n, 1,
                           false, scratch);
    for (int c = 0; c < n; ++c)
      detail::haar_pass_1d(img.data() + c, n, side, false, scratch);
  }
}

inline void haar_inverse_2d(std::vector<double>& img) {
  const int side = detail::dyadic_side_of(img.size());
  std::vector<double> scratch(static_cast<std::size_t>(side));
  for (int n = 2; n <= side; n *= 2) {
    for (int c = 0; c < n; ++c)
      detail::haar_pass_1d(img.data() + c, n, side, true, scratch);
    for (int r = 0; r < n; ++r)
      detail::haar_pass_1d(img.data() + static_cast<std::size_t>(r) * side, n, 1,
                           true, scratch);
  }
}

/// Non-neural smoothness prior: soft-thresholds every multiscale detail
/// coefficient at threshold_scale * sigma (the overall-mean coefficient at
/// index 0 is kept) and inverts the transform. Orthonormality makes the
/// sigma = 0 case an exact identity.
inline Denoiser patchwise_shrinkage_denoiser(double threshold_scale) {
  if (!(threshold_scale > 0.0))
    throw ValidationError(
        "patchwise_shrinkage_denoiser: threshold scale must be > 0");
  return [threshold_scale](const std::vector<double>& x, double sigma) {
    std::vector<double> coeff = x;
    haar_forward_2d(coeff);
    const double threshold = threshold_scale * sigma;
    if (threshold > 0.0)
      for (std::size_t i = 1; i < coeff.size(); ++i) {
        const double w = coeff[i];
        const double mag = std::abs(w) - threshold;
        coeff[i] = mag > 0.0 ? (w > 0.0 ? mag : -mag) : 0.0;
      }
    haar_inverse_2d(coeff);
    return coeff;
  };
}

} // namespace usir
