#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstddef>
#include <numeric>
#include <vector>

#include "usir/denoisers.hpp"
#include "usir/random.hpp"

using namespace usir;

namespace {

std::vector<double> random_image(std::size_t n, std::uint64_t seed) {
  NormalStream s(seed);
  std::vector<double> v(n);
  s.fill(v);
  return v;
}

double energy(const std::vector<double>& v) {
  return std::inner_product(v.begin(), v.end(), v.begin(), 0.0);
}

} // namespace

TEST_CASE("gaussian prior denoiser applies the Wiener gain", "[denoise]") {
  const Denoiser d = gaussian_prior_denoiser(2.0);
  const std::vector<double> x = {1.0, -4.0, 0.5};
  const std::vector<double> out = d(x, 1.0);
  // gain = v / (v + sigma^2) = 2/3
  for (std::size_t i = 0; i < x.size(); ++i)
    REQUIRE(out[i] == Catch::Approx(x[i] * 2.0 / 3.0).margin(1e-15));
  // sigma = 0 leaves the input unchanged.
  REQUIRE(d(x, 0.0) == x);
  REQUIRE_THROWS_AS(gaussian_prior_denoiser(0.0), ValidationError);
}

TEST_CASE("haar transform round trips", "[denoise]") {
  for (const int side : {2, 4, 8, 64}) {
    const std::size_t n = static_cast<std::size_t>(side) * side;
    const std::vector<double> original =
        random_image(n, 10 + static_cast<std::uint64_t>(side));
    std::vector<double> img = original;
    haar_forward_2d(img);
    haar_inverse_2d(img);
    for (std::size_t i = 0; i < n; ++i)
      REQUIRE(img[i] == Catch::Approx(original[i]).margin(1e-10));
  }
}

TEST_CASE("haar transform is orthonormal", "[denoise]") {
  const std::vector<double> original = random_image(64 * 64, 3);
  std::vector<double> img = original;
  haar_forward_2d(img);
  REQUIRE(energy(img) == Catch::Approx(energy(original)).epsilon(1e-12));
}

TEST_CASE("haar coefficient 0 is the scaled image mean", "[denoise]") {
  const int side = 16;
  const std::size_t n = static_cast<std::size_t>(side) * side;
  std::vector<double> img = random_image(n, 4);
  const double mean =
      std::accumulate(img.begin(), img.end(), 0.0) / static_cast<double>(n);
  haar_forward_2d(img);
  // Orthonormal scaling: coefficient 0 = mean * side.
  REQUIRE(img[0] == Catch::Approx(mean * side).epsilon(1e-12));
}

TEST_CASE("constant images have a single haar coefficient", "[denoise]") {
  const int side = 8;
  std::vector<double> img(static_cast<std::size_t>(side) * side, 2.5);
  haar_forward_2d(img);
  REQUIRE(img[0] == Catch::Approx(2.5 * side).epsilon(1e-12));
  for (std::size_t i = 1; i < img.size(); ++i)
    REQUIRE(img[i] == Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("haar on a 2x2 block matches the hand computation", "[denoise]") {
  // One level: rows then columns with (a+b)/sqrt(2) and (a-b)/sqrt(2).
  std::vector<double> img = {1.0, 2.0, 3.0, 4.0};
  haar_forward_2d(img);
  REQUIRE(img[0] == Catch::Approx(5.0).margin(1e-12));       // mean * 2
  REQUIRE(img[1] == Catch::Approx(-1.0).margin(1e-12));      // lateral detail
  REQUIRE(img[2] == Catch::Approx(-2.0).margin(1e-12));      // axial detail
  REQUIRE(img[3] == Catch::Approx(0.0).margin(1e-12));       // diagonal
}

TEST_CASE("shrinkage denoiser requires a dyadic square", "[denoise]") {
  const Denoiser d = patchwise_shrinkage_denoiser(1.0);
  REQUIRE_THROWS_AS(d(std::vector<double>(12, 0.0), 1.0),
                    UnsupportedSizeError);
  REQUIRE_THROWS_AS(d(std::vector<double>(9, 0.0), 1.0),
                    UnsupportedSizeError);
  REQUIRE_NOTHROW(d(std::vector<double>(16, 0.0), 1.0));
  REQUIRE_THROWS_AS(patchwise_shrinkage_denoiser(0.0), ValidationError);
}

TEST_CASE("shrinkage at sigma 0 is the identity", "[denoise]") {
  const Denoiser d = patchwise_shrinkage_denoiser(1.5);
  const std::vector<double> x = random_image(32 * 32, 6);
  const std::vector<double> out = d(x, 0.0);
  for (std::size_t i = 0; i < x.size(); ++i)
    REQUIRE(out[i] == Catch::Approx(x[i]).margin(1e-10));
}

TEST_CASE("shrinkage preserves constants and kills small detail", "[denoise]") {
  const Denoiser d = patchwise_shrinkage_denoiser(1.0);

  // A constant image has detail coefficients 0; the mean coefficient is
  // exempt from shrinkage, so the output is the same constant.
  std::vector<double> flat(16 * 16, 3.0);
  const std::vector<double> out = d(flat, 2.0);
  for (double v : out)
    REQUIRE(v == Catch::Approx(3.0).margin(1e-10));

  // A small perturbation below the threshold is flattened entirely.
  std::vector<double> bumped = flat;
  bumped[37] += 1e-3;
  const std::vector<double> smoothed = d(bumped, 2.0);
  for (double v : smoothed)
    REQUIRE(v == Catch::Approx(3.0 + 1e-3 / 256.0).margin(1e-9));
}

TEST_CASE("shrinkage soft-thresholds every detail coefficient", "[denoise]") {
  const double scale = 0.8;
  const double sigma = 0.5;
  const Denoiser d = patchwise_shrinkage_denoiser(scale);
  const std::vector<double> x = random_image(16 * 16, 7);

  std::vector<double> coeff = x;
  haar_forward_2d(coeff);
  const double threshold = scale * sigma;
  for (std::size_t i = 1; i < coeff.size(); ++i) {
    const double mag = std::abs(coeff[i]) - threshold;
    coeff[i] = mag > 0.0 ? std::copysign(mag, coeff[i]) : 0.0;
  }
  haar_inverse_2d(coeff);

  const std::vector<double> out = d(x, sigma);
  for (std::size_t i = 0; i < out.size(); ++i)
    REQUIRE(out[i] == Catch::Approx(coeff[i]).margin(1e-12));
}

TEST_CASE("shrinkage reduces noise energy around a blocky signal", "[denoise]") {
  // Piecewise-constant target, additive noise; shrinking at the noise level
  // must move the image closer to the target.
  const int side = 32;
  const std::size_t n = static_cast<std::size_t>(side) * side;
  std::vector<double> target(n, 0.0);
  for (int r = 0; r < side; ++r)
    for (int c = 0; c < side; ++c)
      if (r < side / 2 && c >= side / 2)
        target[static_cast<std::size_t>(r) * side + c] = 4.0;

  const double sigma = 0.4;
  NormalStream s(12);
  std::vector<double> noisy = target;
  for (double& v : noisy)
    v += sigma * s.next();

  const Denoiser d = patchwise_shrinkage_denoiser(1.0);
  const std::vector<double> cleaned = d(noisy, sigma);
  double err_noisy = 0.0;
  double err_clean = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    err_noisy += (noisy[i] - target[i]) * (noisy[i] - target[i]);
    err_clean += (cleaned[i] - target[i]) * (cleaned[i] - target[i]);
  }
  REQUIRE(err_clean < 0.5 * err_noisy);
}
