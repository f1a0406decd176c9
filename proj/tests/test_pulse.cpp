#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>

#include "usir/pulse.hpp"

using namespace usir;

namespace {

// Spectrum magnitude of the sampled kernel at an arbitrary frequency.
double spectrum_at(const PulseKernel& k, double freq_hz) {
  std::complex<double> acc(0.0, 0.0);
  for (std::size_t n = 0; n < k.samples.size(); ++n) {
    const double phase = -2.0 * std::numbers::pi * freq_hz *
                         static_cast<double>(n) * k.sample_period_s;
    acc += k.samples[n] * std::polar(1.0, phase);
  }
  return std::abs(acc);
}

// Frequency where |X| crosses `level`, bracketed by [lo, hi].
double crossing(const PulseKernel& k, double lo, double hi, double level) {
  for (int it = 0; it < 80; ++it) {
    const double mid = 0.5 * (lo + hi);
    const bool above = spectrum_at(k, mid) > level;
    const bool lo_above = spectrum_at(k, lo) > level;
    if (above == lo_above)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

} // namespace

TEST_CASE("element positions are centered on the array", "[pulse]") {
  ProbeConfig probe;
  REQUIRE(probe.num_elements == 128);
  REQUIRE(probe.element_x_mm(0) == Catch::Approx(-19.05));
  REQUIRE(probe.element_x_mm(127) == Catch::Approx(19.05));
  REQUIRE(probe.element_x_mm(63) + probe.element_x_mm(64) ==
          Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("probe validation", "[pulse]") {
  ProbeConfig p;
  p.bandwidth_ratio = 1.5;
  REQUIRE_THROWS_AS(p.validate(), ValidationError);
  p = ProbeConfig{};
  p.element_pitch_mm = 0.0;
  REQUIRE_THROWS_AS(p.validate(), ValidationError);
  p = ProbeConfig{};
  p.num_elements = 0;
  REQUIRE_THROWS_AS(p.validate(), ValidationError);
  REQUIRE_NOTHROW(ProbeConfig{}.validate());
}

TEST_CASE("pulse peaks at its center and is symmetric", "[pulse]") {
  const PulseKernel k = build_pulse(ProbeConfig{});
  REQUIRE(k.samples.size() % 2 == 1);
  REQUIRE(k.center_index == static_cast<int>(k.samples.size() / 2));
  REQUIRE(k.samples[static_cast<std::size_t>(k.center_index)] == 1.0);
  for (int i = 0; i <= k.center_index; ++i)
    REQUIRE(k.samples[static_cast<std::size_t>(k.center_index - i)] ==
            Catch::Approx(k.samples[static_cast<std::size_t>(k.center_index + i)])
                .margin(1e-12));
  for (double v : k.samples)
    REQUIRE(std::abs(v) <= 1.0);
}

TEST_CASE("pulse support is truncated at the envelope floor", "[pulse]") {
  const ProbeConfig probe;
  const PulseKernel k = build_pulse(probe);
  const double width_hz = probe.bandwidth_ratio * probe.center_frequency_hz;
  const double sigma_t =
      std::sqrt(2.0 * std::numbers::ln2) / (std::numbers::pi * width_hz);
  // Last stored sample sits at the first sample index past the 1e-4 envelope
  // cut, so the envelope there is at or below 1e-4 within one sample period.
  const double t_last = k.half_support_s();
  const double envelope = std::exp(-0.5 * t_last * t_last / (sigma_t * sigma_t));
  REQUIRE(envelope <= 1.0001e-4);
  const double t_prev = t_last - k.sample_period_s;
  REQUIRE(std::exp(-0.5 * t_prev * t_prev / (sigma_t * sigma_t)) > 1e-4);
}

TEST_CASE("value_at performs nearest-sample lookup", "[pulse]") {
  const PulseKernel k = build_pulse(ProbeConfig{});
  const double dt = k.sample_period_s;
  REQUIRE(k.value_at(0.0) == 1.0);
  REQUIRE(k.value_at(0.4 * dt) == 1.0);
  REQUIRE(k.value_at(0.6 * dt) ==
          k.samples[static_cast<std::size_t>(k.center_index + 1)]);
  REQUIRE(k.value_at(-0.6 * dt) ==
          k.samples[static_cast<std::size_t>(k.center_index - 1)]);
  REQUIRE(k.value_at(k.half_support_s() + dt) == 0.0);
  REQUIRE(k.value_at(-k.half_support_s() - dt) == 0.0);
}

TEST_CASE("spectral -6 dB full width equals the bandwidth ratio", "[pulse]") {
  const ProbeConfig probe;
  const PulseKernel k = build_pulse(probe);
  const double f0 = probe.center_frequency_hz;

  const double peak = spectrum_at(k, f0);
  const double half = 0.5 * peak;
  const double lo_edge = crossing(k, f0 - 3.0e6, f0, half);
  const double hi_edge = crossing(k, f0, f0 + 3.0e6, half);

  const double expected_half_width = 0.5 * probe.bandwidth_ratio * f0;
  REQUIRE(f0 - lo_edge == Catch::Approx(expected_half_width).margin(1.5e4));
  REQUIRE(hi_edge - f0 == Catch::Approx(expected_half_width).margin(1.5e4));
}
