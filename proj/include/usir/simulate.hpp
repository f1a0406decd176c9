#pragma once

#include <vector>

#include "usir/errors.hpp"
#include "usir/grid.hpp"
#include "usir/operators.hpp"
#include "usir/pulse.hpp"
#include "usir/random.hpp"

namespace usir {

/// Forward acquisition y = H o + n with i.i.d. Gaussian channel noise of
/// the given standard deviation. The RF layout matches the system-matrix
/// row order (element-major, K samples per element).
inline RFChannelData simulate_rf(const DenseOperator& h,
                                 const ProbeConfig& probe,
                                 const ReflectivityMap& o, double noise_std,
                                 std::uint64_t seed) {
  probe.validate();
  if (noise_std < 0.0)
    throw ValidationError("simulate_rf: noise std must be >= 0");
  if (h.rows != probe.num_elements * probe.num_time_samples)
    throw DimensionError("simulate_rf: H rows inconsistent with probe");
  if (h.cols != static_cast<int>(o.values.size()))
    throw DimensionError("simulate_rf: H cols inconsistent with reflectivity");

  std::vector<double> y = h.apply(o.values);
  if (noise_std > 0.0) {
    NormalStream stream(seed);
    for (double& v : y)
      v += noise_std * stream.next();
  }
  return RFChannelData{probe.num_elements, probe.num_time_samples,
                       probe.sampling_rate_hz, std::move(y)};
}

} // namespace usir
