#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "usir/errors.hpp"
#include "usir/grid.hpp"
#include "usir/random.hpp"

namespace usir {

struct VarianceModelParams {
  double beta = 0.5;

  void validate() const {
    if (!(beta > 0.0))
      throw ValidationError("VarianceModelParams: beta must be > 0");
  }
};

/// C restored reflectivity samples sharing one grid.
struct SampleEnsemble {
  std::vector<ReflectivityMap> samples;

  void validate() const {
    if (samples.empty())
      throw ValidationError("SampleEnsemble: no samples");
    for (const ReflectivityMap& s : samples)
      if (!s.grid.same_shape(samples.front().grid))
        throw DimensionError("SampleEnsemble: samples on different grids");
  }
};

/// Streaming per-pixel mean and unbiased variance (Welford), for ensembles
/// too large to hold in memory at once.
class EnsembleStats {
public:
  explicit EnsembleStats(std::size_t pixel_count)
      : mean_(pixel_count, 0.0), m2_(pixel_count, 0.0) {}

  void accumulate(const std::vector<double>& sample) {
    if (sample.size() != mean_.size())
      throw DimensionError("EnsembleStats: sample length mismatch");
    ++count_;
    for (std::size_t i = 0; i < sample.size(); ++i) {
      const double delta = sample[i] - mean_[i];
      mean_[i] += delta / static_cast<double>(count_);
      m2_[i] += delta * (sample[i] - mean_[i]);
    }
  }

  /// Merge of two disjoint accumulations (parallel reduction).
  void merge(const EnsembleStats& other) {
    if (other.mean_.size() != mean_.size())
      throw DimensionError("EnsembleStats: merge length mismatch");
    if (other.count_ == 0)
      return;
    if (count_ == 0) {
      *this = other;
      return;
    }
    const double na = static_cast<double>(count_);
    const double nb = static_cast<double>(other.count_);
    for (std::size_t i = 0; i < mean_.size(); ++i) {
      const double delta = other.mean_[i] - mean_[i];
      mean_[i] += delta * nb / (na + nb);
      m2_[i] += other.m2_[i] + delta * delta * na * nb / (na + nb);
    }
    count_ += other.count_;
  }

  [[nodiscard]] long count() const { return count_; }
  [[nodiscard]] const std::vector<double>& mean() const { return mean_; }

  [[nodiscard]] std::vector<double> unbiased_variance() const {
    if (count_ < 2)
      throw ValidationError("EnsembleStats: variance needs >= 2 samples");
    std::vector<double> var(m2_.size());
    for (std::size_t i = 0; i < m2_.size(); ++i)
      var[i] = m2_[i] / static_cast<double>(count_ - 1);
    return var;
  }

private:
  long count_ = 0;
  std::vector<double> mean_;
  std::vector<double> m2_;
};

inline EnsembleStats accumulate_ensemble(const SampleEnsemble& ens) {
  ens.validate();
  EnsembleStats stats(ens.samples.front().values.size());
  for (const ReflectivityMap& s : ens.samples)
    stats.accumulate(s.values);
  return stats;
}

/// Elementwise ensemble average.
inline ReflectivityMap drus_mean(const SampleEnsemble& ens) {
  ens.validate();
  const EnsembleStats stats = accumulate_ensemble(ens);
  return ReflectivityMap{ens.samples.front().grid, stats.mean()};
}

/// Echogenicity estimate from ensemble spread: the unbiased per-pixel
/// sample variance raised to 1/(2 beta).
inline EchogenicityMap drus_var_from_stats(const EnsembleStats& stats,
                                           const ImageGrid& grid,
                                           const VarianceModelParams& params) {
  params.validate();
  std::vector<double> p = stats.unbiased_variance();
  const double inv = 1.0 / (2.0 * params.beta);
  for (double& v : p)
    v = std::pow(v, inv);
  return EchogenicityMap{grid, std::move(p)};
}

inline EchogenicityMap drus_var(const SampleEnsemble& ens,
                                const VarianceModelParams& params) {
  ens.validate();
  if (ens.samples.size() < 2)
    throw ValidationError("drus_var: need >= 2 samples");
  return drus_var_from_stats(accumulate_ensemble(ens),
                             ens.samples.front().grid, params);
}

/// One draw from the empirical stochasticity model
///   o_c = m * p + p^beta * G_c
/// with m (the speckle realization) seeded separately from G_c so one m can
/// be shared across an ensemble while each sample gets fresh G_c.
inline ReflectivityMap empirical_sample(const EchogenicityMap& p,
                                        std::uint64_t m_seed,
                                        const VarianceModelParams& params,
                                        std::uint64_t c_seed) {
  params.validate();
  NormalStream m_stream(m_seed);
  NormalStream g_stream(c_seed);
  std::vector<double> out(p.values.size());
  for (std::size_t i = 0; i < p.values.size(); ++i) {
    const double m = m_stream.next();
    const double g = g_stream.next();
    out[i] = m * p.values[i] + std::pow(p.values[i], params.beta) * g;
  }
  return ReflectivityMap{p.grid, std::move(out)};
}

/// Log compression for display: 20 log10(|v| / max|v|) clipped to
/// [-dynamic_range_db, 0]. An all-zero image maps to the floor.
inline std::vector<double> db_compress(const std::vector<double>& img,
                                       double dynamic_range_db) {
  if (!(dynamic_range_db > 0.0))
    throw ValidationError("db_compress: dynamic range must be > 0");
  double peak = 0.0;
  for (double v : img)
    peak = std::max(peak, std::abs(v));
  std::vector<double> out(img.size(), -dynamic_range_db);
  if (peak == 0.0)
    return out;
  for (std::size_t i = 0; i < img.size(); ++i) {
    const double mag = std::abs(img[i]);
    if (mag > 0.0)
      out[i] = std::clamp(20.0 * std::log10(mag / peak), -dynamic_range_db, 0.0);
  }
  return out;
}

} // namespace usir
