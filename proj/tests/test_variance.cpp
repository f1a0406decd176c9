#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstddef>
#include <vector>

#include "usir/random.hpp"
#include "usir/variance.hpp"

using namespace usir;

namespace {

ImageGrid tiny_grid() { return ImageGrid(2, 2, 0.0, 1.0, 0.0, 1.0); }

SampleEnsemble two_sample_ensemble() {
  const ImageGrid g = tiny_grid();
  SampleEnsemble ens;
  ens.samples.push_back(ReflectivityMap{g, {1.0, 2.0, -1.0, 0.0}});
  ens.samples.push_back(ReflectivityMap{g, {3.0, 2.0, 1.0, 4.0}});
  return ens;
}

} // namespace

TEST_CASE("ensemble mean averages elementwise", "[variance]") {
  const ReflectivityMap mean = drus_mean(two_sample_ensemble());
  REQUIRE(mean.values == std::vector<double>{2.0, 2.0, 0.0, 2.0});
}

TEST_CASE("variance estimator inverts the spread model", "[variance]") {
  // Samples {1, 3} per pixel: unbiased variance 2; with beta = 1/2 the
  // echogenicity estimate is variance^(1/(2 beta)) = 2.
  const ImageGrid g = tiny_grid();
  SampleEnsemble ens;
  ens.samples.push_back(ReflectivityMap{g, {1.0, 1.0, 1.0, 1.0}});
  ens.samples.push_back(ReflectivityMap{g, {3.0, 3.0, 3.0, 3.0}});
  const EchogenicityMap p = drus_var(ens, VarianceModelParams{});
  for (double v : p.values)
    REQUIRE(v == Catch::Approx(2.0).margin(1e-12));

  // beta = 1 takes the square root instead.
  VarianceModelParams beta1;
  beta1.beta = 1.0;
  const EchogenicityMap q = drus_var(ens, beta1);
  for (double v : q.values)
    REQUIRE(v == Catch::Approx(std::sqrt(2.0)).margin(1e-12));
}

TEST_CASE("welford stats match two-pass formulas", "[variance]") {
  NormalStream s(33);
  const std::size_t n = 5;
  const int count = 50;
  std::vector<std::vector<double>> samples;
  EnsembleStats stats(n);
  for (int c = 0; c < count; ++c) {
    std::vector<double> x(n);
    s.fill(x);
    samples.push_back(x);
    stats.accumulate(x);
  }
  REQUIRE(stats.count() == count);

  for (std::size_t i = 0; i < n; ++i) {
    double mean = 0.0;
    for (const auto& x : samples)
      mean += x[i];
    mean /= count;
    double m2 = 0.0;
    for (const auto& x : samples)
      m2 += (x[i] - mean) * (x[i] - mean);
    const double var = m2 / (count - 1);
    REQUIRE(stats.mean()[i] == Catch::Approx(mean).margin(1e-12));
    REQUIRE(stats.unbiased_variance()[i] == Catch::Approx(var).margin(1e-12));
  }
}

TEST_CASE("welford merge equals a single accumulation", "[variance]") {
  NormalStream s(34);
  const std::size_t n = 7;
  EnsembleStats whole(n);
  EnsembleStats part_a(n);
  EnsembleStats part_b(n);
  for (int c = 0; c < 31; ++c) {
    std::vector<double> x(n);
    s.fill(x);
    whole.accumulate(x);
    (c < 13 ? part_a : part_b).accumulate(x);
  }
  part_a.merge(part_b);
  REQUIRE(part_a.count() == whole.count());
  for (std::size_t i = 0; i < n; ++i) {
    REQUIRE(part_a.mean()[i] == Catch::Approx(whole.mean()[i]).margin(1e-12));
    REQUIRE(part_a.unbiased_variance()[i] ==
            Catch::Approx(whole.unbiased_variance()[i]).margin(1e-12));
  }
  // Merging into an empty accumulator copies.
  EnsembleStats empty(n);
  empty.merge(whole);
  REQUIRE(empty.count() == whole.count());
  REQUIRE(empty.mean() == whole.mean());
}

TEST_CASE("variance requires at least two samples", "[variance]") {
  const ImageGrid g = tiny_grid();
  SampleEnsemble one;
  one.samples.push_back(ReflectivityMap{g, {1.0, 2.0, 3.0, 4.0}});
  REQUIRE_NOTHROW(drus_mean(one));
  REQUIRE_THROWS_AS(drus_var(one, VarianceModelParams{}), ValidationError);
  SampleEnsemble none;
  REQUIRE_THROWS_AS(drus_mean(none), ValidationError);

  EnsembleStats stats(4);
  stats.accumulate({1.0, 2.0, 3.0, 4.0});
  REQUIRE_THROWS_AS(stats.unbiased_variance(), ValidationError);
}

TEST_CASE("ensembles must share one grid", "[variance]") {
  SampleEnsemble ens;
  ens.samples.push_back(ReflectivityMap{tiny_grid(), {1.0, 2.0, 3.0, 4.0}});
  ens.samples.push_back(ReflectivityMap{ImageGrid(2, 2, 0.0, 2.0, 0.0, 1.0),
                                        {1.0, 2.0, 3.0, 4.0}});
  REQUIRE_THROWS_AS(ens.validate(), DimensionError);
}

TEST_CASE("empirical samples are reproducible and separable in seeds",
          "[variance]") {
  const ImageGrid g(8, 8, 0.0, 7.0, 0.0, 7.0);
  std::vector<double> levels(64);
  for (std::size_t i = 0; i < 64; ++i)
    levels[i] = 0.25 + static_cast<double>(i % 5);
  const EchogenicityMap p(g, levels);
  const VarianceModelParams params;

  const ReflectivityMap a = empirical_sample(p, 1, params, 2);
  const ReflectivityMap b = empirical_sample(p, 1, params, 2);
  REQUIRE(a.values == b.values);

  // Same speckle, fresh stochastic term: differences are confined to the
  // additive part.
  const ReflectivityMap c = empirical_sample(p, 1, params, 3);
  NormalStream m_stream(1);
  NormalStream g2(2);
  NormalStream g3(3);
  for (std::size_t i = 0; i < 64; ++i) {
    const double m = m_stream.next();
    const double base = m * p.values[i];
    REQUIRE(a.values[i] == base + std::pow(p.values[i], 0.5) * g2.next());
    REQUIRE(c.values[i] == base + std::pow(p.values[i], 0.5) * g3.next());
  }
}

TEST_CASE("empirical moments match the spread model", "[variance]") {
  // For fixed m, samples o_c = m p + p^beta G have mean m p and variance
  // p^(2 beta). The variance estimator must recover p itself.
  const ImageGrid g = tiny_grid();
  const double level = 2.25;
  const EchogenicityMap p(g, std::vector<double>(4, level));
  const VarianceModelParams params; // beta = 1/2

  const int count = 10000;
  EnsembleStats stats(4);
  for (int c = 0; c < count; ++c)
    stats.accumulate(
        empirical_sample(p, 77, params, 1000 + static_cast<std::uint64_t>(c))
            .values);

  NormalStream m_stream(77);
  const EchogenicityMap est =
      drus_var_from_stats(stats, g, params);
  for (std::size_t i = 0; i < 4; ++i) {
    const double m = m_stream.next();
    // mean -> m p within 5 standard errors of the sample mean
    const double se_mean = std::pow(level, 0.5) / std::sqrt(double(count));
    REQUIRE(std::abs(stats.mean()[i] - m * level) < 5.0 * se_mean);
    // variance^(1/(2 beta)) -> p within 5 relative standard errors
    const double rel_se = std::sqrt(2.0 / count);
    REQUIRE(std::abs(est.values[i] - level) < 5.0 * level * rel_se);
  }
}

TEST_CASE("estimator tightens with ensemble size", "[variance]") {
  // Relative error of variance^(1/(2 beta)) scales like sqrt(2/C); check the
  // observed error shrinks along C = 10, 100, 10000 for most pixels.
  const ImageGrid g(4, 4, 0.0, 3.0, 0.0, 3.0);
  const double level = 1.5;
  const EchogenicityMap p(g, std::vector<double>(16, level));
  const VarianceModelParams params;

  double prev_rmse = -1.0;
  for (const int count : {10, 100, 10000}) {
    EnsembleStats stats(16);
    for (int c = 0; c < count; ++c)
      stats.accumulate(
          empirical_sample(p, 5, params, 40000 + static_cast<std::uint64_t>(c))
              .values);
    const EchogenicityMap est = drus_var_from_stats(stats, g, params);
    double rmse = 0.0;
    for (double v : est.values)
      rmse += (v - level) * (v - level);
    rmse = std::sqrt(rmse / 16.0) / level;
    if (prev_rmse >= 0.0)
      REQUIRE(rmse < prev_rmse);
    prev_rmse = rmse;
    // 5-sigma-ish band around the asymptotic relative error sqrt(1/(2C))
    // per pixel (delta method for the square root of a chi-square mean).
    REQUIRE(rmse < 5.0 * std::sqrt(1.0 / (2.0 * count)) + 0.05);
  }
}

TEST_CASE("db compression frozen values", "[variance]") {
  const std::vector<double> img = {1.0, 0.5, -0.25, 0.0, 1e-9};
  const std::vector<double> db = db_compress(img, 60.0);
  REQUIRE(db[0] == Catch::Approx(0.0).margin(1e-12));
  REQUIRE(db[1] == Catch::Approx(-6.020599913279624).margin(1e-9));
  REQUIRE(db[2] == Catch::Approx(-12.041199826559248).margin(1e-9));
  REQUIRE(db[3] == -60.0);  // exact zero maps to the floor
  REQUIRE(db[4] == -60.0);  // clipped
  REQUIRE(db_compress(std::vector<double>(5, 0.0), 40.0) ==
          std::vector<double>(5, -40.0));
  REQUIRE_THROWS_AS(db_compress(img, 0.0), ValidationError);
}
