#pragma once

#include <atomic>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "usir/beamformer.hpp"
#include "usir/config.hpp"
#include "usir/container.hpp"
#include "usir/ddrm.hpp"
#include "usir/denoisers.hpp"
#include "usir/grid.hpp"
#include "usir/metrics.hpp"
#include "usir/operators.hpp"
#include "usir/phantom.hpp"
#include "usir/png.hpp"
#include "usir/pulse.hpp"
#include "usir/simulate.hpp"
#include "usir/svd.hpp"
#include "usir/system_matrix.hpp"
#include "usir/variance.hpp"

namespace usir {

enum class PhantomKind { Occlusion, Scatterer };
enum class OperatorKind { Separable, Dense };
enum class DenoiserKind { Shrinkage, GaussianPrior };

/// PICMUS-style linear array: 128 elements at 0.3 mm pitch, 5.208 MHz
/// center frequency sampled at 20.8 MHz, 67% bandwidth ratio.
inline ProbeConfig default_linear_array() { return ProbeConfig{}; }

inline ImageGrid default_grid() {
  return ImageGrid(256, 256, -18.0, 18.0, 10.0, 46.0);
}

// -- config section parsers (shared by the CLI subcommands) -----------------

inline ImageGrid grid_from_config(const Config& cfg) {
  const ImageGrid d = default_grid();
  return ImageGrid(cfg.get_int_or("grid", "width_px", d.width_px),
                   cfg.get_int_or("grid", "depth_px", d.depth_px),
                   cfg.get_double_or("grid", "x_min_mm", d.x_min_mm),
                   cfg.get_double_or("grid", "x_max_mm", d.x_max_mm),
                   cfg.get_double_or("grid", "z_min_mm", d.z_min_mm),
                   cfg.get_double_or("grid", "z_max_mm", d.z_max_mm));
}

inline ProbeConfig probe_from_config(const Config& cfg) {
  ProbeConfig p = default_linear_array();
  p.num_elements = cfg.get_int_or("probe", "num_elements", p.num_elements);
  p.element_pitch_mm =
      cfg.get_double_or("probe", "element_pitch_mm", p.element_pitch_mm);
  p.center_frequency_hz =
      cfg.get_double_or("probe", "center_frequency_hz", p.center_frequency_hz);
  p.sampling_rate_hz =
      cfg.get_double_or("probe", "sampling_rate_hz", p.sampling_rate_hz);
  p.bandwidth_ratio =
      cfg.get_double_or("probe", "bandwidth_ratio", p.bandwidth_ratio);
  p.sound_speed_m_per_s =
      cfg.get_double_or("probe", "sound_speed_m_per_s", p.sound_speed_m_per_s);
  p.validate();
  return p;
}

inline ApodizationConfig apod_from_config(const Config& cfg) {
  ApodizationConfig a;
  a.tukey_alpha = cfg.get_double_or("apodization", "tukey_alpha", a.tukey_alpha);
  a.f_number = cfg.get_double_or("apodization", "f_number", a.f_number);
  a.validate();
  return a;
}

namespace detail {

inline std::vector<double> split_numbers(const std::string& text,
                                         const std::string& what) {
  std::istringstream in(text);
  std::vector<double> out;
  double v = 0.0;
  while (in >> v)
    out.push_back(v);
  if (!in.eof())
    throw ConfigError("config: cannot parse " + what + ": '" + text + "'");
  return out;
}

} // namespace detail

inline PhantomKind phantom_kind_from_config(const Config& cfg) {
  const std::string kind = cfg.get_string_or("phantom", "kind", "occlusion");
  if (kind == "occlusion")
    return PhantomKind::Occlusion;
  if (kind == "scatterer")
    return PhantomKind::Scatterer;
  throw ConfigError("config: unknown phantom kind '" + kind + "'");
}

inline OcclusionSpec occlusion_from_config(const Config& cfg,
                                           const ImageGrid& grid) {
  OcclusionSpec spec = default_occlusion_layout(
      grid, cfg.get_double_or("phantom", "radius_mm", 2.0),
      cfg.get_double_or("phantom", "background_level", 1.0));
  const double inside = cfg.get_double_or("phantom", "inside_level", 0.0);
  for (OcclusionSpec::Disk& d : spec.disks)
    d.inside_level = inside;
  if (cfg.has("phantom", "disk")) {
    spec.disks.clear();
    for (const std::string& line : cfg.get_list("phantom", "disk")) {
      const std::vector<double> f = detail::split_numbers(line, "disk");
      if (f.size() != 4)
        throw ConfigError("config: disk needs 'x z radius level'");
      spec.disks.push_back({f[0], f[1], f[2], f[3]});
    }
  }
  validate_spec(grid, spec);
  return spec;
}

inline ScattererSpec scatterer_from_config(const Config& cfg,
                                           const ImageGrid& grid) {
  ScattererSpec spec = default_scatterer_layout(
      grid, cfg.get_double_or("phantom", "amplitude", 1.0));
  spec.background_level = cfg.get_double_or("phantom", "background_level", 0.0);
  if (cfg.has("phantom", "point")) {
    spec.points.clear();
    for (const std::string& line : cfg.get_list("phantom", "point")) {
      const std::vector<double> f = detail::split_numbers(line, "point");
      if (f.size() != 3)
        throw ConfigError("config: point needs 'x z amplitude'");
      spec.points.push_back({f[0], f[1], f[2]});
    }
  }
  validate_spec(grid, spec);
  return spec;
}

struct ExperimentConfig {
  ImageGrid grid;
  PhantomKind phantom_kind = PhantomKind::Occlusion;
  OcclusionSpec occlusion;
  ScattererSpec scatterer;

  OperatorKind operator_kind = OperatorKind::Separable;
  double psf_sigma_mm = 0.17;
  ProbeConfig probe;
  ApodizationConfig apod;

  SamplerConfig sampler; // measurement_noise_std and seed filled per cell
  int ladder_length = kDefaultLadderLength;
  double sigma_min = kDefaultSigmaMin;
  DenoiserKind denoiser_kind = DenoiserKind::Shrinkage;
  double threshold_scale = 1.0;
  double prior_variance = 1.0;

  std::vector<double> noise_std;
  int num_samples = 10;
  VarianceModelParams variance;
  int num_speckle_seeds = 9;
  std::uint64_t base_seed = 20240915;
  double dynamic_range_db = 60.0;
  std::filesystem::path output_dir = "out";

  int num_bins = 256;
  RegionGeometry regions;
  double fwhm_search_mm = 1.0;

  explicit ExperimentConfig(ImageGrid g) : grid(g) {}

  void validate() const {
    if (noise_std.empty())
      throw ValidationError("experiment: noise_std list is empty");
    for (double n : noise_std)
      if (!(n >= 0.0))
        throw ValidationError("experiment: noise_std must be >= 0");
    if (num_samples < 2)
      throw ValidationError("experiment: need >= 2 samples per ensemble");
    if (num_speckle_seeds < 1)
      throw ValidationError("experiment: need >= 1 speckle seed");
    sampler.validate();
    variance.validate();
    if (!(dynamic_range_db > 0.0))
      throw ValidationError("experiment: dynamic range must be > 0");
  }

  static ExperimentConfig from_config(const Config& cfg) {
    ExperimentConfig ec(grid_from_config(cfg));
    ec.phantom_kind = phantom_kind_from_config(cfg);
    if (ec.phantom_kind == PhantomKind::Occlusion)
      ec.occlusion = occlusion_from_config(cfg, ec.grid);
    else
      ec.scatterer = scatterer_from_config(cfg, ec.grid);

    const std::string op = cfg.get_string_or("operator", "kind", "separable");
    if (op == "separable")
      ec.operator_kind = OperatorKind::Separable;
    else if (op == "dense")
      ec.operator_kind = OperatorKind::Dense;
    else
      throw ConfigError("config: unknown operator kind '" + op + "'");
    ec.psf_sigma_mm = cfg.get_double_or("operator", "sigma_mm", 0.17);
    ec.probe = probe_from_config(cfg);
    ec.apod = apod_from_config(cfg);

    ec.sampler.num_steps = cfg.get_int_or("sampler", "num_steps", 50);
    ec.sampler.eta = cfg.get_double_or("sampler", "eta", 0.85);
    ec.sampler.eta_b = cfg.get_double_or("sampler", "eta_b", 1.0);
    ec.ladder_length =
        cfg.get_int_or("sampler", "ladder_length", kDefaultLadderLength);
    ec.sigma_min = cfg.get_double_or("sampler", "sigma_min", kDefaultSigmaMin);
    const std::string den = cfg.get_string_or("sampler", "denoiser", "shrinkage");
    if (den == "shrinkage")
      ec.denoiser_kind = DenoiserKind::Shrinkage;
    else if (den == "gaussian")
      ec.denoiser_kind = DenoiserKind::GaussianPrior;
    else
      throw ConfigError("config: unknown denoiser '" + den + "'");
    ec.threshold_scale = cfg.get_double_or("sampler", "threshold_scale", 1.0);
    ec.prior_variance = cfg.get_double_or("sampler", "prior_variance", 1.0);

    if (cfg.has("experiment", "noise_std"))
      ec.noise_std = cfg.get_double_list("experiment", "noise_std");
    ec.num_samples = cfg.get_int_or("experiment", "num_samples", 10);
    ec.variance.beta = cfg.get_double_or("experiment", "beta", 0.5);
    ec.num_speckle_seeds = cfg.get_int_or("experiment", "num_speckle_seeds", 9);
    ec.base_seed = cfg.get_seed_or("experiment", "base_seed", ec.base_seed);
    ec.dynamic_range_db =
        cfg.get_double_or("experiment", "dynamic_range_db", 60.0);
    ec.output_dir = cfg.get_string_or("experiment", "output_dir", "out");

    ec.num_bins = cfg.get_int_or("metrics", "num_bins", 256);
    ec.regions.inside_radius_factor =
        cfg.get_double_or("metrics", "inside_factor", 0.9);
    ec.regions.outside_inner_factor =
        cfg.get_double_or("metrics", "outside_inner_factor", 1.25);
    ec.regions.outside_outer_factor =
        cfg.get_double_or("metrics", "outside_outer_factor", 1.6);
    ec.fwhm_search_mm = cfg.get_double_or("metrics", "fwhm_search_mm", 1.0);
    return ec;
  }

  [[nodiscard]] EchogenicityMap make_phantom() const {
    return phantom_kind == PhantomKind::Occlusion
               ? make_occlusion_phantom(grid, occlusion)
               : make_scatterer_phantom(grid, scatterer);
  }

  [[nodiscard]] Denoiser make_denoiser() const {
    return denoiser_kind == DenoiserKind::Shrinkage
               ? patchwise_shrinkage_denoiser(threshold_scale)
               : gaussian_prior_denoiser(prior_variance);
  }
};

/// Runs the sampler num_samples times on one measurement with per-sample
/// seeds derived from ensemble_seed; the schedule top is fitted to the
/// measurement.
inline SampleEnsemble reconstruct_ensemble(const SpectralVector& ybar,
                                           const SvdFactorization& f,
                                           const Denoiser& denoiser,
                                           SamplerConfig cfg, int ladder_length,
                                           double sigma_min, int num_samples,
                                           std::uint64_t ensemble_seed,
                                           const ImageGrid& grid) {
  const DiffusionSchedule schedule = make_schedule(
      ladder_length, suggest_sigma_max(ybar), sigma_min, cfg.num_steps);
  SampleEnsemble ens;
  ens.samples.reserve(static_cast<std::size_t>(num_samples));
  for (int c = 0; c < num_samples; ++c) {
    cfg.seed = NormalStream::derive(ensemble_seed, static_cast<std::uint64_t>(c));
    ens.samples.push_back(sample(ybar, f, denoiser, schedule, cfg, grid));
  }
  return ens;
}

struct MetricRow {
  double noise_std = 0.0;
  int speckle_index = 0;
  std::string estimator; // "by", "mean", "var"
  std::string metric;    // "gcnr", "snr", "fwhm_lat", "fwhm_ax"
  int region = 0;
  double value = 0.0;
};

struct CellFailure {
  double noise_std = 0.0;
  int speckle_index = 0;
  std::string message;
};

struct ExperimentReport {
  std::vector<MetricRow> rows;
  std::vector<CellFailure> failures;
  std::filesystem::path output_dir;
};

namespace detail {

inline std::string format_noise(double noise) {
  std::ostringstream s;
  s << noise;
  return s.str();
}

inline int worker_count_from_env() {
  if (const char* env = std::getenv("USIR_WORKERS")) {
    const int n = std::atoi(env);
    if (n >= 1)
      return n;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

/// Per-(noise, speckle) seeds, derived so cells are independent of each
/// other and of eventual extensions to the sweep.
struct CellSeeds {
  std::uint64_t speckle;
  std::uint64_t channel_noise;
  std::uint64_t ensemble;
};

inline CellSeeds cell_seeds(std::uint64_t base, int noise_index,
                            int speckle_index) {
  const std::uint64_t cell =
      static_cast<std::uint64_t>(noise_index) * 4096 +
      static_cast<std::uint64_t>(speckle_index);
  return CellSeeds{NormalStream::derive(base, cell * 4 + 1),
                   NormalStream::derive(base, cell * 4 + 2),
                   NormalStream::derive(base, cell * 4 + 3)};
}

inline std::vector<double> absolute(const std::vector<double>& v) {
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i)
    out[i] = std::abs(v[i]);
  return out;
}

} // namespace detail

/// Full sweep: for every noise level and speckle realization, simulate the
/// measurement, reconstruct an ensemble, form the ensemble-mean and
/// variance-based estimates plus the matched-filter baseline, score all
/// three, and write containers, PNGs, metrics.tsv and summary.kv under the
/// output directory. A failing cell is recorded and skipped; other cells
/// proceed.
inline ExperimentReport run_experiment(const ExperimentConfig& cfg,
                                       std::ostream& log) {
  cfg.validate();
  namespace fs = std::filesystem;
  fs::create_directories(cfg.output_dir);

  const EchogenicityMap phantom = cfg.make_phantom();
  write_container(cfg.output_dir / "phantom.usir",
                  image_container(cfg.grid, phantom.values));
  render_png(cfg.output_dir / "phantom.png", phantom.values, cfg.grid.width_px,
             cfg.grid.depth_px, cfg.dynamic_range_db);

  // operator and factorization, shared read-only by all cells
  std::optional<SeparableOperator> separable;
  std::optional<DenseOperator> dense_h;  // acquisition model H
  std::optional<DenseOperator> dense_b;  // matched-filter beamformer B
  std::optional<DenseOperator> dense_bh; // degradation B*H seen by the sampler
  ProbeConfig probe = cfg.probe;
  SvdFactorization factorization = [&] {
    if (cfg.operator_kind == OperatorKind::Separable) {
      bool under_resolved = false;
      separable.emplace(build_separable_psf(cfg.grid, cfg.psf_sigma_mm,
                                            cfg.probe.center_frequency_hz,
                                            cfg.probe.sound_speed_m_per_s,
                                            &under_resolved));
      if (under_resolved)
        log << "warning: PSF sigma below half the pixel pitch\n";
      return svd_separable(*separable);
    }
    if (cfg.grid.width_px > 128 || cfg.grid.depth_px > 128)
      log << "warning: dense operator beyond the documented 128x128 guidance\n";
    probe = with_derived_window(cfg.probe, cfg.grid);
    SystemMatrixBuildReport h_report;
    dense_h.emplace(build_system_matrix(probe, cfg.grid, &h_report));
    if (h_report.truncated_pixel_count > 0)
      log << "warning: " << h_report.truncated_pixel_count
          << " pixels truncated by the acquisition window\n";
    BeamformerBuildReport b_report;
    dense_b.emplace(build_beamformer(*dense_h, probe, cfg.grid, cfg.apod,
                                     &b_report));
    if (!b_report.zero_rows.empty())
      log << "warning: " << b_report.zero_rows.size()
          << " beamformer rows have an empty aperture\n";
    dense_bh.emplace(matmul(*dense_b, *dense_h));
    return svd_dense(*dense_bh);
  }();
  const Denoiser denoiser = cfg.make_denoiser();

  struct Cell {
    int noise_index;
    int speckle_index;
  };
  std::vector<Cell> cells;
  for (int ni = 0; ni < static_cast<int>(cfg.noise_std.size()); ++ni)
    for (int si = 0; si < cfg.num_speckle_seeds; ++si)
      cells.push_back({ni, si});

  ExperimentReport report;
  report.output_dir = cfg.output_dir;
  std::mutex report_mutex;
  std::atomic<std::size_t> next_cell{0};

  const auto run_cell = [&](const Cell& cell) {
    const double noise = cfg.noise_std[static_cast<std::size_t>(cell.noise_index)];
    const detail::CellSeeds seeds =
        detail::cell_seeds(cfg.base_seed, cell.noise_index, cell.speckle_index);
    const fs::path cell_dir =
        cfg.output_dir / ("n" + detail::format_noise(noise) + "_s" +
                          std::to_string(cell.speckle_index));
    fs::create_directories(cell_dir);

    const ReflectivityMap o = apply_multiplicative_noise(phantom, seeds.speckle);
    write_container(cell_dir / "reflectivity.usir",
                    image_container(cfg.grid, o.values));
    render_png(cell_dir / "reflectivity.png", o.values, cfg.grid.width_px,
               cfg.grid.depth_px, cfg.dynamic_range_db);

    // measurement and the matched-filter baseline image
    std::vector<double> y_img;
    if (cfg.operator_kind == OperatorKind::Separable) {
      y_img = separable->apply(o.values);
      if (noise > 0.0) {
        NormalStream stream(seeds.channel_noise);
        for (double& v : y_img)
          v += noise * stream.next();
      }
      write_container(cell_dir / "measurement.usir",
                      image_container(cfg.grid, y_img));
    } else {
      const RFChannelData rf =
          simulate_rf(*dense_h, probe, o, noise, seeds.channel_noise);
      write_container(cell_dir / "measurement.usir", rf_container(rf));
      y_img = dense_b->apply(rf.values);
    }
    write_container(cell_dir / "by.usir", image_container(cfg.grid, y_img));
    render_png(cell_dir / "by.png", y_img, cfg.grid.width_px, cfg.grid.depth_px,
               cfg.dynamic_range_db);

    SamplerConfig sampler_cfg = cfg.sampler;
    sampler_cfg.measurement_noise_std = noise;
    const SpectralVector ybar = to_spectral(factorization, y_img);
    const SampleEnsemble ens = reconstruct_ensemble(
        ybar, factorization, denoiser, sampler_cfg, cfg.ladder_length,
        cfg.sigma_min, cfg.num_samples, seeds.ensemble, cfg.grid);
    write_container(cell_dir / "ensemble.usir", ensemble_container(ens));

    const ReflectivityMap mean_img = drus_mean(ens);
    const EchogenicityMap var_img = drus_var(ens, cfg.variance);
    write_container(cell_dir / "mean.usir",
                    image_container(cfg.grid, mean_img.values));
    write_container(cell_dir / "var.usir",
                    image_container(cfg.grid, var_img.values));
    render_png(cell_dir / "mean.png", mean_img.values, cfg.grid.width_px,
               cfg.grid.depth_px, cfg.dynamic_range_db);
    render_png(cell_dir / "var.png", var_img.values, cfg.grid.width_px,
               cfg.grid.depth_px, cfg.dynamic_range_db);

    // score all estimators on linear amplitude
    const std::vector<std::pair<std::string, std::vector<double>>> estimators = {
        {"by", detail::absolute(y_img)},
        {"mean", detail::absolute(mean_img.values)},
        {"var", var_img.values}};
    std::vector<MetricRow> rows;
    for (const auto& [name, amp] : estimators) {
      if (cfg.phantom_kind == PhantomKind::Occlusion) {
        for (int d = 0; d < static_cast<int>(cfg.occlusion.disks.size()); ++d) {
          const OcclusionSpec::Disk& disk =
              cfg.occlusion.disks[static_cast<std::size_t>(d)];
          const RegionMask in = target_inside_mask(
              cfg.grid, disk.center_x_mm, disk.center_z_mm, disk.radius_mm,
              cfg.regions);
          const RegionMask out = target_outside_mask(
              cfg.grid, disk.center_x_mm, disk.center_z_mm, disk.radius_mm,
              cfg.regions);
          rows.push_back({noise, cell.speckle_index, name, "gcnr", d,
                          gcnr(amp, in, out, cfg.num_bins)});
          double snr_value = std::numeric_limits<double>::quiet_NaN();
          try {
            snr_value = snr(amp, out);
          } catch (const UndefinedMetricError&) {
          }
          rows.push_back({noise, cell.speckle_index, name, "snr", d, snr_value});
        }
      } else {
        for (int t = 0; t < static_cast<int>(cfg.scatterer.points.size()); ++t) {
          const ScattererSpec::Point& pt =
              cfg.scatterer.points[static_cast<std::size_t>(t)];
          for (const auto& [metric, axis] :
               {std::pair<const char*, ProfileAxis>{"fwhm_lat",
                                                    ProfileAxis::Lateral},
                std::pair<const char*, ProfileAxis>{"fwhm_ax",
                                                    ProfileAxis::Axial}}) {
            double width = std::numeric_limits<double>::quiet_NaN();
            try {
              width = fwhm(amp, cfg.grid, pt.x_mm, pt.z_mm, axis,
                           cfg.fwhm_search_mm);
            } catch (const UndefinedMetricError&) {
            }
            rows.push_back({noise, cell.speckle_index, name, metric, t, width});
          }
        }
      }
    }

    const std::scoped_lock lock(report_mutex);
    report.rows.insert(report.rows.end(), rows.begin(), rows.end());
    log << "cell n=" << noise << " s=" << cell.speckle_index << " done\n";
  };

  const int workers =
      std::min(detail::worker_count_from_env(), static_cast<int>(cells.size()));
  const auto worker_loop = [&] {
    while (true) {
      const std::size_t i = next_cell.fetch_add(1);
      if (i >= cells.size())
        return;
      const Cell& cell = cells[i];
      try {
        run_cell(cell);
      } catch (const std::exception& e) {
        const std::scoped_lock lock(report_mutex);
        report.failures.push_back(
            {cfg.noise_std[static_cast<std::size_t>(cell.noise_index)],
             cell.speckle_index, e.what()});
        log << "cell n="
            << cfg.noise_std[static_cast<std::size_t>(cell.noise_index)]
            << " s=" << cell.speckle_index << " failed: " << e.what() << "\n";
      }
    }
  };
  if (workers <= 1) {
    worker_loop();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w)
      pool.emplace_back(worker_loop);
    for (std::thread& t : pool)
      t.join();
  }

  // stable row order regardless of worker interleaving
  std::stable_sort(report.rows.begin(), report.rows.end(),
                   [](const MetricRow& a, const MetricRow& b) {
                     return std::tie(a.noise_std, a.speckle_index, a.estimator,
                                     a.metric, a.region) <
                            std::tie(b.noise_std, b.speckle_index, b.estimator,
                                     b.metric, b.region);
                   });

  std::ofstream tsv(cfg.output_dir / "metrics.tsv");
  tsv << "noise_std\tspeckle\testimator\tmetric\tregion\tvalue\n";
  tsv << std::setprecision(10);
  for (const MetricRow& r : report.rows)
    tsv << r.noise_std << '\t' << r.speckle_index << '\t' << r.estimator << '\t'
        << r.metric << '\t' << r.region << '\t' << r.value << '\n';

  // per (noise, estimator, metric) aggregate across regions and speckles
  std::ofstream kv(cfg.output_dir / "summary.kv");
  kv << std::setprecision(10);
  for (double noise : cfg.noise_std)
    for (const char* estimator : {"by", "mean", "var"})
      for (const char* metric : {"gcnr", "snr", "fwhm_lat", "fwhm_ax"}) {
        std::vector<double> values;
        for (const MetricRow& r : report.rows)
          if (r.noise_std == noise && r.estimator == estimator &&
              r.metric == metric)
            values.push_back(r.value);
        if (values.empty())
          continue;
        const MetricReport agg = make_metric_report(metric, values);
        const std::string key = std::string(metric) + "." + estimator + ".n" +
                                detail::format_noise(noise);
        kv << key << ".mean = " << agg.mean << '\n';
        kv << key << ".std = " << agg.stddev << '\n';
        kv << key << ".count = " << agg.values.size() << '\n';
      }

  if (!report.failures.empty()) {
    std::ofstream fail(cfg.output_dir / "failures.tsv");
    fail << "noise_std\tspeckle\terror\n";
    for (const CellFailure& f : report.failures)
      fail << f.noise_std << '\t' << f.speckle_index << '\t' << f.message
           << '\n';
  }
  return report;
}

} // namespace usir
