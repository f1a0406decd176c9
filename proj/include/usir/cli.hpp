#pragma once

#include <CLI11.hpp>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iomanip>
#include <limits>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "usir/experiment.hpp"

namespace usir {

/// Exit codes of the command-line front end.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitIo = 3;
inline constexpr int kExitValidation = 4;
inline constexpr int kExitNumerical = 5;

namespace detail {

inline Config load_config(const std::string& path) {
  return path.empty() ? Config::parse_string("") : Config::parse_file(path);
}

inline std::vector<double> image_from_container(const Container& c,
                                                const ImageGrid& grid,
                                                const char* what) {
  if (c.kind != ContainerKind::ImageMap && c.kind != ContainerKind::Mask)
    throw ValidationError(std::string(what) + ": input is not an image container");
  if (static_cast<int>(c.dims[0]) != grid.depth_px ||
      static_cast<int>(c.dims[1]) != grid.width_px)
    throw ValidationError(std::string(what) +
                          ": container dims do not match the configured grid");
  return c.payload;
}

/// Degradation operator plus measurement image for the reconstruct path.
struct ReconstructionInputs {
  SvdFactorization factorization;
  std::vector<double> measurement;
};

inline ReconstructionInputs
prepare_reconstruction(const ExperimentConfig& ec, const Container& input,
                       std::ostream& err) {
  if (ec.operator_kind == OperatorKind::Separable) {
    if (input.kind != ContainerKind::ImageMap)
      throw ValidationError(
          "reconstruct: separable operator expects an image measurement");
    bool under_resolved = false;
    const SeparableOperator op = build_separable_psf(
        ec.grid, ec.psf_sigma_mm, ec.probe.center_frequency_hz,
        ec.probe.sound_speed_m_per_s, &under_resolved);
    if (under_resolved)
      err << "warning: PSF sigma below half the pixel pitch\n";
    return {svd_separable(op),
            image_from_container(input, ec.grid, "reconstruct")};
  }
  if (input.kind != ContainerKind::RfData)
    throw ValidationError("reconstruct: dense operator expects an RF measurement");
  const ProbeConfig probe = with_derived_window(ec.probe, ec.grid);
  if (static_cast<int>(input.dims[0]) != probe.num_time_samples ||
      static_cast<int>(input.dims[1]) != probe.num_elements)
    throw ValidationError(
        "reconstruct: RF dims do not match the derived acquisition window");
  const DenseOperator h = build_system_matrix(probe, ec.grid);
  const DenseOperator b = build_beamformer(h, probe, ec.grid, ec.apod);
  const RFChannelData rf = rf_from_container(input, probe.sampling_rate_hz);
  return {svd_dense(matmul(b, h)), b.apply(rf.values)};
}

} // namespace detail

/// Parses and executes one CLI invocation. Results go to `out`, diagnostics
/// to `err`; the return value is the process exit code.
inline int run_cli(const std::vector<std::string>& args, std::ostream& out,
                   std::ostream& err) {
  CLI::App app{"Plane-wave ultrasound reconstruction via spectral diffusion "
               "restoration sampling"};
  app.require_subcommand(1);

  std::string config_path;
  std::string in_path;
  std::string out_path;
  std::string png_path;
  std::string out_dir = "out";
  std::string method = "das";
  std::uint64_t seed = 0;
  bool seed_given = false;
  int samples = -1;
  int steps = -1;
  double beta = -1.0;
  double eta = -1.0;
  double eta_b = -1.0;
  double noise_std = -1.0;
  double dynamic_range = 60.0;
  std::vector<double> noise_list;

  const auto add_config = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "configuration file");
  };

  CLI::App* phantom_cmd =
      app.add_subcommand("phantom", "synthesize an echogenicity phantom");
  add_config(phantom_cmd);
  phantom_cmd->add_option("--out", out_path, "output container")->required();
  phantom_cmd->add_option("--png", png_path, "also render a PNG");
  phantom_cmd->add_option("--dynamic-range", dynamic_range,
                          "dB range for the PNG");

  CLI::App* speckle_cmd = app.add_subcommand(
      "speckle", "modulate a phantom with multiplicative speckle");
  add_config(speckle_cmd);
  speckle_cmd->add_option("--in", in_path, "phantom container")->required();
  speckle_cmd->add_option("--out", out_path, "reflectivity container")
      ->required();
  speckle_cmd->add_option("--seed", seed, "speckle seed");

  CLI::App* simulate_cmd =
      app.add_subcommand("simulate", "apply the acquisition model with noise");
  add_config(simulate_cmd);
  simulate_cmd->add_option("--in", in_path, "reflectivity container")
      ->required();
  simulate_cmd->add_option("--out", out_path, "measurement container")
      ->required();
  simulate_cmd->add_option("--noise-std", noise_std, "channel noise std");
  simulate_cmd->add_option("--seed", seed, "noise seed");

  CLI::App* beamform_cmd = app.add_subcommand(
      "beamform", "image RF data (delay-and-sum or matched filter)");
  add_config(beamform_cmd);
  beamform_cmd->add_option("--in", in_path, "RF container")->required();
  beamform_cmd->add_option("--out", out_path, "image container")->required();
  beamform_cmd
      ->add_option("--method", method, "das or matched")
      ->check(CLI::IsMember({"das", "matched"}));

  CLI::App* reconstruct_cmd = app.add_subcommand(
      "reconstruct", "sample restorations and form mean/variance estimates");
  add_config(reconstruct_cmd);
  reconstruct_cmd->add_option("--in", in_path, "measurement container")
      ->required();
  reconstruct_cmd->add_option("--out-dir", out_dir, "output directory");
  reconstruct_cmd->add_option("--noise-std", noise_std,
                              "measurement noise std used by the sampler");
  reconstruct_cmd->add_option("--samples", samples, "ensemble size");
  reconstruct_cmd->add_option("--steps", steps, "sampler update count");
  reconstruct_cmd->add_option("--eta", eta, "stochasticity weight");
  reconstruct_cmd->add_option("--eta-b", eta_b, "measurement mixing weight");
  reconstruct_cmd->add_option("--beta", beta, "variance-model exponent");
  reconstruct_cmd->add_option("--seed", seed, "ensemble seed");
  reconstruct_cmd->add_option("--dynamic-range", dynamic_range,
                              "dB range for PNGs");

  CLI::App* metrics_cmd = app.add_subcommand(
      "metrics", "score an image against the configured phantom regions");
  add_config(metrics_cmd);
  metrics_cmd->add_option("--in", in_path, "image container")->required();

  CLI::App* render_cmd =
      app.add_subcommand("render", "log-compress a container to a PNG");
  render_cmd->add_option("--in", in_path, "image container")->required();
  render_cmd->add_option("--out", out_path, "PNG path")->required();
  render_cmd->add_option("--dynamic-range", dynamic_range, "dB range");

  CLI::App* experiment_cmd =
      app.add_subcommand("experiment", "run the full noise-sweep protocol");
  add_config(experiment_cmd);
  experiment_cmd->add_option("--out-dir", out_dir, "output directory");
  experiment_cmd->add_option("--seed", seed, "base seed");
  experiment_cmd->add_option("--samples", samples, "ensemble size");
  experiment_cmd->add_option("--steps", steps, "sampler update count");
  experiment_cmd->add_option("--eta", eta, "stochasticity weight");
  experiment_cmd->add_option("--eta-b", eta_b, "measurement mixing weight");
  experiment_cmd->add_option("--beta", beta, "variance-model exponent");
  experiment_cmd->add_option("--noise-std", noise_list,
                             "noise levels (overrides the config list)");
  experiment_cmd->add_option("--dynamic-range", dynamic_range, "dB range");

  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  argv.push_back("usir");
  for (const std::string& a : args)
    argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    const CLI::App* target = &app;
    while (!target->get_subcommands().empty())
      target = target->get_subcommands().front();
    out << target->help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n";
    return kExitUsage;
  }
  for (const CLI::App* cmd :
       {speckle_cmd, simulate_cmd, reconstruct_cmd, experiment_cmd})
    if (cmd->count("--seed") > 0)
      seed_given = true;

  try {
    const Config cfg = detail::load_config(config_path);

    if (*phantom_cmd) {
      const ImageGrid grid = grid_from_config(cfg);
      EchogenicityMap p = [&] {
        if (phantom_kind_from_config(cfg) == PhantomKind::Occlusion)
          return make_occlusion_phantom(grid, occlusion_from_config(cfg, grid));
        return make_scatterer_phantom(grid, scatterer_from_config(cfg, grid));
      }();
      write_container(out_path, image_container(grid, p.values));
      if (!png_path.empty())
        render_png(png_path, p.values, grid.width_px, grid.depth_px,
                   dynamic_range);
      out << out_path << "\n";
      return kExitOk;
    }

    if (*speckle_cmd) {
      const ImageGrid grid = grid_from_config(cfg);
      const Container c = read_container(in_path);
      EchogenicityMap p{grid, detail::image_from_container(c, grid, "speckle")};
      const ReflectivityMap o = apply_multiplicative_noise(p, seed);
      write_container(out_path, image_container(grid, o.values));
      out << out_path << "\n";
      return kExitOk;
    }

    if (*simulate_cmd) {
      ExperimentConfig ec = ExperimentConfig::from_config(cfg);
      const Container c = read_container(in_path);
      const ReflectivityMap o{
          ec.grid, detail::image_from_container(c, ec.grid, "simulate")};
      const double noise = noise_std >= 0.0 ? noise_std : 0.0;
      if (ec.operator_kind == OperatorKind::Separable) {
        const SeparableOperator op = build_separable_psf(
            ec.grid, ec.psf_sigma_mm, ec.probe.center_frequency_hz,
            ec.probe.sound_speed_m_per_s);
        std::vector<double> y = op.apply(o.values);
        if (noise > 0.0) {
          NormalStream stream(seed);
          for (double& v : y)
            v += noise * stream.next();
        }
        write_container(out_path, image_container(ec.grid, y));
      } else {
        const ProbeConfig probe = with_derived_window(ec.probe, ec.grid);
        const DenseOperator h = build_system_matrix(probe, ec.grid);
        write_container(out_path,
                        rf_container(simulate_rf(h, probe, o, noise, seed)));
      }
      out << out_path << "\n";
      return kExitOk;
    }

    if (*beamform_cmd) {
      ExperimentConfig ec = ExperimentConfig::from_config(cfg);
      const Container c = read_container(in_path);
      if (c.kind != ContainerKind::RfData)
        throw ValidationError("beamform: input is not an RF container");
      const ProbeConfig probe = with_derived_window(ec.probe, ec.grid);
      if (static_cast<int>(c.dims[0]) != probe.num_time_samples ||
          static_cast<int>(c.dims[1]) != probe.num_elements)
        throw ValidationError(
            "beamform: RF dims do not match the derived acquisition window");
      const RFChannelData rf = rf_from_container(c, probe.sampling_rate_hz);
      std::vector<double> img;
      if (method == "das") {
        img = das_beamform(rf, probe, ec.grid, ec.apod).values;
      } else {
        const DenseOperator h = build_system_matrix(probe, ec.grid);
        const DenseOperator b = build_beamformer(h, probe, ec.grid, ec.apod);
        img = b.apply(rf.values);
      }
      write_container(out_path, image_container(ec.grid, img));
      out << out_path << "\n";
      return kExitOk;
    }

    if (*reconstruct_cmd) {
      ExperimentConfig ec = ExperimentConfig::from_config(cfg);
      if (samples > 0)
        ec.num_samples = samples;
      if (steps > 0)
        ec.sampler.num_steps = steps;
      if (eta >= 0.0)
        ec.sampler.eta = eta;
      if (eta_b >= 0.0)
        ec.sampler.eta_b = eta_b;
      if (beta > 0.0)
        ec.variance.beta = beta;
      SamplerConfig sampler_cfg = ec.sampler;
      sampler_cfg.measurement_noise_std = noise_std >= 0.0 ? noise_std : 0.0;
      sampler_cfg.validate();

      const Container input = read_container(in_path);
      detail::ReconstructionInputs rec =
          detail::prepare_reconstruction(ec, input, err);
      const SpectralVector ybar = to_spectral(rec.factorization, rec.measurement);
      const std::uint64_t ensemble_seed = seed_given ? seed : ec.base_seed;
      const SampleEnsemble ens = reconstruct_ensemble(
          ybar, rec.factorization, ec.make_denoiser(), sampler_cfg,
          ec.ladder_length, ec.sigma_min, ec.num_samples, ensemble_seed,
          ec.grid);

      const std::filesystem::path dir(out_dir);
      std::filesystem::create_directories(dir);
      const ReflectivityMap mean_img = drus_mean(ens);
      const EchogenicityMap var_img = drus_var(ens, ec.variance);
      write_container(dir / "ensemble.usir", ensemble_container(ens));
      write_container(dir / "mean.usir",
                      image_container(ec.grid, mean_img.values));
      write_container(dir / "var.usir", image_container(ec.grid, var_img.values));
      render_png(dir / "mean.png", mean_img.values, ec.grid.width_px,
                 ec.grid.depth_px, dynamic_range);
      render_png(dir / "var.png", var_img.values, ec.grid.width_px,
                 ec.grid.depth_px, dynamic_range);
      out << (dir / "mean.usir").string() << "\n"
          << (dir / "var.usir").string() << "\n"
          << (dir / "ensemble.usir").string() << "\n";
      return kExitOk;
    }

    if (*metrics_cmd) {
      ExperimentConfig ec = ExperimentConfig::from_config(cfg);
      const Container c = read_container(in_path);
      std::vector<double> amp =
          detail::image_from_container(c, ec.grid, "metrics");
      for (double& v : amp)
        v = std::abs(v);

      out << "metric\tregion\tvalue\n" << std::setprecision(10);
      std::vector<std::pair<std::string, std::vector<double>>> collected;
      const auto emit = [&](const std::string& metric, int region, double v) {
        out << metric << '\t' << region << '\t' << v << '\n';
        for (auto& [name, values] : collected)
          if (name == metric) {
            values.push_back(v);
            return;
          }
        collected.push_back({metric, {v}});
      };
      if (ec.phantom_kind == PhantomKind::Occlusion) {
        for (int d = 0; d < static_cast<int>(ec.occlusion.disks.size()); ++d) {
          const OcclusionSpec::Disk& disk =
              ec.occlusion.disks[static_cast<std::size_t>(d)];
          const RegionMask in =
              target_inside_mask(ec.grid, disk.center_x_mm, disk.center_z_mm,
                                 disk.radius_mm, ec.regions);
          const RegionMask outside =
              target_outside_mask(ec.grid, disk.center_x_mm, disk.center_z_mm,
                                  disk.radius_mm, ec.regions);
          emit("gcnr", d, gcnr(amp, in, outside, ec.num_bins));
          double s = std::numeric_limits<double>::quiet_NaN();
          try {
            s = snr(amp, outside);
          } catch (const UndefinedMetricError&) {
          }
          emit("snr", d, s);
        }
      } else {
        for (int t = 0; t < static_cast<int>(ec.scatterer.points.size()); ++t) {
          const ScattererSpec::Point& pt =
              ec.scatterer.points[static_cast<std::size_t>(t)];
          for (const auto& [metric, axis] :
               {std::pair<const char*, ProfileAxis>{"fwhm_lat",
                                                    ProfileAxis::Lateral},
                std::pair<const char*, ProfileAxis>{"fwhm_ax",
                                                    ProfileAxis::Axial}}) {
            double w = std::numeric_limits<double>::quiet_NaN();
            try {
              w = fwhm(amp, ec.grid, pt.x_mm, pt.z_mm, axis, ec.fwhm_search_mm);
            } catch (const UndefinedMetricError&) {
            }
            emit(metric, t, w);
          }
        }
      }
      for (const auto& [name, values] : collected) {
        const MetricReport agg = make_metric_report(name, values);
        out << name << "\tmean\t" << agg.mean << '\n';
        out << name << "\tstd\t" << agg.stddev << '\n';
      }
      return kExitOk;
    }

    if (*render_cmd) {
      const Container c = read_container(in_path);
      if (c.kind != ContainerKind::ImageMap && c.kind != ContainerKind::Mask)
        throw ValidationError("render: input is not an image container");
      render_png(out_path, c.payload, static_cast<int>(c.dims[1]),
                 static_cast<int>(c.dims[0]), dynamic_range);
      out << out_path << "\n";
      return kExitOk;
    }

    if (*experiment_cmd) {
      ExperimentConfig ec = ExperimentConfig::from_config(cfg);
      if (seed_given)
        ec.base_seed = seed;
      if (samples > 0)
        ec.num_samples = samples;
      if (steps > 0)
        ec.sampler.num_steps = steps;
      if (eta >= 0.0)
        ec.sampler.eta = eta;
      if (eta_b >= 0.0)
        ec.sampler.eta_b = eta_b;
      if (beta > 0.0)
        ec.variance.beta = beta;
      if (!noise_list.empty())
        ec.noise_std = noise_list;
      if (experiment_cmd->count("--dynamic-range") > 0)
        ec.dynamic_range_db = dynamic_range;
      if (experiment_cmd->count("--out-dir") > 0)
        ec.output_dir = out_dir;
      const ExperimentReport report = run_experiment(ec, err);
      out << (report.output_dir / "metrics.tsv").string() << "\n"
          << (report.output_dir / "summary.kv").string() << "\n";
      if (!report.failures.empty()) {
        err << report.failures.size() << " cell(s) failed\n";
        return kExitFailure;
      }
      return kExitOk;
    }
  } catch (const IoError& e) {
    err << "io error: " << e.what() << "\n";
    return kExitIo;
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}

} // namespace usir
