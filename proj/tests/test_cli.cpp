#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "usir/cli.hpp"
#include "usir/container.hpp"
#include "usir/png.hpp"

using namespace usir;

namespace {

struct CliResult {
  int code;
  std::string out;
  std::string err;
};

CliResult cli(const std::vector<std::string>& args) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p);
  out << text;
}

const char* kTinyIni =
    "[grid]\n"
    "width_px = 16\n"
    "depth_px = 16\n"
    "x_min_mm = -4\n"
    "x_max_mm = 4\n"
    "z_min_mm = 10\n"
    "z_max_mm = 18\n"
    "[phantom]\n"
    "kind = occlusion\n"
    "disk = 0 14 1.5 0\n"
    "[sampler]\n"
    "num_steps = 6\n"
    "ladder_length = 40\n"
    "denoiser = gaussian\n";

} // namespace

TEST_CASE("cli usage and help", "[cli]") {
  const CliResult help = cli({"--help"});
  REQUIRE(help.code == kExitOk);
  REQUIRE(help.out.find("phantom") != std::string::npos);
  REQUIRE(help.out.find("reconstruct") != std::string::npos);

  const CliResult sub_help = cli({"reconstruct", "--help"});
  REQUIRE(sub_help.code == kExitOk);
  REQUIRE(sub_help.out.find("--samples") != std::string::npos);

  REQUIRE(cli({}).code == kExitUsage);
  REQUIRE(cli({"bogus"}).code == kExitUsage);
  REQUIRE(cli({"phantom", "--frobnicate"}).code == kExitUsage);
  REQUIRE(cli({"phantom"}).code == kExitUsage); // --out is required
  REQUIRE(cli({"beamform", "--in", "x", "--out", "y", "--method", "zap"}).code ==
          kExitUsage);
}

TEST_CASE("cli maps error categories to exit codes", "[cli]") {
  namespace fs = std::filesystem;
  const fs::path base = fs::temp_directory_path() / "usir_cli_err";
  fs::remove_all(base);
  fs::create_directories(base);

  // Missing input file surfaces as an IO failure.
  const CliResult io = cli({"render", "--in", (base / "missing.usir").string(),
                            "--out", (base / "x.png").string()});
  REQUIRE(io.code == kExitIo);
  REQUIRE_FALSE(io.err.empty());

  // A malformed config is a validation-category failure.
  write_text(base / "bad.ini", "[grid]\nno equals sign\n");
  const CliResult bad =
      cli({"phantom", "--config", (base / "bad.ini").string(), "--out",
           (base / "p.usir").string()});
  REQUIRE(bad.code == kExitValidation);

  // A phantom spec that does not fit the grid is rejected the same way.
  write_text(base / "unfit.ini",
             "[grid]\nwidth_px = 16\ndepth_px = 16\nx_min_mm = -4\n"
             "x_max_mm = 4\nz_min_mm = 10\nz_max_mm = 18\n"
             "[phantom]\nkind = occlusion\ndisk = 0 14 30 0\n");
  const CliResult unfit =
      cli({"phantom", "--config", (base / "unfit.ini").string(), "--out",
           (base / "p.usir").string()});
  REQUIRE(unfit.code == kExitValidation);

  fs::remove_all(base);
}

TEST_CASE("cli pipeline runs end to end on a separable model", "[cli]") {
  namespace fs = std::filesystem;
  const fs::path base = fs::temp_directory_path() / "usir_cli_pipe";
  fs::remove_all(base);
  fs::create_directories(base);
  const std::string cfg = (base / "cfg.ini").string();
  write_text(cfg, kTinyIni);

  const CliResult ph =
      cli({"phantom", "--config", cfg, "--out", (base / "phantom.usir").string(),
           "--png", (base / "phantom.png").string()});
  REQUIRE(ph.code == kExitOk);
  REQUIRE(ph.out.find("phantom.usir") != std::string::npos);
  REQUIRE(fs::exists(base / "phantom.usir"));
  REQUIRE(fs::exists(base / "phantom.png"));

  const CliResult sp =
      cli({"speckle", "--config", cfg, "--in", (base / "phantom.usir").string(),
           "--out", (base / "refl.usir").string(), "--seed", "5"});
  REQUIRE(sp.code == kExitOk);
  // Same seed, same bytes.
  cli({"speckle", "--config", cfg, "--in", (base / "phantom.usir").string(),
       "--out", (base / "refl2.usir").string(), "--seed", "5"});
  REQUIRE(slurp(base / "refl.usir") == slurp(base / "refl2.usir"));

  const CliResult sim =
      cli({"simulate", "--config", cfg, "--in", (base / "refl.usir").string(),
           "--out", (base / "meas.usir").string(), "--noise-std", "0.05",
           "--seed", "7"});
  REQUIRE(sim.code == kExitOk);
  REQUIRE(read_container(base / "meas.usir").kind == ContainerKind::ImageMap);

  const CliResult rec = cli(
      {"reconstruct", "--config", cfg, "--in", (base / "meas.usir").string(),
       "--out-dir", (base / "recon").string(), "--noise-std", "0.05",
       "--samples", "3", "--steps", "5", "--seed", "9"});
  REQUIRE(rec.code == kExitOk);
  REQUIRE(rec.out.find("mean.usir") != std::string::npos);
  REQUIRE(rec.out.find("var.usir") != std::string::npos);
  REQUIRE(rec.out.find("ensemble.usir") != std::string::npos);
  const Container ens = read_container(base / "recon" / "ensemble.usir");
  REQUIRE(ens.kind == ContainerKind::Ensemble);
  REQUIRE(ens.dims == std::vector<std::uint32_t>{3, 16, 16});
  REQUIRE(fs::exists(base / "recon" / "mean.png"));
  REQUIRE(fs::exists(base / "recon" / "var.png"));

  // Reconstruction is reproducible for a fixed seed.
  cli({"reconstruct", "--config", cfg, "--in", (base / "meas.usir").string(),
       "--out-dir", (base / "recon2").string(), "--noise-std", "0.05",
       "--samples", "3", "--steps", "5", "--seed", "9"});
  REQUIRE(slurp(base / "recon" / "ensemble.usir") ==
          slurp(base / "recon2" / "ensemble.usir"));

  const CliResult met = cli(
      {"metrics", "--config", cfg, "--in", (base / "recon" / "var.usir").string()});
  REQUIRE(met.code == kExitOk);
  REQUIRE(met.out.rfind("metric\tregion\tvalue\n", 0) == 0);
  REQUIRE(met.out.find("gcnr\t0\t") != std::string::npos);
  REQUIRE(met.out.find("snr\t0\t") != std::string::npos);
  REQUIRE(met.out.find("gcnr\tmean\t") != std::string::npos);
  REQUIRE(met.out.find("snr\tstd\t") != std::string::npos);

  const CliResult ren =
      cli({"render", "--in", (base / "recon" / "mean.usir").string(), "--out",
           (base / "mean2.png").string(), "--dynamic-range", "50"});
  REQUIRE(ren.code == kExitOk);
  int w = 0;
  int h = 0;
  read_png_gray(base / "mean2.png", w, h);
  REQUIRE(w == 16);
  REQUIRE(h == 16);

  fs::remove_all(base);
}

TEST_CASE("cli simulates and beamforms through the dense model", "[cli]") {
  namespace fs = std::filesystem;
  const fs::path base = fs::temp_directory_path() / "usir_cli_dense";
  fs::remove_all(base);
  fs::create_directories(base);
  const std::string cfg = (base / "cfg.ini").string();
  write_text(cfg,
             "[grid]\n"
             "width_px = 12\n"
             "depth_px = 12\n"
             "x_min_mm = -2\n"
             "x_max_mm = 2\n"
             "z_min_mm = 8\n"
             "z_max_mm = 12\n"
             "[operator]\n"
             "kind = dense\n"
             "[probe]\n"
             "num_elements = 8\n"
             "element_pitch_mm = 0.5\n"
             "[phantom]\n"
             "kind = scatterer\n"
             "point = 0 10 1.5\n");

  REQUIRE(cli({"phantom", "--config", cfg, "--out",
               (base / "phantom.usir").string()})
              .code == kExitOk);
  const CliResult sim =
      cli({"simulate", "--config", cfg, "--in", (base / "phantom.usir").string(),
           "--out", (base / "rf.usir").string(), "--seed", "3"});
  REQUIRE(sim.code == kExitOk);
  REQUIRE(read_container(base / "rf.usir").kind == ContainerKind::RfData);

  for (const char* method : {"das", "matched"}) {
    const CliResult bf =
        cli({"beamform", "--config", cfg, "--in", (base / "rf.usir").string(),
             "--out", (base / "img.usir").string(), "--method", method});
    REQUIRE(bf.code == kExitOk);
    const Container img = read_container(base / "img.usir");
    REQUIRE(img.kind == ContainerKind::ImageMap);
    REQUIRE(img.dims == std::vector<std::uint32_t>{12, 12});
  }

  // An image container is not a valid RF input.
  const CliResult wrong =
      cli({"beamform", "--config", cfg, "--in", (base / "phantom.usir").string(),
           "--out", (base / "img2.usir").string()});
  REQUIRE(wrong.code == kExitValidation);

  fs::remove_all(base);
}

TEST_CASE("cli experiment subcommand writes the sweep outputs", "[cli]") {
  namespace fs = std::filesystem;
  const fs::path base = fs::temp_directory_path() / "usir_cli_exp";
  fs::remove_all(base);
  fs::create_directories(base);
  const std::string cfg = (base / "cfg.ini").string();
  write_text(cfg, kTinyIni);

  const CliResult exp =
      cli({"experiment", "--config", cfg, "--out-dir", (base / "out").string(),
           "--noise-std", "0.05", "--samples", "3", "--steps", "5", "--seed",
           "21"});
  REQUIRE(exp.code == kExitOk);
  REQUIRE(exp.out.find("metrics.tsv") != std::string::npos);
  REQUIRE(exp.out.find("summary.kv") != std::string::npos);
  REQUIRE(fs::exists(base / "out" / "metrics.tsv"));
  REQUIRE(fs::exists(base / "out" / "summary.kv"));
  REQUIRE(fs::exists(base / "out" / "phantom.usir"));

  fs::remove_all(base);
}
