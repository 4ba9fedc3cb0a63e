#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "uavrecon/bench.hpp"
#include "uavrecon/config.hpp"
#include "uavrecon/pipeline.hpp"
#include "uavrecon/synth.hpp"
#include "uavrecon/trajectory.hpp"

namespace fs = std::filesystem;
using namespace uavrecon;

namespace {

struct SynthOptions {
  std::string scene = "hills";
  int frames = 101;
  fs::path out;
  int width = 640;
  int height = 360;
  double focal = 800.0;
  double altitude = 30.0;
  double speed = 3.0;
  double frame_rate = 60.0;
  double amplitude = 3.0;
  unsigned seed = 7;
};

int run_synth(const SynthOptions& o) {
  const Intrinsics intr{o.focal, o.focal, 0.5 * o.width - 0.5, 0.5 * o.height - 0.5, 0.0, 0.0, 0.0};
  SynthFlight flight;
  flight.altitude = o.altitude;
  flight.speed = o.speed;
  flight.frame_rate = o.frame_rate;
  flight.n_frames = o.frames;
  const double travel = o.speed * (o.frames - 1) / o.frame_rate;
  flight.start = {-0.5 * travel, 0.0};

  const double footprint = std::hypot(o.width, o.height) * o.altitude / o.focal;
  const double extent = footprint + travel + 10.0;
  TextureParams texture;
  texture.seed = o.seed;
  const SynthScene scene = o.scene == "flat" ? SynthScene::flat(extent, 0.0, texture)
                                             : SynthScene::hills(extent, o.amplitude, o.seed, texture);

  const RenderedSequence seq = render_sequence(scene, flight, intr, o.width, o.height);
  write_sequence(o.out, seq);

  PipelineConfig cfg;
  cfg.camera = intr;
  cfg.frame_rate = o.frame_rate;
  cfg.baseline = o.speed * cfg.pair_gap / o.frame_rate;
  cfg.low_res_w = o.width / 2;
  cfg.low_res_h = o.height / 2;
  std::FILE* f = std::fopen((o.out / "config.txt").string().c_str(), "w");
  if (!f) throw std::runtime_error("cannot write config.txt");
  std::fputs(format_config(cfg).c_str(), f);
  std::fclose(f);

  std::vector<RigidTransform> cam_to_world;
  for (const auto& p : seq.truth_poses) cam_to_world.push_back(p.inverse());
  write_trajectory(o.out / "truth_trajectory.txt", trajectory_metrics(cam_to_world, 1.0 / o.frame_rate));
  std::cout << "wrote " << seq.frames.size() << " frames to " << o.out.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Near-real-time 3D reconstruction from monocular aerial video"};
  app.require_subcommand(1);

  fs::path frames_dir, config_path, out_dir;
  bool ascii = false;
  auto* run = app.add_subcommand("run", "Reconstruct a frame directory");
  run->add_option("--frames", frames_dir, "Directory of .pgm/.ppm frames")->required();
  run->add_option("--config", config_path, "Configuration file")->required();
  run->add_option("--out", out_dir, "Output directory")->required();
  run->add_flag("--ascii-ply", ascii, "Write ASCII PLY instead of binary");

  SynthOptions so;
  auto* synth = app.add_subcommand("synth", "Render a synthetic nadir flight");
  synth->add_option("--scene", so.scene, "Terrain")->check(CLI::IsMember({"flat", "hills"}));
  synth->add_option("--frames", so.frames, "Number of frames")->required()->check(CLI::PositiveNumber);
  synth->add_option("--out", so.out, "Output directory")->required();
  synth->add_option("--width", so.width, "Image width")->check(CLI::PositiveNumber);
  synth->add_option("--height", so.height, "Image height")->check(CLI::PositiveNumber);
  synth->add_option("--focal", so.focal, "Focal length in pixels")->check(CLI::PositiveNumber);
  synth->add_option("--altitude", so.altitude, "Flight altitude, meters")->check(CLI::PositiveNumber);
  synth->add_option("--speed", so.speed, "Ground speed, m/s")->check(CLI::NonNegativeNumber);
  synth->add_option("--frame-rate", so.frame_rate, "Frames per second")->check(CLI::PositiveNumber);
  synth->add_option("--amplitude", so.amplitude, "Hill height, meters")->check(CLI::NonNegativeNumber);
  synth->add_option("--seed", so.seed, "Terrain and texture seed");

  auto* bench_cmd = app.add_subcommand("bench", "Time the pipeline on a frame directory");
  bench_cmd->add_option("--frames", frames_dir, "Directory of .pgm/.ppm frames")->required();
  bench_cmd->add_option("--config", config_path, "Configuration file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*run) {
      const PipelineConfig cfg = load_config(config_path);
      RunOptions opts;
      opts.ascii_ply = ascii;
      const PipelineSummary s = run_pipeline(frames_dir, cfg, out_dir, opts);
      std::cout << s.trajectory.size() << " pairs, " << s.combined_points << " points, "
                << s.wall_seconds << " s\n";
    } else if (*synth) {
      fs::create_directories(so.out);
      return run_synth(so);
    } else if (*bench_cmd) {
      const BenchReport r = bench(frames_dir, load_config(config_path));
      std::cout << format_bench_table(r) << "\n" << format_bench_kv(r);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
