#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include <Eigen/Core>

#include "uavrecon/disparity.hpp"
#include "uavrecon/geometry.hpp"
#include "uavrecon/image.hpp"
#include "uavrecon/rigid_transform.hpp"

namespace uavrecon {

/// Multi-octave value noise. Octave k has wavelength base_wavelength / 2^k
/// and amplitude persistence^k; the sum is normalised to [0, 1].
struct TextureParams {
  std::uint32_t seed = 7;
  int octaves = 5;
  double base_wavelength = 2.0;  // meters
  double persistence = 0.7;

  double operator()(double x, double y) const;
};

/// Square height field centred on the world origin. World axes: X east,
/// Y north, Z up.
struct SynthScene {
  int samples = 2;       // grid points per side
  double extent = 100.0;  // side length, meters
  std::vector<double> heights;  // samples x samples, row-major in Y then X
  TextureParams texture;

  static SynthScene flat(double extent, double height = 0.0, TextureParams texture = {});
  /// Smooth random bumps of up to roughly `amplitude` meters.
  static SynthScene hills(double extent, double amplitude, std::uint32_t seed, TextureParams texture = {});

  void validate() const;
  /// Bilinear height; NaN outside the extent.
  double height_at(double x, double y) const;
  double min_height() const;
  double max_height() const;
};

struct SynthFlight {
  double altitude = 100.0;   // meters above Z = 0
  double speed = 3.0;        // m/s
  double frame_rate = 60.0;  // Hz
  Eigen::Vector2d heading{1.0, 0.0};
  Eigen::Vector2d start{0.0, 0.0};
  int n_frames = 2;

  /// World -> camera pose of a nadir camera whose image x axis points along
  /// the heading.
  RigidTransform pose_at(int frame) const;
};

struct DepthMap {
  int width = 0;
  int height = 0;
  std::vector<double> depth;  // camera-frame z, meters
  double at(int x, int y) const {
    return depth[static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x)];
  }
};

struct RenderedSequence {
  std::vector<ImageGray> frames;
  std::vector<RigidTransform> truth_poses;  // world -> camera
  std::vector<DepthMap> truth_depths;
};

/// Ray-marches every pixel against the height field (bisection to 1e-4 m).
/// Throws std::runtime_error when a ray leaves the scene.
RenderedSequence render_sequence(const SynthScene& scene, const SynthFlight& flight,
                                 const Intrinsics& intr, int width, int height);

/// Renders a single frame; `depth` may be null.
ImageGray render_frame(const SynthScene& scene, const RigidTransform& world_to_camera,
                       const Intrinsics& intr, int width, int height, DepthMap* depth);

/// d = f_du B / z per pixel.
DisparityMap truth_disparity(const DepthMap& depth, const StereoRig& rig);

/// Writes frame_00000.pgm, frame_00001.pgm, ... into `dir`.
void write_sequence(const std::filesystem::path& dir, const RenderedSequence& seq);

}  // namespace uavrecon
