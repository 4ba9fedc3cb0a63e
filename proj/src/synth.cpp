#include "uavrecon/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>
#include <stdexcept>

#include "uavrecon/image_io.hpp"

namespace uavrecon {

namespace {

std::uint32_t hash_lattice(std::int64_t ix, std::int64_t iy, int octave, std::uint32_t seed) {
  std::uint64_t h = static_cast<std::uint64_t>(ix) * 0x9E3779B97F4A7C15ull;
  h ^= static_cast<std::uint64_t>(iy) * 0xC2B2AE3D27D4EB4Full + (h << 6) + (h >> 2);
  h ^= (static_cast<std::uint64_t>(octave) << 32) ^ seed;
  // splitmix64 finaliser
  h += 0x9E3779B97F4A7C15ull;
  h = (h ^ (h >> 30)) * 0xBF58476D1CE4E5B9ull;
  h = (h ^ (h >> 27)) * 0x94D049BB133111EBull;
  h ^= h >> 31;
  return static_cast<std::uint32_t>(h >> 32);
}

double fade(double t) { return t * t * t * (t * (t * 6.0 - 15.0) + 10.0); }

constexpr double kMarchStep = 0.1;     // meters along the ray
constexpr double kHitTolerance = 1e-4;  // meters

}  // namespace

double TextureParams::operator()(double x, double y) const {
  double sum = 0.0;
  double norm = 0.0;
  double amp = 1.0;
  double wavelength = base_wavelength;
  for (int o = 0; o < octaves; ++o) {
    const double fx = x / wavelength;
    const double fy = y / wavelength;
    const double x0 = std::floor(fx);
    const double y0 = std::floor(fy);
    const auto ix = static_cast<std::int64_t>(x0);
    const auto iy = static_cast<std::int64_t>(y0);
    const double tx = fade(fx - x0);
    const double ty = fade(fy - y0);
    constexpr double kInv = 1.0 / 4294967295.0;
    const double v00 = hash_lattice(ix, iy, o, seed) * kInv;
    const double v10 = hash_lattice(ix + 1, iy, o, seed) * kInv;
    const double v01 = hash_lattice(ix, iy + 1, o, seed) * kInv;
    const double v11 = hash_lattice(ix + 1, iy + 1, o, seed) * kInv;
    const double top = v00 + (v10 - v00) * tx;
    const double bottom = v01 + (v11 - v01) * tx;
    sum += amp * (top + (bottom - top) * ty);
    norm += amp;
    amp *= persistence;
    wavelength *= 0.5;
  }
  return sum / norm;
}

SynthScene SynthScene::flat(double extent, double height, TextureParams texture) {
  SynthScene s;
  s.samples = 2;
  s.extent = extent;
  s.heights.assign(4, height);
  s.texture = texture;
  s.validate();
  return s;
}

SynthScene SynthScene::hills(double extent, double amplitude, std::uint32_t seed, TextureParams texture) {
  SynthScene s;
  s.extent = extent;
  s.texture = texture;
  s.samples = std::max(2, static_cast<int>(std::ceil(extent / 0.25)) + 1);
  s.heights.assign(static_cast<std::size_t>(s.samples) * static_cast<std::size_t>(s.samples), 0.0);

  struct Bump {
    double x, y, sigma, height;
  };
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> pos(-0.5 * extent, 0.5 * extent);
  std::uniform_real_distribution<double> width(0.04 * extent, 0.12 * extent);
  std::uniform_real_distribution<double> amp(-amplitude, amplitude);
  const int count = 24;
  std::vector<Bump> bumps;
  for (int i = 0; i < count; ++i) bumps.push_back({pos(rng), pos(rng), width(rng), amp(rng)});

  const double spacing = extent / (s.samples - 1);
  for (int j = 0; j < s.samples; ++j) {
    for (int i = 0; i < s.samples; ++i) {
      const double x = -0.5 * extent + i * spacing;
      const double y = -0.5 * extent + j * spacing;
      double h = 0.0;
      for (const auto& b : bumps) {
        const double dx = x - b.x;
        const double dy = y - b.y;
        h += b.height * std::exp(-(dx * dx + dy * dy) / (2.0 * b.sigma * b.sigma));
      }
      s.heights[static_cast<std::size_t>(j * s.samples + i)] = h;
    }
  }
  s.validate();
  return s;
}

void SynthScene::validate() const {
  if (samples < 2 || heights.size() != static_cast<std::size_t>(samples) * static_cast<std::size_t>(samples)) {
    throw std::invalid_argument("height field grid is malformed");
  }
  if (!(extent > 0.0)) throw std::invalid_argument("scene extent must be positive");
  for (double h : heights) {
    if (!std::isfinite(h)) throw std::invalid_argument("height field contains non-finite values");
  }
}

double SynthScene::height_at(double x, double y) const {
  const double half = 0.5 * extent;
  if (!(x >= -half && x <= half && y >= -half && y <= half)) {
    return std::numeric_limits<double>::quiet_NaN();
  }
  const double spacing = extent / (samples - 1);
  const double gx = (x + half) / spacing;
  const double gy = (y + half) / spacing;
  const int i = std::min(static_cast<int>(gx), samples - 2);
  const int j = std::min(static_cast<int>(gy), samples - 2);
  const double tx = gx - i;
  const double ty = gy - j;
  auto h = [&](int a, int b) { return heights[static_cast<std::size_t>(b * samples + a)]; };
  const double top = h(i, j) * (1.0 - tx) + h(i + 1, j) * tx;
  const double bottom = h(i, j + 1) * (1.0 - tx) + h(i + 1, j + 1) * tx;
  return top * (1.0 - ty) + bottom * ty;
}

double SynthScene::min_height() const { return *std::min_element(heights.begin(), heights.end()); }
double SynthScene::max_height() const { return *std::max_element(heights.begin(), heights.end()); }

RigidTransform SynthFlight::pose_at(int frame) const {
  const Eigen::Vector2d h = heading.normalized();
  Eigen::Matrix3d cam_to_world;
  cam_to_world.col(0) = Eigen::Vector3d(h.x(), h.y(), 0.0);
  cam_to_world.col(1) = Eigen::Vector3d(h.y(), -h.x(), 0.0);
  cam_to_world.col(2) = Eigen::Vector3d(0.0, 0.0, -1.0);
  const Eigen::Vector2d xy = start + h * (speed * frame / frame_rate);
  const Eigen::Vector3d centre(xy.x(), xy.y(), altitude);
  RigidTransform pose;
  pose.R = cam_to_world.transpose();
  pose.T = -(pose.R * centre);
  return pose;
}

ImageGray render_frame(const SynthScene& scene, const RigidTransform& world_to_camera,
                       const Intrinsics& intr, int width, int height, DepthMap* depth) {
  intr.validate();
  const Eigen::Matrix3d cam_to_world = world_to_camera.R.transpose();
  const Eigen::Vector3d centre = -(cam_to_world * world_to_camera.T);
  const double h_lo = scene.min_height();
  const double h_hi = scene.max_height();
  ImageGray img(width, height);
  if (depth) {
    depth->width = width;
    depth->height = height;
    depth->depth.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), 0.0);
  }

  for (int v = 0; v < height; ++v) {
    for (int u = 0; u < width; ++u) {
      // Direction with unit camera-frame z, so the ray parameter is the depth.
      const Eigen::Vector3d ray =
          cam_to_world * Eigen::Vector3d((u - intr.u0) / intr.f_du, (v - intr.v0) / intr.f_dv, 1.0);
      if (!(ray.z() < 0.0)) throw std::runtime_error("camera must look down at the terrain");
      auto gap = [&](double t) {
        const Eigen::Vector3d p = centre + t * ray;
        return p.z() - scene.height_at(p.x(), p.y());
      };
      const double t_start = std::max(0.0, (centre.z() - h_hi) / -ray.z());
      const double t_end = (centre.z() - h_lo) / -ray.z();

      auto miss = [] {
        return std::runtime_error("ray misses the height field; scene too small for the field of view");
      };
      double lo = t_start;
      double g_lo = gap(lo);
      if (std::isnan(g_lo)) throw miss();
      double t = lo;
      if (g_lo > 0.0) {
        // March to the first sample at or below the surface, then bisect.
        double hi = lo;
        double g_hi = g_lo;
        while (g_hi > 0.0) {
          lo = hi;
          g_lo = g_hi;
          if (lo >= t_end) throw miss();
          hi = std::min(lo + kMarchStep, t_end);
          g_hi = gap(hi);
          if (std::isnan(g_hi)) throw miss();
        }
        while (hi - lo > kHitTolerance) {
          const double mid = 0.5 * (lo + hi);
          const double g = gap(mid);
          if (g > 0.0) {
            lo = mid;
            g_lo = g;
          } else {
            hi = mid;
            g_hi = g;
          }
        }
        // Secant step inside the final bracket.
        t = g_lo == g_hi ? hi : lo + (hi - lo) * g_lo / (g_lo - g_hi);
      }
      const Eigen::Vector3d hit = centre + t * ray;
      img(u, v) = scene.texture(hit.x(), hit.y());
      if (depth) depth->depth[static_cast<std::size_t>(v * width + u)] = t;
    }
  }
  return img;
}

RenderedSequence render_sequence(const SynthScene& scene, const SynthFlight& flight,
                                 const Intrinsics& intr, int width, int height) {
  scene.validate();
  if (!(flight.frame_rate > 0.0)) throw std::invalid_argument("frame rate must be positive");
  if (!(flight.altitude > scene.max_height())) {
    throw std::invalid_argument("flight altitude must exceed the highest terrain point");
  }
  if (flight.n_frames < 1) throw std::invalid_argument("need at least one frame");
  RenderedSequence seq;
  for (int i = 0; i < flight.n_frames; ++i) {
    const RigidTransform pose = flight.pose_at(i);
    DepthMap depth;
    seq.frames.push_back(render_frame(scene, pose, intr, width, height, &depth));
    seq.truth_poses.push_back(pose);
    seq.truth_depths.push_back(std::move(depth));
  }
  return seq;
}

DisparityMap truth_disparity(const DepthMap& depth, const StereoRig& rig) {
  DisparityMap out(depth.width, depth.height);
  for (int y = 0; y < depth.height; ++y) {
    for (int x = 0; x < depth.width; ++x) out.set(x, y, depth_to_disparity(depth.at(x, y), rig));
  }
  return out;
}

void write_sequence(const std::filesystem::path& dir, const RenderedSequence& seq) {
  std::filesystem::create_directories(dir);
  char name[32];
  for (std::size_t i = 0; i < seq.frames.size(); ++i) {
    std::snprintf(name, sizeof name, "frame_%05zu.pgm", i);
    write_pgm(dir / name, seq.frames[i]);
  }
}

}  // namespace uavrecon
