#include "uavrecon/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <cstdio>
#include <fstream>
#include <optional>
#include <random>

#include "uavrecon/bench.hpp"
#include "uavrecon/epnp.hpp"
#include "uavrecon/errors.hpp"
#include "uavrecon/harris.hpp"
#include "uavrecon/icp.hpp"
#include "uavrecon/image_io.hpp"
#include "uavrecon/jbu.hpp"
#include "uavrecon/matching.hpp"
#include "uavrecon/ply.hpp"
#include "uavrecon/stereo.hpp"

namespace uavrecon {

double StageTimings::total() const {
  double sum = 0.0;
  for (double v : ms) sum += v;
  return sum;
}

namespace {

using Clock = std::chrono::steady_clock;

class StageTimer {
 public:
  StageTimer(StageTimings& t, Stage s) : timings_(t), stage_(s), start_(Clock::now()) {}
  ~StageTimer() {
    timings_[stage_] += std::chrono::duration<double, std::milli>(Clock::now() - start_).count();
  }
  StageTimer(const StageTimer&) = delete;
  StageTimer& operator=(const StageTimer&) = delete;

 private:
  StageTimings& timings_;
  Stage stage_;
  Clock::time_point start_;
};

/// Per-resolution state shared by all pairs of a run.
struct RunGeometry {
  int width = 0;
  int height = 0;
  int scale = 1;
  bool distorted = false;
  UndistortMap undistort;
  StereoRig full_rig;
  StereoRig low_rig;
  JbuParams jbu;
};

RunGeometry make_geometry(const PipelineConfig& cfg, int width, int height) {
  if (width % cfg.low_res_w != 0 || height % cfg.low_res_h != 0) {
    throw ConfigError("low-res size " + std::to_string(cfg.low_res_w) + "x" + std::to_string(cfg.low_res_h) +
                      " does not divide frame size " + std::to_string(width) + "x" + std::to_string(height));
  }
  const int sx = width / cfg.low_res_w;
  const int sy = height / cfg.low_res_h;
  if (sx != sy) throw ConfigError("low-res size must shrink both axes by the same factor");
  RunGeometry g;
  g.width = width;
  g.height = height;
  g.scale = sx;
  g.distorted = cfg.camera.has_distortion();
  if (g.distorted) g.undistort = build_undistort_map(cfg.camera, width, height);
  g.full_rig = {cfg.camera.undistorted(), cfg.baseline};
  g.low_rig = {g.full_rig.intr.scaled_down(sx, sy), cfg.baseline};
  g.jbu = cfg.jbu_for_scale(sx);
  return g;
}

void shift_to_rig_centre(PointCloud& cloud, double baseline) {
  for (auto& p : cloud.points) p.x() -= 0.5 * baseline;
}

std::string pair_label(int index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "pair_%04d", index);
  return buf;
}

PairResult process_with(const RunGeometry& g, const ImageRgb& left, const ImageRgb& right,
                        const PipelineConfig& cfg, int pair_index, StageTimings timings) {
  if (left.width() != right.width() || left.height() != right.height()) {
    throw DimensionError("left and right frames differ in size");
  }
  if (left.width() != g.width || left.height() != g.height) {
    throw DimensionError("frame size differs from the first frame of the run");
  }
  PairResult r;
  r.pair_index = pair_index;
  r.timings = timings;

  ImageRgb left_rgb;
  {
    StageTimer t(r.timings, Stage::Undistort);
    if (g.distorted) {
      left_rgb = remap_bilinear(left, g.undistort);
      r.right_gray = to_gray(remap_bilinear(right, g.undistort));
    } else {
      left_rgb = left;
      r.right_gray = to_gray(right);
    }
    r.left_gray = to_gray(left_rgb);
  }

  ImageGray low_left, low_right;
  {
    StageTimer t(r.timings, Stage::Downsample);
    low_left = downsample_area(r.left_gray, cfg.low_res_w, cfg.low_res_h);
    low_right = downsample_area(r.right_gray, cfg.low_res_w, cfg.low_res_h);
  }
  {
    StageTimer t(r.timings, Stage::Stereo);
    r.low_disparity = match_stereo(low_left, low_right, cfg.bp);
  }
  {
    StageTimer t(r.timings, Stage::Upsample);
    r.full_disparity = jbu_upsample(r.low_disparity, r.left_gray, g.jbu);
    for (std::size_t i = 0; i < r.full_disparity.disp.size(); ++i) r.full_disparity.disp[i] *= g.scale;
  }
  {
    StageTimer t(r.timings, Stage::Triangulate);
    const std::string label = pair_label(pair_index);
    r.low_cloud = disparity_to_points(r.low_disparity, nullptr, g.low_rig, cfg.min_disparity / g.scale, label);
    r.full_cloud = disparity_to_points(r.full_disparity, &left_rgb, g.full_rig, cfg.min_disparity, label);
    shift_to_rig_centre(r.low_cloud, cfg.baseline);
    shift_to_rig_centre(r.full_cloud, cfg.baseline);
  }
  return r;
}

constexpr int kRansacIterations = 64;
constexpr std::size_t kRansacSample = 6;
constexpr double kInlierPixels = 2.0;
constexpr std::uint32_t kRansacSeed = 20240611u;

PnpProblem subset(const PnpProblem& prob, const std::vector<std::size_t>& ids) {
  PnpProblem out{{}, {}, prob.intr};
  for (std::size_t i : ids) {
    out.world_points.push_back(prob.world_points[i]);
    out.image_points.push_back(prob.image_points[i]);
  }
  return out;
}

std::vector<std::size_t> inliers_of(const PnpProblem& prob, const RigidTransform& pose) {
  std::vector<std::size_t> ids;
  const Intrinsics& k = prob.intr;
  for (std::size_t i = 0; i < prob.world_points.size(); ++i) {
    const Eigen::Vector3d c = pose.apply(prob.world_points[i]);
    if (!(c.z() > 0.0)) continue;
    const double du = k.f_du * c.x() / c.z() + k.u0 - prob.image_points[i].u;
    const double dv = k.f_dv * c.y() / c.z() + k.v0 - prob.image_points[i].v;
    if (du * du + dv * dv <= kInlierPixels * kInlierPixels) ids.push_back(i);
  }
  return ids;
}

// EPnP inside a fixed-seed RANSAC loop over minimal samples, then EPnP and
// reprojection-error refinement on the consensus set.
std::optional<RigidTransform> solve_pose(const PnpProblem& prob, int min_points) {
  const std::size_t n = prob.world_points.size();
  if (static_cast<int>(n) < min_points || n < kRansacSample) return std::nullopt;
  std::mt19937 rng(kRansacSeed);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  std::vector<std::size_t> best;
  for (int it = 0; it < kRansacIterations; ++it) {
    std::vector<std::size_t> sample;
    while (sample.size() < kRansacSample) {
      const std::size_t i = pick(rng);
      if (std::find(sample.begin(), sample.end(), i) == sample.end()) sample.push_back(i);
    }
    try {
      auto ids = inliers_of(prob, epnp_solve(subset(prob, sample)));
      if (ids.size() > best.size()) best = std::move(ids);
    } catch (const DegenerateError&) {
    } catch (const SolveError&) {
    }
  }
  if (static_cast<int>(best.size()) < min_points) return std::nullopt;
  try {
    PnpProblem consensus = subset(prob, best);
    RigidTransform pose = refine_pose(consensus, epnp_solve(consensus));
    const auto ids = inliers_of(prob, pose);
    if (static_cast<int>(ids.size()) >= min_points && ids != best) pose = refine_pose(subset(prob, ids), pose);
    return pose;
  } catch (const DegenerateError&) {
    return std::nullopt;
  } catch (const SolveError&) {
    return std::nullopt;
  }
}

struct PoseEstimate {
  std::optional<RigidTransform> prev_to_current;  // previous pair frame -> current pair frame
  int left_count = 0;
  int right_count = 0;
};

PoseEstimate estimate_motion(const PairResult& prev, const PairResult& cur, const RunGeometry& g,
                             const PipelineConfig& cfg, StageTimings& timings) {
  std::vector<Corner> anchored;
  std::vector<Eigen::Vector3d> anchors;
  CorrespondenceSet to_left, to_right;
  {
    StageTimer t(timings, Stage::Features);
    for (const Corner& c : harris_detect(prev.left_gray, cfg.harris)) {
      if (!prev.full_disparity.is_valid(c.u, c.v)) continue;
      const double d = prev.full_disparity.at(c.u, c.v);
      if (d < cfg.min_disparity) continue;
      Eigen::Vector3d p = triangulate_pixel(c.u, c.v, d, g.full_rig);
      p.x() -= 0.5 * cfg.baseline;
      anchored.push_back(c);
      anchors.push_back(p);
    }
    to_left = match_corners(prev.left_gray, anchored, cur.left_gray, cfg.match);
    to_right = match_corners(prev.left_gray, anchored, cur.right_gray, cfg.match);
  }

  StageTimer t(timings, Stage::Pose);
  const auto problem = [&](const CorrespondenceSet& set) {
    PnpProblem prob{{}, {}, g.full_rig.intr};
    for (const auto& m : set.pairs) {
      prob.world_points.push_back(anchors[m.corner_index]);
      prob.image_points.push_back({static_cast<double>(m.u2), static_cast<double>(m.v2)});
    }
    return prob;
  };
  const PnpProblem left_problem = problem(to_left);
  const PnpProblem right_problem = problem(to_right);

  PoseEstimate est;
  est.left_count = static_cast<int>(left_problem.world_points.size());
  est.right_count = static_cast<int>(right_problem.world_points.size());
  const auto left_pose = solve_pose(left_problem, cfg.min_correspondences);
  const auto right_pose = solve_pose(right_problem, cfg.min_correspondences);
  if (!left_pose || !right_pose) return est;
  try {
    est.prev_to_current = average_poses(*left_pose, *right_pose);
  } catch (const DegenerateError&) {
  }
  return est;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path.string() + " for writing");
  f << text;
  if (!f) throw IoError("failed writing " + path.string());
}

}  // namespace

std::vector<std::pair<int, int>> pair_frames(int frame_count, const PipelineConfig& cfg) {
  if (cfg.pair_gap < 1 || cfg.pair_stride < 1) throw ConfigError("pair_gap and pair_stride must be >= 1");
  if (frame_count <= cfg.pair_gap) {
    throw std::invalid_argument("need more than " + std::to_string(cfg.pair_gap) + " frames, got " +
                                std::to_string(frame_count));
  }
  std::vector<std::pair<int, int>> pairs;
  for (int i = 0; i + cfg.pair_gap < frame_count; i += cfg.pair_stride) pairs.emplace_back(i, i + cfg.pair_gap);
  return pairs;
}

PairResult process_pair(const ImageRgb& left, const ImageRgb& right, const PipelineConfig& cfg, int pair_index) {
  cfg.validate();
  if (left.width() != right.width() || left.height() != right.height()) {
    throw DimensionError("left and right frames differ in size");
  }
  const RunGeometry g = make_geometry(cfg, left.width(), left.height());
  return process_with(g, left, right, cfg, pair_index, {});
}

std::vector<std::filesystem::path> list_frames(const std::filesystem::path& frame_dir) {
  if (!std::filesystem::is_directory(frame_dir)) throw IoError("not a directory: " + frame_dir.string());
  std::vector<std::filesystem::path> frames;
  for (const auto& entry : std::filesystem::directory_iterator(frame_dir)) {
    if (!entry.is_regular_file()) continue;
    const auto ext = entry.path().extension();
    if (ext == ".pgm" || ext == ".ppm") frames.push_back(entry.path());
  }
  std::sort(frames.begin(), frames.end(),
            [](const auto& a, const auto& b) { return a.filename().string() < b.filename().string(); });
  return frames;
}

PipelineSummary run_pipeline(const std::filesystem::path& frame_dir, const PipelineConfig& cfg,
                             const std::filesystem::path& out_dir, const RunOptions& options) {
  const auto run_start = Clock::now();
  cfg.validate();
  const auto frames = list_frames(frame_dir);
  const auto pairs = pair_frames(static_cast<int>(frames.size()), cfg);
  const bool write = options.write_outputs && !out_dir.empty();
  if (write) std::filesystem::create_directories(out_dir);
  const PlyFormat format = options.ascii_ply ? PlyFormat::Ascii : PlyFormat::BinaryLittleEndian;

  PipelineSummary summary;
  PointCloud combined;
  combined.frame = "world";
  std::vector<RigidTransform> poses;
  std::vector<int> indices;
  std::optional<RunGeometry> geometry;
  std::optional<PairResult> prev;
  RigidTransform last_step = RigidTransform::identity();  // current pair frame -> previous pair frame
  int failures = 0;

  for (std::size_t k = 0; k < pairs.size(); ++k) {
    StageTimings timings;
    ImageRgb left, right;
    {
      StageTimer t(timings, Stage::Load);
      left = read_color_frame(frames[static_cast<std::size_t>(pairs[k].first)]);
      right = read_color_frame(frames[static_cast<std::size_t>(pairs[k].second)]);
    }
    if (!geometry) geometry = make_geometry(cfg, left.width(), left.height());
    PairResult cur = process_with(*geometry, left, right, cfg, static_cast<int>(k), timings);
    cur.left_frame = pairs[k].first;
    cur.right_frame = pairs[k].second;

    if (prev) {
      const PoseEstimate est = estimate_motion(*prev, cur, *geometry, cfg, cur.timings);
      cur.correspondences_left = est.left_count;
      cur.correspondences_right = est.right_count;
      RigidTransform step;
      if (est.prev_to_current) {
        step = est.prev_to_current->inverse();
        cur.pose_source = PoseSource::Epnp;
        failures = 0;
      } else {
        if (++failures > cfg.max_pose_failures) {
          throw SolveError("pose lost at pair " + std::to_string(k) + " after " + std::to_string(failures) +
                           " consecutive failures");
        }
        step = last_step;
        cur.pose_source = PoseSource::Extrapolated;
      }
      if (cfg.icp.max_iterations > 0 && !cur.low_cloud.empty() && !prev->low_cloud.empty()) {
        StageTimer t(cur.timings, Stage::Icp);
        try {
          const IcpResult icp = icp_register(cur.low_cloud, prev->low_cloud, step, cfg.icp);
          step = icp.transform;
          cur.icp_rms = icp.rms;
        } catch (const SolveError&) {
        }
      }
      last_step = step;
      cur.pose = prev->pose * step;
    }

    PointCloud world_cloud = cur.full_cloud;
    world_cloud.frame = "world";
    for (auto& p : world_cloud.points) p = cur.pose.apply(p);
    {
      StageTimer t(cur.timings, Stage::Output);
      if (write) write_ply(world_cloud, out_dir / (pair_label(static_cast<int>(k)) + ".ply"), format);
    }
    combined.points.insert(combined.points.end(), world_cloud.points.begin(), world_cloud.points.end());
    combined.colors.insert(combined.colors.end(), world_cloud.colors.begin(), world_cloud.colors.end());

    poses.push_back(cur.pose);
    indices.push_back(cur.left_frame);
    summary.pair_timings.push_back(cur.timings);
    summary.pose_sources.push_back(cur.pose_source);
    summary.pair_point_counts.push_back(cur.full_cloud.size());
    if (options.keep_pairs) summary.pairs.push_back(cur);
    prev = std::move(cur);
  }

  summary.combined_points = combined.size();
  summary.trajectory = trajectory_metrics(poses, cfg.pair_stride / cfg.frame_rate, indices);
  if (write) {
    write_ply(combined, out_dir / "combined.ply", format);
    write_trajectory(out_dir / "trajectory.txt", summary.trajectory);
  }
  summary.wall_seconds = std::chrono::duration<double>(Clock::now() - run_start).count();
  if (write) {
    const BenchReport report = summarize_timings(summary);
    write_text(out_dir / "timings.txt", format_bench_kv(report));
  }
  return summary;
}

}  // namespace uavrecon
