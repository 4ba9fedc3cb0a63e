#pragma once

#include <array>
#include <filesystem>
#include <string_view>
#include <utility>
#include <vector>

#include "uavrecon/config.hpp"
#include "uavrecon/disparity.hpp"
#include "uavrecon/geometry.hpp"
#include "uavrecon/image.hpp"
#include "uavrecon/rigid_transform.hpp"
#include "uavrecon/trajectory.hpp"

namespace uavrecon {

enum class Stage : int {
  Load,
  Undistort,
  Downsample,
  Stereo,
  Upsample,
  Triangulate,
  Features,
  Pose,
  Icp,
  Output,
};

inline constexpr std::size_t kStageCount = 10;
inline constexpr std::array<std::string_view, kStageCount> kStageNames = {
    "load", "undistort", "downsample", "stereo", "upsample", "triangulate", "features", "pose", "icp", "output"};

struct StageTimings {
  std::array<double, kStageCount> ms{};

  double& operator[](Stage s) { return ms[static_cast<std::size_t>(s)]; }
  double operator[](Stage s) const { return ms[static_cast<std::size_t>(s)]; }
  double total() const;
};

enum class PoseSource { Anchor, Epnp, Extrapolated };

struct PairResult {
  int pair_index = 0;
  int left_frame = 0;
  int right_frame = 0;
  // Both clouds live in the rig-centre frame of the pair: the camera frame
  // shifted to halfway between the left and right optical centres.
  PointCloud low_cloud;
  PointCloud full_cloud;
  RigidTransform pose;  // pair frame -> world
  PoseSource pose_source = PoseSource::Anchor;
  int correspondences_left = 0;
  int correspondences_right = 0;
  double icp_rms = 0.0;
  DisparityMap low_disparity;
  DisparityMap full_disparity;  // full-resolution pixel units
  ImageGray left_gray;           // undistorted, full resolution
  ImageGray right_gray;
  StageTimings timings;
};

/// (i, i + pair_gap) for i = 0, stride, 2 stride, ... while i + gap < count.
std::vector<std::pair<int, int>> pair_frames(int frame_count, const PipelineConfig& cfg);

/// Stereo half of the pipeline for one virtual pair. The pose is left at
/// identity; run_pipeline chains it.
PairResult process_pair(const ImageRgb& left, const ImageRgb& right, const PipelineConfig& cfg,
                        int pair_index = 0);

/// Sorted .pgm / .ppm files of a directory.
std::vector<std::filesystem::path> list_frames(const std::filesystem::path& frame_dir);

struct RunOptions {
  bool ascii_ply = false;
  bool write_outputs = true;
  /// Keep every PairResult (with images and disparity maps) in the summary.
  bool keep_pairs = false;
};

struct PipelineSummary {
  std::vector<PairResult> pairs;  // only filled with keep_pairs
  std::vector<StageTimings> pair_timings;
  std::vector<TrajectorySample> trajectory;
  std::vector<PoseSource> pose_sources;
  std::vector<std::size_t> pair_point_counts;
  std::size_t combined_points = 0;
  double wall_seconds = 0.0;
};

/// Empty `out_dir` or write_outputs = false skips writing files.
PipelineSummary run_pipeline(const std::filesystem::path& frame_dir, const PipelineConfig& cfg,
                             const std::filesystem::path& out_dir, const RunOptions& options = {});

}  // namespace uavrecon
