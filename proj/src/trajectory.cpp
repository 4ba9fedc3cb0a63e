#include "uavrecon/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "uavrecon/errors.hpp"

namespace uavrecon {

std::vector<TrajectorySample> trajectory_metrics(std::span<const RigidTransform> poses, double frame_dt,
                                                 std::span<const int> frame_indices) {
  if (poses.empty()) throw std::invalid_argument("trajectory needs at least one pose");
  if (!(frame_dt > 0.0)) throw std::invalid_argument("frame_dt must be positive");
  if (!frame_indices.empty() && frame_indices.size() != poses.size()) {
    throw std::invalid_argument("frame index list does not match pose list");
  }
  std::vector<TrajectorySample> out(poses.size());
  double travelled = 0.0;
  for (std::size_t i = 0; i < poses.size(); ++i) {
    TrajectorySample& s = out[i];
    s.frame_index = frame_indices.empty() ? static_cast<int>(i) : frame_indices[i];
    s.pose = poses[i];
    if (i > 0) {
      const double step = (poses[i].T - poses[i - 1].T).norm();
      s.speed = step / frame_dt;
      travelled += step;
    }
    s.cumulative_distance = travelled;
    if (i > 1) {
      const Eigen::Vector3d a = poses[i - 1].T - poses[i - 2].T;
      const Eigen::Vector3d b = poses[i].T - poses[i - 1].T;
      const double na = a.norm();
      const double nb = b.norm();
      if (na > 0.0 && nb > 0.0) {
        const double c = std::clamp(a.dot(b) / (na * nb), -1.0, 1.0);
        s.turn_angle = std::acos(c) * 180.0 / std::numbers::pi;
      }
    }
  }
  return out;
}

void write_trajectory(const std::filesystem::path& path, std::span<const TrajectorySample> samples) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  char buf[64];
  auto field = [&](double v) {
    std::snprintf(buf, sizeof buf, " %.9g", v);
    out << buf;
  };
  for (const auto& s : samples) {
    out << s.frame_index;
    for (int k = 0; k < 3; ++k) field(s.pose.T(k));
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) field(s.pose.R(r, c));
    }
    field(s.speed);
    field(s.cumulative_distance);
    field(s.turn_angle);
    out << '\n';
  }
  if (!out) throw IoError("failed writing " + path.string());
}

std::vector<TrajectorySample> read_trajectory(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<TrajectorySample> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    TrajectorySample s;
    ss >> s.frame_index;
    for (int k = 0; k < 3; ++k) ss >> s.pose.T(k);
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) ss >> s.pose.R(r, c);
    }
    ss >> s.speed >> s.cumulative_distance >> s.turn_angle;
    if (!ss) throw IoError("malformed trajectory line in " + path.string());
    out.push_back(s);
  }
  return out;
}

}  // namespace uavrecon
