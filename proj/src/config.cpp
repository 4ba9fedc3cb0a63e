#include "uavrecon/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "uavrecon/errors.hpp"

namespace uavrecon {

namespace {

struct Field {
  const char* key;
  std::function<void(PipelineConfig&, std::string_view)> set;
  std::function<std::string(const PipelineConfig&)> get;
};

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(std::string_view key, std::string_view text) {
  T value{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw ConfigError("invalid value '" + std::string(text) + "' for " + std::string(key));
  }
  return value;
}

std::string show(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}
std::string show(int v) { return std::to_string(v); }

template <typename T>
Field field(const char* key, T PipelineConfig::*member) {
  return {key, [=](PipelineConfig& c, std::string_view v) { c.*member = parse_number<T>(key, v); },
          [=](const PipelineConfig& c) { return show(c.*member); }};
}

template <typename S, typename T>
Field nested(const char* key, S PipelineConfig::*section, T S::*member) {
  return {key,
          [=](PipelineConfig& c, std::string_view v) { (c.*section).*member = parse_number<T>(key, v); },
          [=](const PipelineConfig& c) { return show((c.*section).*member); }};
}

const std::vector<Field>& fields() {
  static const std::vector<Field> all = {
      field("pair_gap", &PipelineConfig::pair_gap),
      field("pair_stride", &PipelineConfig::pair_stride),
      field("low_res_w", &PipelineConfig::low_res_w),
      field("low_res_h", &PipelineConfig::low_res_h),
      field("baseline", &PipelineConfig::baseline),
      field("frame_rate", &PipelineConfig::frame_rate),
      field("min_disparity", &PipelineConfig::min_disparity),
      field("pose.min_correspondences", &PipelineConfig::min_correspondences),
      field("pose.max_failures", &PipelineConfig::max_pose_failures),
      nested("camera.f_du", &PipelineConfig::camera, &Intrinsics::f_du),
      nested("camera.f_dv", &PipelineConfig::camera, &Intrinsics::f_dv),
      nested("camera.u0", &PipelineConfig::camera, &Intrinsics::u0),
      nested("camera.v0", &PipelineConfig::camera, &Intrinsics::v0),
      nested("camera.k1", &PipelineConfig::camera, &Intrinsics::k1),
      nested("camera.k2", &PipelineConfig::camera, &Intrinsics::k2),
      nested("camera.k3", &PipelineConfig::camera, &Intrinsics::k3),
      nested("bp.max_disparity", &PipelineConfig::bp, &BpParams::max_disparity),
      nested("bp.iterations", &PipelineConfig::bp, &BpParams::iterations),
      nested("bp.tau_data", &PipelineConfig::bp, &BpParams::tau_data),
      nested("bp.lambda", &PipelineConfig::bp, &BpParams::lambda),
      nested("bp.tau_smooth", &PipelineConfig::bp, &BpParams::tau_smooth),
      field("jbu.sigma_spatial_fullres", &PipelineConfig::jbu_sigma_spatial_full),
      nested("jbu.sigma_range", &PipelineConfig::jbu, &JbuParams::sigma_range),
      nested("jbu.radius", &PipelineConfig::jbu, &JbuParams::radius),
      nested("harris.k", &PipelineConfig::harris, &HarrisParams::k),
      nested("harris.window_sigma", &PipelineConfig::harris, &HarrisParams::window_sigma),
      nested("harris.threshold", &PipelineConfig::harris, &HarrisParams::threshold),
      nested("harris.relative_threshold", &PipelineConfig::harris, &HarrisParams::relative_threshold),
      nested("harris.grid_cols", &PipelineConfig::harris, &HarrisParams::grid_cols),
      nested("harris.grid_rows", &PipelineConfig::harris, &HarrisParams::grid_rows),
      nested("harris.max_per_cell", &PipelineConfig::harris, &HarrisParams::max_per_cell),
      nested("match.patch_radius", &PipelineConfig::match, &MatchParams::patch_radius),
      nested("match.search_radius", &PipelineConfig::match, &MatchParams::search_radius),
      nested("match.max_cost", &PipelineConfig::match, &MatchParams::max_cost),
      nested("icp.max_iterations", &PipelineConfig::icp, &IcpParams::max_iterations),
      nested("icp.max_pair_distance", &PipelineConfig::icp, &IcpParams::max_pair_distance),
      nested("icp.convergence_eps", &PipelineConfig::icp, &IcpParams::convergence_eps),
      nested("icp.subsample_stride", &PipelineConfig::icp, &IcpParams::subsample_stride),
  };
  return all;
}

}  // namespace

void PipelineConfig::validate() const {
  if (pair_gap < 1) throw ConfigError("pair_gap must be >= 1");
  if (pair_stride < 1) throw ConfigError("pair_stride must be >= 1");
  if (low_res_w < 1 || low_res_h < 1) throw ConfigError("low-res dimensions must be positive");
  if (!(baseline > 0.0)) throw ConfigError("baseline must be > 0");
  if (!(frame_rate > 0.0)) throw ConfigError("frame_rate must be > 0");
  if (!(min_disparity > 0.0)) throw ConfigError("min_disparity must be > 0");
  if (min_correspondences < 4) throw ConfigError("pose.min_correspondences must be >= 4");
  if (max_pose_failures < 0) throw ConfigError("pose.max_failures must be >= 0");
  if (!(jbu_sigma_spatial_full > 0.0)) throw ConfigError("jbu.sigma_spatial_fullres must be > 0");
  if (icp.max_iterations < 0) throw ConfigError("icp.max_iterations must be >= 0");
  try {
    camera.validate();
    bp.validate();
    jbu_for_scale(1).validate();
    harris.validate();
    match.validate();
    if (icp.max_iterations > 0) icp.validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
}

JbuParams PipelineConfig::jbu_for_scale(int scale) const {
  JbuParams p = jbu;
  p.scale = scale;
  p.sigma_spatial = jbu_sigma_spatial_full / scale;
  return p;
}

PipelineConfig parse_config(std::string_view text) {
  PipelineConfig cfg;
  std::set<std::string, std::less<>> seen;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    const std::string_view key = trim(line.substr(0, eq));
    const std::string_view value = trim(line.substr(eq + 1));
    const auto& all = fields();
    const auto it = std::find_if(all.begin(), all.end(), [&](const Field& f) { return key == f.key; });
    if (it == all.end()) throw ConfigError("unknown config key '" + std::string(key) + "'");
    if (!seen.insert(std::string(key)).second) {
      throw ConfigError("duplicate config key '" + std::string(key) + "'");
    }
    it->set(cfg, value);
  }
  cfg.validate();
  return cfg;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string format_config(const PipelineConfig& cfg) {
  std::string out;
  for (const auto& f : fields()) {
    out += f.key;
    out += " = ";
    out += f.get(cfg);
    out += '\n';
  }
  return out;
}

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const auto& f : fields()) keys.emplace_back(f.key);
  return keys;
}

}  // namespace uavrecon
