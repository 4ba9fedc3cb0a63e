#pragma once

#include <array>
#include <filesystem>
#include <string>

#include "uavrecon/pipeline.hpp"

namespace uavrecon {

struct StageStats {
  double mean_ms = 0.0;
  double p95_ms = 0.0;
};

struct BenchReport {
  int pairs = 0;
  std::array<StageStats, kStageCount> stages{};
  StageStats per_pair;
  double wall_seconds = 0.0;
  double pairs_per_second = 0.0;
};

/// p95 uses the nearest-rank definition.
BenchReport summarize_timings(const PipelineSummary& summary);

/// Human-readable table.
std::string format_bench_table(const BenchReport& report);
/// `key=value` lines, e.g. `stage.stereo.mean_ms=12.5`.
std::string format_bench_kv(const BenchReport& report);

/// Runs the pipeline without writing outputs and summarizes its timings.
BenchReport bench(const std::filesystem::path& frame_dir, const PipelineConfig& cfg);

}  // namespace uavrecon
