#include "uavrecon/bench.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <vector>

namespace uavrecon {

namespace {

StageStats stats_of(std::vector<double> values) {
  StageStats s;
  if (values.empty()) return s;
  s.mean_ms = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  std::sort(values.begin(), values.end());
  const auto rank = static_cast<std::size_t>(std::ceil(0.95 * static_cast<double>(values.size())));
  s.p95_ms = values[std::max<std::size_t>(rank, 1) - 1];
  return s;
}

std::string fmt(const char* format, auto... args) {
  char buf[160];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

}  // namespace

BenchReport summarize_timings(const PipelineSummary& summary) {
  BenchReport r;
  r.pairs = static_cast<int>(summary.pair_timings.size());
  for (std::size_t s = 0; s < kStageCount; ++s) {
    std::vector<double> v;
    for (const auto& t : summary.pair_timings) v.push_back(t.ms[s]);
    r.stages[s] = stats_of(std::move(v));
  }
  std::vector<double> totals;
  for (const auto& t : summary.pair_timings) totals.push_back(t.total());
  r.per_pair = stats_of(std::move(totals));
  r.wall_seconds = summary.wall_seconds;
  r.pairs_per_second = r.wall_seconds > 0.0 ? r.pairs / r.wall_seconds : 0.0;
  return r;
}

std::string format_bench_table(const BenchReport& r) {
  std::string out = fmt("%-12s %12s %12s\n", "stage", "mean [ms]", "p95 [ms]");
  for (std::size_t s = 0; s < kStageCount; ++s) {
    out += fmt("%-12s %12.3f %12.3f\n", std::string(kStageNames[s]).c_str(), r.stages[s].mean_ms, r.stages[s].p95_ms);
  }
  out += fmt("%-12s %12.3f %12.3f\n", "pair", r.per_pair.mean_ms, r.per_pair.p95_ms);
  out += fmt("pairs: %d   wall: %.3f s   throughput: %.3f pairs/s\n", r.pairs, r.wall_seconds, r.pairs_per_second);
  out += "reference figures (GPU desktop): 25 frames/s video, pose estimation > 100 Hz\n";
  return out;
}

std::string format_bench_kv(const BenchReport& r) {
  std::string out;
  for (std::size_t s = 0; s < kStageCount; ++s) {
    const std::string name(kStageNames[s]);
    out += fmt("stage.%s.mean_ms=%.6f\n", name.c_str(), r.stages[s].mean_ms);
    out += fmt("stage.%s.p95_ms=%.6f\n", name.c_str(), r.stages[s].p95_ms);
  }
  out += fmt("pair.mean_ms=%.6f\n", r.per_pair.mean_ms);
  out += fmt("pair.p95_ms=%.6f\n", r.per_pair.p95_ms);
  out += fmt("pairs=%d\n", r.pairs);
  out += fmt("wall_seconds=%.6f\n", r.wall_seconds);
  out += fmt("pairs_per_second=%.6f\n", r.pairs_per_second);
  return out;
}

BenchReport bench(const std::filesystem::path& frame_dir, const PipelineConfig& cfg) {
  RunOptions opts;
  opts.write_outputs = false;
  return summarize_timings(run_pipeline(frame_dir, cfg, {}, opts));
}

}  // namespace uavrecon
