#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "blockcache/analysis.hpp"
#include "blockcache/integrator.hpp"
#include "blockcache/run_config.hpp"

namespace blockcache {

struct TraceRun {
  AccessTrace trace;
  StoreStats store_stats;
  FootprintReport footprint;
  std::vector<UpdateStats> tsdf_frames;
  std::vector<UpdateStats> esdf_frames;
};

/// Depth frames for every pose: rendered (plus optional seeded noise) or
/// read from the configured DPF1 files.
std::vector<DepthFrame> make_frames(const RunConfig& cfg, const std::vector<Pose>& poses);

/// Renders the trajectory and integrates every frame into a fresh store.
TraceRun generate_trace(const RunConfig& cfg);

struct AnalysisRun {
  GapHistogram gaps;
  GapSplit split;
  std::vector<FrameCount> per_frame;
  std::uint64_t global_distinct = 0;
  std::vector<HitRatePoint> curve;
  std::uint64_t plateau = 0;
};

AnalysisRun analyze_trace(const AccessTrace& trace, const AnalysisConfig& cfg);

nlohmann::json summary_json(const AnalysisRun& a, const AccessTrace& trace);

}  // namespace blockcache
