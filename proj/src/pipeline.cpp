#include "blockcache/pipeline.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace blockcache {

std::vector<DepthFrame> make_frames(const RunConfig& cfg, const std::vector<Pose>& poses) {
  std::vector<DepthFrame> frames;
  if (!cfg.depth_frames.empty()) {
    if (cfg.depth_frames.size() != poses.size()) {
      throw ConfigError("depth_frames must list one file per trajectory pose");
    }
    for (const auto& path : cfg.depth_frames) frames.push_back(read_depth_frame(path));
    return frames;
  }
  std::mt19937_64 rng(cfg.seed);
  const auto uniform = [&] { return (double(rng() >> 11) + 0.5) * 0x1.0p-53; };
  for (const Pose& p : poses) {
    DepthFrame f = render_depth(cfg.scene, p, cfg.camera);
    if (cfg.depth_noise_stddev > 0.0) {
      // Box-Muller over the raw engine output, so the noise is identical
      // across standard library implementations.
      for (float& d : f.depths) {
        if (d <= 0.0f) continue;
        const double n = std::sqrt(-2.0 * std::log(uniform())) *
                         std::cos(2.0 * std::numbers::pi * uniform());
        d = static_cast<float>(std::max(0.0, d + cfg.depth_noise_stddev * n));
      }
    }
    frames.push_back(std::move(f));
  }
  return frames;
}

TraceRun generate_trace(const RunConfig& cfg) {
  cfg.validate();
  const auto poses = make_trajectory(cfg.trajectory);
  const auto frames = make_frames(cfg, poses);
  auto store = make_store(cfg.store);
  TraceRun run;
  TracedStore ts(*store, run.trace);
  for (std::size_t f = 0; f < frames.size(); ++f) {
    ts.set_frame(static_cast<std::int64_t>(f));
    run.tsdf_frames.push_back(integrate_tsdf(frames[f], poses[f], cfg.camera, ts, cfg.world));
    if (cfg.integrate_esdf) {
      run.esdf_frames.push_back(integrate_esdf(frames[f], poses[f], cfg.camera, ts, cfg.world));
    }
  }
  run.store_stats = store->stats();
  run.footprint = store->memory_footprint();
  return run;
}

AnalysisRun analyze_trace(const AccessTrace& trace, const AnalysisConfig& cfg) {
  AnalysisRun a;
  a.gaps = reuse_gap_histogram(trace);
  a.split = gap_split(trace, cfg.gap_threshold);
  a.per_frame = distinct_blocks(trace, true);
  a.global_distinct = distinct_blocks(trace, false).front().distinct_blocks;
  a.curve = hit_rate_curve(trace, cfg.capacities);
  a.plateau = plateau_onset(a.curve);
  return a;
}

nlohmann::json summary_json(const AnalysisRun& a, const AccessTrace& trace) {
  std::uint64_t per_frame_sum = 0;
  for (const auto& f : a.per_frame) per_frame_sum += f.distinct_blocks;
  const double frames = a.per_frame.empty() ? 0.0 : double(a.per_frame.size());
  const double mean_distinct = frames > 0 ? double(per_frame_sum) / frames : 0.0;
  const double mean_accesses = frames > 0 ? double(trace.size()) / frames : 0.0;
  return {{"accesses", trace.size()},
          {"frames", a.per_frame.size()},
          {"global_distinct_blocks", a.global_distinct},
          {"mean_distinct_blocks_per_frame", mean_distinct},
          {"mean_accesses_per_frame", mean_accesses},
          {"reuse_ratio", mean_distinct > 0 ? mean_accesses / mean_distinct : 0.0},
          {"gaps_at_most_threshold", a.split.at_most},
          {"gaps_above_threshold", a.split.above},
          {"fa_plateau_capacity", a.plateau}};
}

}  // namespace blockcache
