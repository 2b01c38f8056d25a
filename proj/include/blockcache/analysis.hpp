#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

#include "blockcache/block_store.hpp"
#include "blockcache/camera.hpp"
#include "blockcache/cost_model.hpp"
#include "blockcache/trace.hpp"

namespace blockcache {

/// Buckets are half-open [lo, hi); the last bucket may be open-ended
/// (hi == kOpenEnd). gap = seq difference of consecutive same-key accesses.
struct GapHistogram {
  static constexpr std::uint64_t kOpenEnd =
      std::numeric_limits<std::uint64_t>::max();

  std::vector<std::uint64_t> lo;
  std::vector<std::uint64_t> hi;
  std::vector<std::uint64_t> counts;

  std::uint64_t total() const;
};

/// 1, 2, 4, ..., 2^20, then [2^20, inf).
std::vector<std::uint64_t> default_gap_edges();

/// `edges` are ascending bucket lower bounds; the last bucket is open-ended.
GapHistogram reuse_gap_histogram(const AccessTrace& trace,
                                 const std::vector<std::uint64_t>& edges =
                                     default_gap_edges());

/// Every reuse gap of the trace in event order.
std::vector<std::uint64_t> reuse_gaps(const AccessTrace& trace);

struct GapSplit {
  std::uint64_t at_most = 0;
  std::uint64_t above = 0;
};
GapSplit gap_split(const AccessTrace& trace, std::uint64_t threshold);

struct FrameCount {
  std::int64_t frame = 0;  // -1 for the global count
  std::uint64_t distinct_blocks = 0;
};

std::vector<FrameCount> distinct_blocks(const AccessTrace& trace,
                                        bool group_by_frame);

struct HitRatePoint {
  std::uint64_t capacity = 0;
  std::uint64_t hits = 0;
  std::uint64_t accesses = 0;
  double hit_rate = 0.0;
};

/// Replays Lookup/Insert events through an FA LRU buffer per capacity.
std::vector<HitRatePoint> hit_rate_curve(const AccessTrace& trace,
                                         const std::vector<std::uint64_t>& capacities);

/// First capacity reaching `fraction` of the curve's final hit rate.
std::uint64_t plateau_onset(const std::vector<HitRatePoint>& curve,
                            double fraction = 0.99);

struct SweepRow {
  double voxel_size = 0.0;
  std::uint64_t accesses = 0;
  std::uint64_t distinct = 0;
  std::uint64_t updates = 0;
  double updates_per_frame = 0.0;
  double voxels_per_frame = 0.0;  // distinct voxels updated, mean over frames
  double hit_rate = 0.0;
  double modeled_cycles = 0.0;
  double baseline_cycles = 0.0;
};

struct SweepResult {
  std::vector<SweepRow> rows;
};

struct SweepInputs {
  SceneSpec scene;
  std::vector<Pose> poses;
  CameraIntrinsics intrinsics;
  WorldConfig world;  // voxel_size is replaced per row
  StoreConfig store;
  CacheProfile profile;
  CostModelConfig cost;
  /// Keep the truncation band a fixed multiple of the voxel size instead of
  /// a fixed length.
  bool scale_truncation = false;
};

SweepResult resolution_sweep(const SweepInputs& in,
                             const std::vector<double>& voxel_sizes);

struct FootprintRow {
  double load_factor = 0.0;  // requested; the octree row shares its keys
  FootprintReport report;
  double ratio_index_vs_hash = 0.0;
  double ratio_total_vs_hash = 0.0;
};

struct FootprintInputs {
  std::uint64_t blocks = 10000;
  int block_side = 8;
  std::uint64_t pairs_per_bucket = 3;
  std::uint64_t line_bytes = 64;
  std::uint64_t octree_extent = 128;  // keys drawn inside this cube
  std::uint64_t seed = 1;
};

/// Builds a chained hash, a flat HTA and an octree holding the same random
/// keys per load factor; hash and HTA bucket counts are blocks / load factor.
std::vector<FootprintRow> footprint_report(const FootprintInputs& in,
                                           const std::vector<double>& load_factors);

// CSV writers with fixed headers; floats use 6 significant digits.
void write_gap_csv(std::ostream& os, const GapHistogram& h);
void write_distinct_csv(std::ostream& os, const std::vector<FrameCount>& rows);
void write_hit_rate_csv(std::ostream& os, const std::vector<HitRatePoint>& rows);
void write_sweep_csv(std::ostream& os, const SweepResult& r);
void write_footprint_csv(std::ostream& os, const std::vector<FootprintRow>& rows);

std::string format_float(double v);

}  // namespace blockcache
