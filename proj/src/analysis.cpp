#include "blockcache/analysis.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <ostream>
#include <random>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "blockcache/flat_hta_store.hpp"
#include "blockcache/hash_store.hpp"
#include "blockcache/integrator.hpp"
#include "blockcache/octree_store.hpp"

namespace blockcache {

std::uint64_t GapHistogram::total() const {
  std::uint64_t t = 0;
  for (auto c : counts) t += c;
  return t;
}

std::vector<std::uint64_t> default_gap_edges() {
  std::vector<std::uint64_t> e;
  for (int i = 0; i <= 20; ++i) e.push_back(std::uint64_t{1} << i);
  return e;
}

std::vector<std::uint64_t> reuse_gaps(const AccessTrace& trace) {
  std::vector<std::uint64_t> gaps;
  std::unordered_map<BlockKey, std::uint64_t, BlockKeyHash> last;
  last.reserve(1024);
  for (const auto& e : trace) {
    auto [it, fresh] = last.try_emplace(e.key, e.seq);
    if (!fresh) {
      gaps.push_back(e.seq - it->second);
      it->second = e.seq;
    }
  }
  return gaps;
}

GapHistogram reuse_gap_histogram(const AccessTrace& trace,
                                 const std::vector<std::uint64_t>& edges) {
  if (edges.empty() || !std::is_sorted(edges.begin(), edges.end()) ||
      std::adjacent_find(edges.begin(), edges.end()) != edges.end()) {
    throw ConfigError("histogram edges must be strictly ascending and non-empty");
  }
  GapHistogram h;
  h.lo = edges;
  for (std::size_t i = 0; i < edges.size(); ++i) {
    h.hi.push_back(i + 1 < edges.size() ? edges[i + 1] : GapHistogram::kOpenEnd);
  }
  h.counts.assign(edges.size(), 0);
  for (std::uint64_t g : reuse_gaps(trace)) {
    auto it = std::upper_bound(edges.begin(), edges.end(), g);
    // Gaps below the first edge fall into the first bucket.
    const std::size_t idx =
        it == edges.begin() ? 0 : static_cast<std::size_t>(it - edges.begin() - 1);
    ++h.counts[idx];
  }
  return h;
}

GapSplit gap_split(const AccessTrace& trace, std::uint64_t threshold) {
  GapSplit s;
  for (std::uint64_t g : reuse_gaps(trace)) ++(g <= threshold ? s.at_most : s.above);
  return s;
}

std::vector<FrameCount> distinct_blocks(const AccessTrace& trace,
                                        bool group_by_frame) {
  std::vector<FrameCount> out;
  std::unordered_set<BlockKey, BlockKeyHash> seen;
  if (!group_by_frame) {
    for (const auto& e : trace) seen.insert(e.key);
    out.push_back({-1, seen.size()});
    return out;
  }
  for (std::size_t i = 0; i < trace.size();) {
    const std::int64_t frame = trace[i].frame;
    seen.clear();
    for (; i < trace.size() && trace[i].frame == frame; ++i) seen.insert(trace[i].key);
    out.push_back({frame, seen.size()});
  }
  return out;
}

std::vector<HitRatePoint> hit_rate_curve(const AccessTrace& trace,
                                         const std::vector<std::uint64_t>& capacities) {
  if (!std::is_sorted(capacities.begin(), capacities.end())) {
    throw ConfigError("capacities must be sorted ascending");
  }
  std::vector<HitRatePoint> out;
  for (std::uint64_t cap : capacities) {
    FaLruBuffer buf(cap);
    HitRatePoint p{cap, 0, 0, 0.0};
    for (const auto& e : trace) {
      if (e.op == AccessOp::kRemove) continue;
      ++p.accesses;
      if (buf.access(e.key)) ++p.hits;
    }
    p.hit_rate = p.accesses ? double(p.hits) / double(p.accesses) : 0.0;
    out.push_back(p);
  }
  return out;
}

std::uint64_t plateau_onset(const std::vector<HitRatePoint>& curve, double fraction) {
  if (curve.empty()) return 0;
  const double target = fraction * curve.back().hit_rate;
  for (const auto& p : curve) {
    if (p.hit_rate >= target) return p.capacity;
  }
  return curve.back().capacity;
}

SweepResult resolution_sweep(const SweepInputs& in,
                             const std::vector<double>& voxel_sizes) {
  if (voxel_sizes.empty()) throw ConfigError("sweep needs at least one voxel size");
  if (in.poses.empty()) throw ConfigError("sweep needs at least one pose");
  std::vector<DepthFrame> frames;
  for (const Pose& p : in.poses) frames.push_back(render_depth(in.scene, p, in.intrinsics));

  SweepResult result;
  for (double vs : voxel_sizes) {
    WorldConfig world = in.world;
    if (in.scale_truncation) {
      world.truncation_dist *= vs / in.world.voxel_size;
      world.clear_radius *= vs / in.world.voxel_size;
    }
    world.voxel_size = vs;
    world.validate();
    StoreConfig sc = in.store;
    sc.block_side = world.block_side;
    auto store = make_store(sc);
    AccessTrace trace;
    TracedStore ts(*store, trace);
    std::uint64_t updates = 0;
    std::uint64_t voxels = 0;
    for (std::size_t f = 0; f < frames.size(); ++f) {
      ts.set_frame(static_cast<std::int64_t>(f));
      const UpdateStats st = integrate_tsdf(frames[f], in.poses[f], in.intrinsics, ts, world);
      updates += st.voxel_updates;
      voxels += st.distinct_voxels;
    }
    const SimReport sim = run_trace(trace, in.profile, in.cost, store->stats());
    SweepRow row;
    row.voxel_size = vs;
    row.accesses = trace.size();
    row.distinct = distinct_blocks(trace, false).front().distinct_blocks;
    row.updates = updates;
    row.updates_per_frame = double(updates) / double(frames.size());
    row.voxels_per_frame = double(voxels) / double(frames.size());
    row.hit_rate = sim.cost.hit_rate;
    row.modeled_cycles = sim.cost.mechanism_cycles;
    row.baseline_cycles = sim.cost.baseline_cycles;
    result.rows.push_back(row);
  }
  return result;
}

namespace {

std::vector<BlockKey> random_distinct_keys(std::uint64_t n, std::uint64_t extent,
                                           std::uint64_t seed) {
  if (n > extent * extent * extent) throw ConfigError("not enough keys in the cube");
  std::mt19937_64 rng(seed);
  const auto half = static_cast<std::int64_t>(extent / 2);
  const auto draw = [&] {
    return static_cast<std::int32_t>(static_cast<std::int64_t>(rng() % extent) - half);
  };
  std::set<BlockKey> seen;
  std::vector<BlockKey> keys;
  while (keys.size() < n) {
    BlockKey k{draw(), draw(), draw()};
    if (seen.insert(k).second) keys.push_back(k);
  }
  return keys;
}

}  // namespace

std::vector<FootprintRow> footprint_report(const FootprintInputs& in,
                                           const std::vector<double>& load_factors) {
  const auto keys = random_distinct_keys(in.blocks, in.octree_extent, in.seed);
  std::vector<FootprintRow> rows;
  for (double lf : load_factors) {
    if (!(lf > 0)) throw ConfigError("load factors must be > 0");
    const auto buckets = std::max<std::uint64_t>(
        1, static_cast<std::uint64_t>(std::llround(double(in.blocks) / lf)));
    HashStore hash(HashStoreConfig{buckets}, in.block_side, 0);
    FlatHtaStore hta(FlatHtaConfig{buckets, in.pairs_per_bucket, in.line_bytes},
                     in.block_side, 0);
    OctreeStore octree(OctreeConfig{in.octree_extent}, in.block_side, 0);
    for (const auto& k : keys) {
      hash.get_or_allocate(k);
      hta.get_or_allocate(k);
      octree.get_or_allocate(k);
    }
    const FootprintReport base = hash.memory_footprint();
    for (const BlockStore* s : {static_cast<const BlockStore*>(&hash),
                                static_cast<const BlockStore*>(&hta),
                                static_cast<const BlockStore*>(&octree)}) {
      FootprintRow row;
      row.load_factor = lf;
      row.report = s->memory_footprint();
      row.ratio_index_vs_hash =
          base.model_bytes_index
              ? double(row.report.model_bytes_index) / double(base.model_bytes_index)
              : 0.0;
      row.ratio_total_vs_hash =
          base.total_bytes() ? double(row.report.total_bytes()) / double(base.total_bytes())
                             : 0.0;
      rows.push_back(row);
    }
  }
  return rows;
}

std::string format_float(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

void write_gap_csv(std::ostream& os, const GapHistogram& h) {
  os << "gap_bucket_lo,gap_bucket_hi,count\n";
  for (std::size_t i = 0; i < h.counts.size(); ++i) {
    os << h.lo[i] << ',';
    if (h.hi[i] == GapHistogram::kOpenEnd) os << "inf";
    else os << h.hi[i];
    os << ',' << h.counts[i] << '\n';
  }
}

void write_distinct_csv(std::ostream& os, const std::vector<FrameCount>& rows) {
  os << "frame,distinct_blocks\n";
  for (const auto& r : rows) os << r.frame << ',' << r.distinct_blocks << '\n';
}

void write_hit_rate_csv(std::ostream& os, const std::vector<HitRatePoint>& rows) {
  os << "capacity,hit_rate\n";
  for (const auto& r : rows) os << r.capacity << ',' << format_float(r.hit_rate) << '\n';
}

void write_sweep_csv(std::ostream& os, const SweepResult& r) {
  os << "voxel_size,accesses,distinct,updates,hit_rate,modeled_cycles\n";
  for (const auto& row : r.rows) {
    os << format_float(row.voxel_size) << ',' << row.accesses << ',' << row.distinct
       << ',' << row.updates << ',' << format_float(row.hit_rate) << ','
       << format_float(row.modeled_cycles) << '\n';
  }
}

void write_footprint_csv(std::ostream& os, const std::vector<FootprintRow>& rows) {
  os << "store_kind,load_factor,entries,bucket_count_or_depth,model_bytes_index,"
        "model_bytes_payload,overflow_entries,ratio_index_vs_hash,ratio_total_vs_hash\n";
  for (const auto& r : rows) {
    const auto& f = r.report;
    os << f.store_kind << ',' << format_float(r.load_factor) << ',' << f.entries << ','
       << f.bucket_count_or_depth << ',' << f.model_bytes_index << ','
       << f.model_bytes_payload << ',' << f.overflow_entries << ','
       << format_float(r.ratio_index_vs_hash) << ',' << format_float(r.ratio_total_vs_hash)
       << '\n';
  }
}

}  // namespace blockcache
