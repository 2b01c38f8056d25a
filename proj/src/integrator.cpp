#include "blockcache/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

namespace blockcache {

BlockHandle TracedStore::fetch(const BlockKey& key) {
  FetchResult r;
  if (cache_ != nullptr) {
    const BlkPtrResult b = get_blk_ptr(*cache_, store_, key);
    r = b.fetch;
    if (b.cache_hit) ++cache_hits_;
  } else {
    r = store_.get_or_allocate(key);
  }
  trace_.append(r.allocated ? AccessOp::kInsert : AccessOp::kLookup, key, frame_);
  return r.handle;
}

namespace {

void check_frame(const DepthFrame& frame, const CameraIntrinsics& intr) {
  intr.validate();
  frame.validate();
  if (frame.width != intr.width || frame.height != intr.height) {
    throw InputError("depth frame does not match the camera intrinsics");
  }
}

Voxel& voxel_ref(TracedStore& ts, const VoxelCoord& v, int block_side,
                 std::unordered_set<BlockKey, BlockKeyHash>& blocks) {
  const BlockLocation loc = voxel_to_block(v, block_side);
  const BlockHandle h = ts.fetch(loc.key);
  blocks.insert(loc.key);
  return ts.store().block(h).voxels[static_cast<std::size_t>(loc.local_index)];
}

}  // namespace

UpdateStats integrate_tsdf(const DepthFrame& frame, const Pose& pose,
                           const CameraIntrinsics& intr, TracedStore& ts,
                           const WorldConfig& cfg) {
  cfg.validate();
  pose.validate();
  check_frame(frame, intr);
  if (ts.store().block_side() != cfg.block_side) {
    throw ConfigError("store block_side differs from the world config");
  }

  UpdateStats st;
  const std::uint64_t trace_before = ts.trace().size();
  const std::uint64_t hits_before = ts.cache_hits();
  std::unordered_set<BlockKey, BlockKeyHash> blocks;
  std::unordered_set<VoxelCoord, VoxelCoordHash> voxels;
  std::vector<VoxelCoord> ray_voxels;

  const Vec3d origin = pose.translation;
  const double trunc = cfg.truncation_dist;
  const double step = 0.5 * cfg.voxel_size;

  for (int v = 0; v < frame.height; ++v) {
    for (int u = 0; u < frame.width; ++u) {
      const double depth = frame.at(u, v);
      if (depth <= 0.0) continue;
      ++st.rays;
      const Vec3d point = pose.apply(depth * intr.ray(u, v));
      const double range = (point - origin).norm();
      const Vec3d dir = (point - origin) / range;

      ray_voxels.clear();
      const double t_begin = std::max(0.0, range - trunc);
      const double t_end = range + trunc;
      const int samples = static_cast<int>(std::floor((t_end - t_begin) / step + 1e-9));
      for (int i = 0; i <= samples; ++i) {
        const double t = t_begin + i * step;
        const VoxelCoord vc = world_to_voxel(origin + t * dir, cfg);
        if (std::find(ray_voxels.begin(), ray_voxels.end(), vc) != ray_voxels.end()) {
          continue;
        }
        ray_voxels.push_back(vc);
        const double sdf = range - (voxel_center(vc, cfg) - origin).dot(dir);
        if (std::abs(sdf) > trunc) continue;

        Voxel& vox = voxel_ref(ts, vc, cfg.block_side, blocks);
        const float w = vox.weight;
        vox.sdf = static_cast<float>((w * vox.sdf + sdf) / (w + 1.0f));
        vox.weight = std::min(w + 1.0f, kMaxTsdfWeight);
        ++st.voxel_updates;
        voxels.insert(vc);
      }
    }
  }
  st.block_accesses = ts.trace().size() - trace_before;
  st.distinct_blocks = blocks.size();
  st.distinct_voxels = voxels.size();
  st.cache_hits = ts.cache_hits() - hits_before;
  return st;
}

UpdateStats integrate_esdf(const DepthFrame& frame, const Pose& pose,
                           const CameraIntrinsics& intr, TracedStore& ts,
                           const WorldConfig& cfg) {
  cfg.validate();
  pose.validate();
  check_frame(frame, intr);
  if (ts.store().block_side() != cfg.block_side) {
    throw ConfigError("store block_side differs from the world config");
  }

  UpdateStats st;
  const std::uint64_t trace_before = ts.trace().size();
  const std::uint64_t hits_before = ts.cache_hits();
  std::unordered_set<BlockKey, BlockKeyHash> blocks;
  std::unordered_set<VoxelCoord, VoxelCoordHash> voxels;

  // Occupied voxels in first-seen pixel order.
  std::vector<VoxelCoord> occupied;
  std::unordered_set<VoxelCoord, VoxelCoordHash> occupied_set;
  for (int v = 0; v < frame.height; ++v) {
    for (int u = 0; u < frame.width; ++u) {
      const double depth = frame.at(u, v);
      if (depth <= 0.0) continue;
      ++st.rays;
      const VoxelCoord vc = world_to_voxel(pose.apply(depth * intr.ray(u, v)), cfg);
      if (occupied_set.insert(vc).second) occupied.push_back(vc);
    }
  }

  const double ratio = cfg.clear_radius / cfg.voxel_size;
  const int reach = static_cast<int>(std::floor(ratio + 1e-9));
  const double reach_sq = ratio * ratio + 1e-9;

  for (const VoxelCoord& o : occupied) {
    Voxel& self = voxel_ref(ts, o, cfg.block_side, blocks);
    self.distance = 0.0;
    self.observed = true;
    ++st.voxel_updates;
    voxels.insert(o);
    const Vec3d oc = voxel_center(o, cfg);
    for (int dz = -reach; dz <= reach; ++dz) {
      for (int dy = -reach; dy <= reach; ++dy) {
        for (int dx = -reach; dx <= reach; ++dx) {
          const int d2 = dx * dx + dy * dy + dz * dz;
          if (d2 == 0 || double(d2) > reach_sq) continue;
          const VoxelCoord n{o.x + dx, o.y + dy, o.z + dz};
          Voxel& vox = voxel_ref(ts, n, cfg.block_side, blocks);
          const double dist = (voxel_center(n, cfg) - oc).norm();
          vox.distance = std::min(vox.distance, dist);
          vox.observed = true;
          ++st.voxel_updates;
          voxels.insert(n);
        }
      }
    }
  }
  st.block_accesses = ts.trace().size() - trace_before;
  st.distinct_blocks = blocks.size();
  st.distinct_voxels = voxels.size();
  st.cache_hits = ts.cache_hits() - hits_before;
  return st;
}

const Voxel* find_voxel(BlockStore& store, const VoxelCoord& v) {
  const BlockLocation loc = voxel_to_block(v, store.block_side());
  const auto h = store.get_block(loc.key);
  if (!h) return nullptr;
  return &store.block(*h).voxels[static_cast<std::size_t>(loc.local_index)];
}

}  // namespace blockcache
