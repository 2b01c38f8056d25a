#pragma once

#include <cstdint>

#include "blockcache/block_store.hpp"
#include "blockcache/camera.hpp"
#include "blockcache/kv_cache.hpp"
#include "blockcache/trace.hpp"

namespace blockcache {

inline constexpr float kMaxTsdfWeight = 100.0f;

struct UpdateStats {
  std::uint64_t rays = 0;
  std::uint64_t voxel_updates = 0;
  std::uint64_t block_accesses = 0;
  std::uint64_t distinct_blocks = 0;
  std::uint64_t distinct_voxels = 0;
  std::uint64_t cache_hits = 0;  // only when a cache is attached
};

/// Every block fetch made by the integrators goes through here and is
/// appended to the trace: Insert when the fetch allocated, Lookup otherwise.
/// With a cache attached the fetch follows the cached lookup protocol.
class TracedStore {
 public:
  TracedStore(BlockStore& store, AccessTrace& trace,
              KvCacheHierarchy* cache = nullptr)
      : store_(store), trace_(trace), cache_(cache) {}

  BlockHandle fetch(const BlockKey& key);
  void set_frame(std::int64_t frame) { frame_ = frame; }
  std::int64_t frame() const { return frame_; }

  BlockStore& store() { return store_; }
  AccessTrace& trace() { return trace_; }
  std::uint64_t cache_hits() const { return cache_hits_; }

 private:
  BlockStore& store_;
  AccessTrace& trace_;
  KvCacheHierarchy* cache_;
  std::int64_t frame_ = 0;
  std::uint64_t cache_hits_ = 0;
};

/// Projective TSDF update. Each ray is sampled every half voxel across
/// [depth - truncation, depth + truncation]; each voxel is updated at most
/// once per ray with the weighted running average, weight clamped at
/// kMaxTsdfWeight. sdf is positive toward the camera.
UpdateStats integrate_tsdf(const DepthFrame& frame, const Pose& pose,
                           const CameraIntrinsics& intr, TracedStore& store,
                           const WorldConfig& cfg);

/// Marks the voxel of every measured point occupied (distance 0), then for
/// each occupied voxel writes dist = min(dist, |center - occupied center|)
/// into every voxel whose center lies within clear_radius.
UpdateStats integrate_esdf(const DepthFrame& frame, const Pose& pose,
                           const CameraIntrinsics& intr, TracedStore& store,
                           const WorldConfig& cfg);

/// Reads one voxel; nullptr when its block is not allocated. Untraced.
const Voxel* find_voxel(BlockStore& store, const VoxelCoord& v);

}  // namespace blockcache
