#include "blockcache/octree_store.hpp"

#include <bit>

namespace blockcache {

OctreeStore::OctreeStore(const OctreeConfig& cfg, int block_side,
                         std::uint64_t max_blocks)
    : BlockStore(block_side, max_blocks) {
  const std::uint64_t e = cfg.root_extent_blocks;
  if (e < 2 || !std::has_single_bit(e) || e > (std::uint64_t{1} << 32)) {
    throw ConfigError(
        "octree root_extent_blocks must be a power of two in [2, 2^32]");
  }
  depth_ = std::countr_zero(e);
  half_extent_ = static_cast<std::int64_t>(e / 2);
  Node root;
  root.fill(kEmpty);
  nodes_.push_back(root);
}

bool OctreeStore::contains_key_range(const BlockKey& key) const {
  const auto in = [&](std::int32_t c) {
    return c >= -half_extent_ && c < half_extent_;
  };
  return in(key.x) && in(key.y) && in(key.z);
}

void OctreeStore::check_range(const BlockKey& key) const {
  if (!contains_key_range(key)) {
    throw InputError("block key outside the octree root volume");
  }
}

int OctreeStore::child_slot(const BlockKey& key, int level) const {
  const int bit = depth_ - 1 - level;
  const auto u = [&](std::int32_t c) {
    return static_cast<std::uint64_t>(std::int64_t{c} + half_extent_);
  };
  return static_cast<int>(((u(key.x) >> bit) & 1u) |
                          (((u(key.y) >> bit) & 1u) << 1) |
                          (((u(key.z) >> bit) & 1u) << 2));
}

std::optional<BlockHandle> OctreeStore::find(const BlockKey& key) {
  check_range(key);
  std::uint64_t node = 0;
  for (int level = 0; level < depth_; ++level) {
    ++stats_.probe_steps;
    ++stats_.key_comparisons;
    const std::uint64_t child = nodes_[node][child_slot(key, level)];
    if (child == kEmpty) return std::nullopt;
    if (level == depth_ - 1) return BlockHandle{child};
    node = child;
  }
  return std::nullopt;
}

void OctreeStore::insert(const BlockKey& key, BlockHandle h) {
  check_range(key);
  std::uint64_t node = 0;
  for (int level = 0; level < depth_ - 1; ++level) {
    const int slot = child_slot(key, level);
    if (nodes_[node][slot] == kEmpty) {
      Node fresh;
      fresh.fill(kEmpty);
      nodes_.push_back(fresh);
      nodes_[node][slot] = nodes_.size() - 1;
    }
    node = nodes_[node][slot];
  }
  nodes_[node][child_slot(key, depth_ - 1)] = h.value;
  ++entries_;
}

std::optional<BlockHandle> OctreeStore::erase(const BlockKey& key) {
  check_range(key);
  std::uint64_t node = 0;
  for (int level = 0; level < depth_ - 1; ++level) {
    node = nodes_[node][child_slot(key, level)];
    if (node == kEmpty) return std::nullopt;
  }
  auto& leaf = nodes_[node][child_slot(key, depth_ - 1)];
  if (leaf == kEmpty) return std::nullopt;
  const BlockHandle h{leaf};
  // Interior nodes are kept; the model counts every node ever allocated.
  leaf = kEmpty;
  --entries_;
  return h;
}

FootprintReport OctreeStore::memory_footprint() const {
  using namespace footprint_model;
  FootprintReport r;
  r.store_kind = kind();
  r.bucket_count_or_depth = static_cast<std::uint64_t>(depth_);
  r.entries = entries_;
  const double extent = double(half_extent_) * 2.0;
  r.load_factor = double(entries_) / (extent * extent * extent);
  r.model_bytes_index = nodes_.size() * kOctreeNodeBytes;
  r.model_bytes_payload = payload_bytes();
  return r;
}

}  // namespace blockcache
