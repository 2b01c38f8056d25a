#pragma once

#include <array>
#include <vector>

#include "blockcache/block_store.hpp"

namespace blockcache {

struct OctreeConfig {
  /// Edge of the root cube in blocks; power of two, >= 2. Keys must lie in
  /// [-extent/2, extent/2) on every axis.
  std::uint64_t root_extent_blocks = 1u << 10;
};

/// Fixed-depth octree whose leaves are whole blocks. Every descent for a
/// present key visits exactly depth() nodes.
class OctreeStore final : public BlockStore {
 public:
  OctreeStore(const OctreeConfig& cfg, int block_side,
              std::uint64_t max_blocks);

  FootprintReport memory_footprint() const override;
  std::string kind() const override { return "octree"; }
  std::uint64_t size() const override { return entries_; }

  int depth() const { return depth_; }
  bool contains_key_range(const BlockKey& key) const;
  std::uint64_t node_count() const { return nodes_.size(); }

 protected:
  std::optional<BlockHandle> find(const BlockKey& key) override;
  void insert(const BlockKey& key, BlockHandle h) override;
  std::optional<BlockHandle> erase(const BlockKey& key) override;

 private:
  static constexpr std::uint64_t kEmpty = BlockHandle::kInvalid;
  // Children are node indices, or block handles in the last level.
  using Node = std::array<std::uint64_t, 8>;

  int child_slot(const BlockKey& key, int level) const;
  void check_range(const BlockKey& key) const;

  std::vector<Node> nodes_;
  std::int64_t half_extent_;
  int depth_;
  std::uint64_t entries_ = 0;
};

}  // namespace blockcache
