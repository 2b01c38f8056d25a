#pragma once

#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "blockcache/geometry.hpp"

namespace blockcache {

/// Opaque identifier of an allocated block: an index into the block arena.
struct BlockHandle {
  static constexpr std::uint64_t kInvalid =
      std::numeric_limits<std::uint64_t>::max();

  std::uint64_t value = kInvalid;

  constexpr bool valid() const { return value != kInvalid; }
  static constexpr BlockHandle invalid() { return {}; }
  friend constexpr bool operator==(BlockHandle, BlockHandle) = default;
};

struct Voxel {
  float sdf = 0.0f;
  float weight = 0.0f;
  double distance = std::numeric_limits<double>::infinity();  // ESDF
  bool observed = false;                                      // ESDF
};

struct VoxelBlock {
  explicit VoxelBlock(int block_side)
      : voxels(static_cast<std::size_t>(block_side) * block_side * block_side) {}
  std::vector<Voxel> voxels;
};

/// Append-only block arena. Blocks never move; retired handles are never
/// reissued.
class BlockArena {
 public:
  BlockArena(int block_side, std::uint64_t max_blocks)
      : block_side_(block_side), max_blocks_(max_blocks) {}

  BlockHandle allocate();
  void retire(BlockHandle h);

  VoxelBlock& block(BlockHandle h);
  const VoxelBlock& block(BlockHandle h) const;
  bool live(BlockHandle h) const;

  std::uint64_t live_blocks() const { return live_; }
  std::uint64_t issued() const { return blocks_.size(); }
  int block_side() const { return block_side_; }

 private:
  int block_side_;
  std::uint64_t max_blocks_;
  std::uint64_t live_ = 0;
  std::vector<std::unique_ptr<VoxelBlock>> blocks_;
};

struct StoreStats {
  std::uint64_t lookups = 0;
  std::uint64_t probe_steps = 0;
  std::uint64_t key_comparisons = 0;
  std::uint64_t allocations = 0;
  std::uint64_t removals = 0;

  double mean_probe_steps() const {
    return lookups ? double(probe_steps) / double(lookups) : 0.0;
  }
};

/// Modeled (not measured) memory footprint.
struct FootprintReport {
  std::string store_kind;
  std::uint64_t bucket_count_or_depth = 0;
  std::uint64_t entries = 0;
  double load_factor = 0.0;
  std::uint64_t model_bytes_index = 0;
  std::uint64_t model_bytes_payload = 0;
  std::uint64_t overflow_entries = 0;

  std::uint64_t total_bytes() const {
    return model_bytes_index + model_bytes_payload;
  }
};

void to_json(nlohmann::json& j, const FootprintReport& r);
void to_json(nlohmann::json& j, const StoreStats& s);

/// Byte constants behind the footprint model.
namespace footprint_model {
inline constexpr std::uint64_t kPointerBytes = 8;
inline constexpr std::uint64_t kHandleBytes = 8;
/// key + handle + next pointer (28) padded to 8-byte alignment.
inline constexpr std::uint64_t kChainNodeBytes = 32;
inline constexpr std::uint64_t kOctreeNodeBytes = 8 * kPointerBytes;
inline constexpr std::uint64_t kVoxelBytes = sizeof(Voxel);

std::uint64_t payload_bytes(std::uint64_t blocks, int block_side);
}  // namespace footprint_model

struct FetchResult {
  BlockHandle handle;
  bool allocated = false;
};

/// Key -> block index shared by all store kinds. Derived classes implement
/// the index; the arena and allocation accounting live here.
class BlockStore {
 public:
  BlockStore(int block_side, std::uint64_t max_blocks)
      : arena_(block_side, max_blocks) {}
  virtual ~BlockStore() = default;

  BlockStore(const BlockStore&) = delete;
  BlockStore& operator=(const BlockStore&) = delete;

  std::optional<BlockHandle> get_block(const BlockKey& key);
  /// Throws CapacityError when the block budget is exhausted.
  FetchResult get_or_allocate(const BlockKey& key);
  bool remove_block(const BlockKey& key);

  virtual FootprintReport memory_footprint() const = 0;
  virtual std::string kind() const = 0;
  virtual std::uint64_t size() const = 0;

  VoxelBlock& block(BlockHandle h) { return arena_.block(h); }
  const VoxelBlock& block(BlockHandle h) const { return arena_.block(h); }
  int block_side() const { return arena_.block_side(); }

  const StoreStats& stats() const { return stats_; }
  void reset_stats() { stats_ = {}; }

 protected:
  /// Index lookup; must count probe steps and key comparisons.
  virtual std::optional<BlockHandle> find(const BlockKey& key) = 0;
  virtual void insert(const BlockKey& key, BlockHandle h) = 0;
  virtual std::optional<BlockHandle> erase(const BlockKey& key) = 0;

  std::uint64_t payload_bytes() const {
    return footprint_model::payload_bytes(arena_.live_blocks(),
                                          arena_.block_side());
  }

  StoreStats stats_;

 private:
  BlockArena arena_;
};

enum class StoreKind { kHash, kOctree, kFlatHta };

StoreKind parse_store_kind(const std::string& name);
std::string to_string(StoreKind kind);

struct StoreConfig {
  StoreKind kind = StoreKind::kHash;
  std::uint64_t bucket_count = 1u << 16;      // hash, flat HTA
  std::uint64_t pairs_per_bucket = 3;         // flat HTA: one 64-byte line
  std::uint64_t line_bytes = 64;              // flat HTA
  std::uint64_t root_extent_blocks = 1u << 10;  // octree
  std::uint64_t max_blocks = 1u << 22;
  int block_side = 8;
};

std::unique_ptr<BlockStore> make_store(const StoreConfig& cfg);

}  // namespace blockcache
