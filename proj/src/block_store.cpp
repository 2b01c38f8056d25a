#include "blockcache/block_store.hpp"

#include "blockcache/flat_hta_store.hpp"
#include "blockcache/hash_store.hpp"
#include "blockcache/octree_store.hpp"

namespace blockcache {

BlockHandle BlockArena::allocate() {
  if (max_blocks_ != 0 && live_ >= max_blocks_) {
    throw CapacityError("block arena exhausted (budget " +
                        std::to_string(max_blocks_) + " blocks)");
  }
  blocks_.push_back(std::make_unique<VoxelBlock>(block_side_));
  ++live_;
  return BlockHandle{blocks_.size() - 1};
}

void BlockArena::retire(BlockHandle h) {
  if (live(h)) {
    blocks_[h.value].reset();
    --live_;
  }
}

bool BlockArena::live(BlockHandle h) const {
  return h.valid() && h.value < blocks_.size() && blocks_[h.value] != nullptr;
}

VoxelBlock& BlockArena::block(BlockHandle h) {
  if (!live(h)) throw InputError("handle does not name a live block");
  return *blocks_[h.value];
}

const VoxelBlock& BlockArena::block(BlockHandle h) const {
  if (!live(h)) throw InputError("handle does not name a live block");
  return *blocks_[h.value];
}

std::optional<BlockHandle> BlockStore::get_block(const BlockKey& key) {
  ++stats_.lookups;
  return find(key);
}

FetchResult BlockStore::get_or_allocate(const BlockKey& key) {
  ++stats_.lookups;
  if (auto h = find(key)) return {*h, false};
  const BlockHandle h = arena_.allocate();
  insert(key, h);
  ++stats_.allocations;
  return {h, true};
}

bool BlockStore::remove_block(const BlockKey& key) {
  auto h = erase(key);
  if (!h) return false;
  arena_.retire(*h);
  ++stats_.removals;
  return true;
}

std::uint64_t footprint_model::payload_bytes(std::uint64_t blocks,
                                             int block_side) {
  const auto b = static_cast<std::uint64_t>(block_side);
  return blocks * b * b * b * kVoxelBytes;
}

void to_json(nlohmann::json& j, const FootprintReport& r) {
  j = nlohmann::json{{"store_kind", r.store_kind},
                     {"bucket_count_or_depth", r.bucket_count_or_depth},
                     {"entries", r.entries},
                     {"load_factor", r.load_factor},
                     {"model_bytes_index", r.model_bytes_index},
                     {"model_bytes_payload", r.model_bytes_payload},
                     {"overflow_entries", r.overflow_entries}};
}

void to_json(nlohmann::json& j, const StoreStats& s) {
  j = nlohmann::json{{"lookups", s.lookups},
                     {"probe_steps", s.probe_steps},
                     {"key_comparisons", s.key_comparisons},
                     {"allocations", s.allocations},
                     {"removals", s.removals}};
}

StoreKind parse_store_kind(const std::string& name) {
  if (name == "hash") return StoreKind::kHash;
  if (name == "octree") return StoreKind::kOctree;
  if (name == "flat_hta") return StoreKind::kFlatHta;
  throw ConfigError("unknown store kind '" + name + "'");
}

std::string to_string(StoreKind kind) {
  switch (kind) {
    case StoreKind::kHash: return "hash";
    case StoreKind::kOctree: return "octree";
    case StoreKind::kFlatHta: return "flat_hta";
  }
  return "?";
}

std::unique_ptr<BlockStore> make_store(const StoreConfig& cfg) {
  switch (cfg.kind) {
    case StoreKind::kHash:
      return std::make_unique<HashStore>(HashStoreConfig{cfg.bucket_count},
                                         cfg.block_side, cfg.max_blocks);
    case StoreKind::kOctree:
      return std::make_unique<OctreeStore>(
          OctreeConfig{cfg.root_extent_blocks}, cfg.block_side, cfg.max_blocks);
    case StoreKind::kFlatHta:
      return std::make_unique<FlatHtaStore>(
          FlatHtaConfig{cfg.bucket_count, cfg.pairs_per_bucket, cfg.line_bytes},
          cfg.block_side, cfg.max_blocks);
  }
  throw ConfigError("unknown store kind");
}

}  // namespace blockcache
