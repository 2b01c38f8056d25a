#pragma once

#include <map>
#include <vector>

#include "blockcache/block_store.hpp"

namespace blockcache {

struct FlatHtaConfig {
  std::uint64_t bucket_count = 1u << 16;
  std::uint64_t pairs_per_bucket = 3;
  std::uint64_t line_bytes = 64;
};

/// Key/handle pairs packed into cache-line sized buckets, addressed by
/// hash % bucket_count. A full bucket spills into an ordered overflow map
/// and bumps overflow_entries().
class FlatHtaStore final : public BlockStore {
 public:
  FlatHtaStore(const FlatHtaConfig& cfg, int block_side,
               std::uint64_t max_blocks);

  FootprintReport memory_footprint() const override;
  std::string kind() const override { return "flat_hta"; }
  std::uint64_t size() const override { return entries_; }

  std::uint64_t overflow_entries() const { return overflow_.size(); }
  std::uint64_t overflow_inserts() const { return overflow_inserts_; }

 protected:
  std::optional<BlockHandle> find(const BlockKey& key) override;
  void insert(const BlockKey& key, BlockHandle h) override;
  std::optional<BlockHandle> erase(const BlockKey& key) override;

 private:
  struct Slot {
    BlockKey key;
    BlockHandle handle;  // invalid marks an empty slot
  };

  std::size_t bucket_base(const BlockKey& key) const;

  FlatHtaConfig cfg_;
  std::vector<Slot> slots_;
  std::map<BlockKey, BlockHandle> overflow_;
  std::uint64_t entries_ = 0;
  std::uint64_t overflow_inserts_ = 0;
};

}  // namespace blockcache
