#pragma once

#include <vector>

#include "blockcache/block_store.hpp"

namespace blockcache {

struct HashStoreConfig {
  std::uint64_t bucket_count = 1u << 16;  // powers of two index by mask
};

/// Separate-chaining spatial hash over block keys.
class HashStore final : public BlockStore {
 public:
  HashStore(const HashStoreConfig& cfg, int block_side,
            std::uint64_t max_blocks);

  FootprintReport memory_footprint() const override;
  std::string kind() const override { return "hash"; }
  std::uint64_t size() const override { return entries_; }

  double load_factor() const {
    return double(entries_) / double(buckets_.size());
  }

 protected:
  std::optional<BlockHandle> find(const BlockKey& key) override;
  void insert(const BlockKey& key, BlockHandle h) override;
  std::optional<BlockHandle> erase(const BlockKey& key) override;

 private:
  struct Entry {
    BlockKey key;
    BlockHandle handle;
  };

  std::vector<Entry>& bucket(const BlockKey& key);

  std::vector<std::vector<Entry>> buckets_;
  std::uint64_t mask_;  // 0 when bucket_count is not a power of two
  std::uint64_t entries_ = 0;
};

}  // namespace blockcache
