#include "blockcache/hash_store.hpp"

#include <algorithm>
#include <bit>

namespace blockcache {

HashStore::HashStore(const HashStoreConfig& cfg, int block_side,
                     std::uint64_t max_blocks)
    : BlockStore(block_side, max_blocks) {
  if (cfg.bucket_count == 0) throw ConfigError("hash store needs >= 1 bucket");
  buckets_.resize(cfg.bucket_count);
  mask_ = std::has_single_bit(cfg.bucket_count) ? cfg.bucket_count - 1 : 0;
}

std::vector<HashStore::Entry>& HashStore::bucket(const BlockKey& key) {
  const std::uint64_t h = spatial_hash(key);
  return buckets_[mask_ ? (h & mask_) : (h % buckets_.size())];
}

std::optional<BlockHandle> HashStore::find(const BlockKey& key) {
  const auto& chain = bucket(key);
  // Reading the bucket head is one step even when the chain is empty.
  std::uint64_t steps = 1;
  for (std::size_t i = 0; i < chain.size(); ++i) {
    if (i > 0) ++steps;
    ++stats_.key_comparisons;
    if (chain[i].key == key) {
      stats_.probe_steps += steps;
      return chain[i].handle;
    }
  }
  stats_.probe_steps += steps;
  return std::nullopt;
}

void HashStore::insert(const BlockKey& key, BlockHandle h) {
  bucket(key).push_back({key, h});
  ++entries_;
}

std::optional<BlockHandle> HashStore::erase(const BlockKey& key) {
  auto& chain = bucket(key);
  auto it = std::find_if(chain.begin(), chain.end(),
                         [&](const Entry& e) { return e.key == key; });
  if (it == chain.end()) return std::nullopt;
  const BlockHandle h = it->handle;
  chain.erase(it);
  --entries_;
  return h;
}

FootprintReport HashStore::memory_footprint() const {
  using namespace footprint_model;
  FootprintReport r;
  r.store_kind = kind();
  r.bucket_count_or_depth = buckets_.size();
  r.entries = entries_;
  r.load_factor = load_factor();
  r.model_bytes_index =
      buckets_.size() * kPointerBytes + entries_ * kChainNodeBytes;
  r.model_bytes_payload = payload_bytes();
  return r;
}

}  // namespace blockcache
