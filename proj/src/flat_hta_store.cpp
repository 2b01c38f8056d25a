#include "blockcache/flat_hta_store.hpp"

namespace blockcache {

namespace {
constexpr std::uint64_t kPairBytes = kKeyBytes + footprint_model::kHandleBytes;
}

FlatHtaStore::FlatHtaStore(const FlatHtaConfig& cfg, int block_side,
                           std::uint64_t max_blocks)
    : BlockStore(block_side, max_blocks), cfg_(cfg) {
  if (cfg.bucket_count == 0) throw ConfigError("flat HTA needs >= 1 bucket");
  if (cfg.pairs_per_bucket == 0 ||
      cfg.pairs_per_bucket * kPairBytes > cfg.line_bytes) {
    throw ConfigError("flat HTA pairs_per_bucket does not fit in line_bytes");
  }
  slots_.resize(cfg.bucket_count * cfg.pairs_per_bucket);
}

std::size_t FlatHtaStore::bucket_base(const BlockKey& key) const {
  return static_cast<std::size_t>((spatial_hash(key) % cfg_.bucket_count) *
                                  cfg_.pairs_per_bucket);
}

std::optional<BlockHandle> FlatHtaStore::find(const BlockKey& key) {
  const std::size_t base = bucket_base(key);
  ++stats_.probe_steps;
  for (std::size_t i = 0; i < cfg_.pairs_per_bucket; ++i) {
    const Slot& s = slots_[base + i];
    if (!s.handle.valid()) continue;
    ++stats_.key_comparisons;
    if (s.key == key) return s.handle;
  }
  if (overflow_.empty()) return std::nullopt;
  ++stats_.probe_steps;
  ++stats_.key_comparisons;
  auto it = overflow_.find(key);
  if (it == overflow_.end()) return std::nullopt;
  return it->second;
}

void FlatHtaStore::insert(const BlockKey& key, BlockHandle h) {
  const std::size_t base = bucket_base(key);
  ++entries_;
  for (std::size_t i = 0; i < cfg_.pairs_per_bucket; ++i) {
    Slot& s = slots_[base + i];
    if (!s.handle.valid()) {
      s = {key, h};
      return;
    }
  }
  overflow_.emplace(key, h);
  ++overflow_inserts_;
}

std::optional<BlockHandle> FlatHtaStore::erase(const BlockKey& key) {
  const std::size_t base = bucket_base(key);
  for (std::size_t i = 0; i < cfg_.pairs_per_bucket; ++i) {
    Slot& s = slots_[base + i];
    if (s.handle.valid() && s.key == key) {
      const BlockHandle h = s.handle;
      s = {};
      --entries_;
      return h;
    }
  }
  auto it = overflow_.find(key);
  if (it == overflow_.end()) return std::nullopt;
  const BlockHandle h = it->second;
  overflow_.erase(it);
  --entries_;
  return h;
}

FootprintReport FlatHtaStore::memory_footprint() const {
  using namespace footprint_model;
  FootprintReport r;
  r.store_kind = kind();
  r.bucket_count_or_depth = cfg_.bucket_count;
  r.entries = entries_;
  r.load_factor = double(entries_) / double(cfg_.bucket_count);
  r.model_bytes_index = cfg_.bucket_count * cfg_.line_bytes +
                        overflow_.size() * kChainNodeBytes;
  r.model_bytes_payload = payload_bytes();
  r.overflow_entries = overflow_.size();
  return r;
}

}  // namespace blockcache
