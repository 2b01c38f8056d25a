#pragma once

#include <array>
#include <cstdint>
#include <list>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "blockcache/block_store.hpp"
#include "blockcache/geometry.hpp"

namespace blockcache {

/// 12-byte key + 8-byte handle.
inline constexpr int kPairBytes = 20;
inline constexpr int kMaxPairsPerLine = 6;

struct LevelConfig {
  std::string name = "L1";
  std::uint64_t sets = 64;
  int ways = 4;
  int reserved_ways = 1;
  int line_bytes = 64;
  int hit_latency_cycles = 1;

  /// 3 pairs in a 64-byte line, 6 in a 128-byte line.
  int pairs_per_line() const { return line_bytes / kPairBytes; }
  std::uint64_t reserved_lines() const {
    return sets * static_cast<std::uint64_t>(reserved_ways);
  }
  void validate() const;
};

/// Ordered levels, innermost first. A tag miss is forwarded outward; a miss
/// at the outermost reserved level returns absent.
struct CacheProfile {
  std::string name;
  std::vector<LevelConfig> levels;

  void validate() const;
};

/// L1 64 sets x 4 ways (1 reserved, 1 cycle), L2 512 sets x 8 ways
/// (2 reserved, 4 cycles), 64-byte lines.
CacheProfile cpu_table5_profile();
/// Single 128KB 4-way L1 with 128-byte lines, 1 reserved way.
CacheProfile gpu_table6_profile();
/// Throws ConfigError for unknown names.
CacheProfile profile_by_name(const std::string& name);

/// hash(key) mod nr.
std::uint64_t pseudoaddress(const BlockKey& key, std::uint64_t nr);

struct LevelStats {
  std::uint64_t entire_line_read_hits = 0;
  std::uint64_t entire_line_read_misses = 0;
  std::uint64_t within_line_read_hits = 0;
  std::uint64_t within_line_read_misses = 0;
  std::uint64_t entire_line_write_hits = 0;
  std::uint64_t entire_line_write_misses = 0;
  std::uint64_t within_line_write_hits = 0;
  std::uint64_t within_line_write_misses = 0;
  std::uint64_t line_evictions = 0;
  std::uint64_t writebacks = 0;
};

struct SimStats {
  std::vector<std::string> level_names;
  std::vector<LevelStats> levels;
  std::uint64_t kv_lookups = 0;
  std::uint64_t kv_inserts = 0;
  std::uint64_t kv_removes = 0;
  std::uint64_t overall_hits = 0;
  std::uint64_t lookup_misses = 0;  // absent returns
};

void to_json(nlohmann::json& j, const SimStats& s);

struct LookupResult {
  std::optional<BlockHandle> handle;
  int hit_level = -1;  // index into the profile levels, -1 when absent
  std::uint64_t cycles = 0;
};

/// Snapshot of one reserved line, for inspection and tests.
struct LineView {
  std::uint64_t set = 0;
  int way = 0;
  std::uint64_t tag = 0;
  std::vector<std::pair<BlockKey, BlockHandle>> pairs;  // within-line MRU first
};

/// Reserved-way key/handle cache hierarchy. Operations are strictly serial.
class KvCacheHierarchy {
 public:
  explicit KvCacheHierarchy(CacheProfile profile);

  /// Flags the first `ways` ways of every set at `level` reserved. Any
  /// reserve invalidates every reserved line and zeroes statistics, since
  /// NR may change. Throws ConfigError when ways exceeds the level's ways.
  void reserve_lines(int ways, std::size_t level);
  /// Reserves each level with its configured reserved_ways.
  void reserve_profile();
  void unreserve_lines();
  bool reserved() const { return nr_ != 0; }

  /// Reserved line count of the outermost reserved level.
  std::uint64_t nr() const { return nr_; }

  LookupResult kv_lookup(const BlockKey& key);
  /// Returns the cycles charged. Throws InputError for the invalid handle.
  std::uint64_t kv_insert(const BlockKey& key, BlockHandle handle);
  std::uint64_t kv_remove(const BlockKey& key);

  const SimStats& stats() const { return stats_; }
  const CacheProfile& profile() const { return profile_; }
  int reserved_ways(std::size_t level) const { return levels_[level].m; }

  /// Sum of hit latencies over every reserved level.
  std::uint64_t traversal_cycles() const;
  /// Reserved pair slots of the outermost reserved level.
  std::uint64_t outer_pair_capacity() const;

  /// Checks line homogeneity, set/tag derivation, LRU permutations and
  /// write-through inclusion. Returns one message per violation.
  std::vector<std::string> check_invariants() const;
  /// Runs check_invariants after every operation and counts violations.
  void set_debug_sweeps(bool on) { debug_sweeps_ = on; }
  std::uint64_t invariant_violations() const { return violations_; }
  const std::vector<std::string>& violation_log() const { return violation_log_; }

  std::vector<LineView> valid_lines(std::size_t level) const;

 private:
  struct Slot {
    BlockKey key;
    BlockHandle handle;  // invalid = empty slot
  };

  struct Line {
    bool reserved = false;
    bool valid = false;
    std::uint64_t tag = 0;  // full pseudoaddress
    std::array<Slot, kMaxPairsPerLine> slots{};
    // Occupied slot indices, MRU first.
    std::array<std::uint8_t, kMaxPairsPerLine> lru{};
    std::uint8_t lru_count = 0;

    int find_key(const BlockKey& key) const;
    void touch_slot(int slot);
    void drop_slot(int slot);
  };

  struct Level {
    LevelConfig cfg;
    int m = 0;
    std::vector<Line> lines;               // sets * m reserved ways
    std::vector<std::uint8_t> set_order;   // per set, m way indices, MRU first

    Line& line(std::uint64_t set, int way) {
      return lines[set * static_cast<std::uint64_t>(m) + way];
    }
    const Line& line(std::uint64_t set, int way) const {
      return lines[set * static_cast<std::uint64_t>(m) + way];
    }
    std::uint8_t* order(std::uint64_t set) {
      return set_order.data() + set * static_cast<std::uint64_t>(m);
    }
    int find_way(std::uint64_t pa) const;
    void touch_way(std::uint64_t set, int way);
  };

  void require_reserved() const;
  void recompute_nr();
  void reset_state();
  /// Writes `content` as the line for its tag at `level`, evicting the
  /// set's LRU reserved line when needed. Outer-level evictions are
  /// back-invalidated at inner levels.
  void install(std::size_t level, const Line& content);
  void after_op();

  CacheProfile profile_;
  std::vector<Level> levels_;
  std::vector<std::size_t> active_;  // reserved levels, innermost first
  std::uint64_t nr_ = 0;
  SimStats stats_;
  bool debug_sweeps_ = false;
  std::uint64_t violations_ = 0;
  std::vector<std::string> violation_log_;
};

/// Idealized fully associative LRU buffer of keys; inserts on miss.
class FaLruBuffer {
 public:
  explicit FaLruBuffer(std::size_t capacity);

  /// True on hit. The key becomes most recently used either way.
  bool access(const BlockKey& key);

  std::size_t capacity() const { return capacity_; }
  std::size_t size() const { return order_.size(); }

 private:
  std::size_t capacity_;
  std::list<BlockKey> order_;
  std::unordered_map<BlockKey, std::list<BlockKey>::iterator, BlockKeyHash> pos_;
};

/// Application-side wrapper: cached lookup first, then the store, then a
/// cache insert of the resolved handle.
struct BlkPtrResult {
  FetchResult fetch;
  bool cache_hit = false;
};
BlkPtrResult get_blk_ptr(KvCacheHierarchy& cache, BlockStore& store,
                         const BlockKey& key);

}  // namespace blockcache
