#include <doctest.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <list>
#include <map>
#include <random>
#include <set>

#include "blockcache/hash_store.hpp"
#include "blockcache/kv_cache.hpp"
#include "support/reference_cache.hpp"

using namespace blockcache;
using namespace blockcache::testing;

namespace {

BlockHandle H(std::uint64_t v) { return BlockHandle{v}; }

}  // namespace

TEST_CASE("level geometry") {
  LevelConfig l;
  l.line_bytes = 64;
  CHECK(l.pairs_per_line() == 3);
  l.line_bytes = 128;
  CHECK(l.pairs_per_line() == 6);
  l.sets = 64;
  l.reserved_ways = 1;
  CHECK(l.reserved_lines() == 64);
  l.sets = 48;
  CHECK_THROWS_AS(l.validate(), ConfigError);
  l.sets = 64;
  l.line_bytes = 96;
  CHECK_THROWS_AS(l.validate(), ConfigError);
  l.line_bytes = 64;
  l.reserved_ways = 5;
  CHECK_THROWS_AS(l.validate(), ConfigError);
  CHECK_THROWS_AS(profile_by_name("tpu"), ConfigError);
}

TEST_CASE("reserve lifecycle") {
  KvCacheHierarchy cache(cpu_table5_profile());
  CHECK_FALSE(cache.reserved());
  CHECK_THROWS_AS(cache.kv_lookup({0, 0, 0}), ConfigError);
  CHECK_NOTHROW(cache.unreserve_lines());

  cache.reserve_lines(1, 0);
  CHECK(cache.nr() == 64);
  CHECK_FALSE(cache.kv_lookup({1, 2, 3}).handle);

  cache.reserve_lines(2, 1);
  CHECK(cache.nr() == 1024);  // L2: 512 sets x 2 ways
  CHECK(cache.outer_pair_capacity() == 3072);
  CHECK(cache.traversal_cycles() == 5);
  CHECK_THROWS_AS(cache.reserve_lines(9, 1), ConfigError);
  CHECK_THROWS_AS(cache.reserve_lines(1, 2), ConfigError);

  cache.kv_insert({1, 2, 3}, H(7));
  CHECK(cache.stats().kv_inserts == 1);
  cache.reserve_profile();
  CHECK(cache.stats().kv_inserts == 0);
  CHECK_FALSE(cache.kv_lookup({1, 2, 3}).handle);

  cache.unreserve_lines();
  CHECK_THROWS_AS(cache.kv_lookup({1, 2, 3}), ConfigError);
  CHECK_THROWS_AS(cache.kv_insert({1, 2, 3}, H(1)), ConfigError);
  CHECK_THROWS_AS(cache.kv_remove({1, 2, 3}), ConfigError);
  cache.reserve_profile();
  CHECK(cache.nr() == 1024);

  KvCacheHierarchy gpu(gpu_table6_profile());
  gpu.reserve_profile();
  CHECK(gpu.nr() == 256);
  CHECK(gpu.outer_pair_capacity() == 256 * 6);
}

TEST_CASE("pseudoaddress") {
  CHECK(pseudoaddress({0, 0, 0}, 1024) == hash_mix(0) % 1024);
  CHECK(pseudoaddress({0, 0, 0}, 1024) == 0);
  CHECK_THROWS_AS(pseudoaddress({0, 0, 0}, 0), ConfigError);

  // Chi-square over 4096 classes; bound is dof + 5 standard deviations.
  const std::uint64_t nr = 4096;
  std::vector<std::uint64_t> counts(nr, 0);
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<std::int32_t> coord(-100000, 100000);
  const int n = 100000;
  for (int i = 0; i < n; ++i) ++counts[pseudoaddress({coord(rng), coord(rng), coord(rng)}, nr)];
  const double expected = double(n) / nr;
  double chi2 = 0;
  for (auto c : counts) chi2 += (c - expected) * (c - expected) / expected;
  const double dof = nr - 1;
  CHECK(chi2 < dof + 5 * std::sqrt(2 * dof));

}

TEST_CASE("lookup and insert basics") {
  KvCacheHierarchy cache(cpu_table5_profile());
  cache.reserve_profile();
  const BlockKey k{4, -1, 9};

  const LookupResult miss = cache.kv_lookup(k);
  CHECK_FALSE(miss.handle);
  CHECK(miss.hit_level == -1);
  CHECK(miss.cycles == 5);
  CHECK(cache.stats().levels[0].entire_line_read_misses == 1);
  CHECK(cache.stats().levels[1].entire_line_read_misses == 1);
  CHECK(cache.stats().lookup_misses == 1);

  CHECK(cache.kv_insert(k, H(42)) == 5);
  for (std::size_t l = 0; l < 2; ++l) {
    const auto lines = cache.valid_lines(l);
    REQUIRE(lines.size() == 1);
    CHECK(lines[0].tag == pseudoaddress(k, 1024));
    REQUIRE(lines[0].pairs.size() == 1);
    CHECK(lines[0].pairs[0].second == H(42));
  }
  const LookupResult hit = cache.kv_lookup(k);
  REQUIRE(hit.handle);
  CHECK(*hit.handle == H(42));
  CHECK(hit.hit_level == 0);
  CHECK(hit.cycles == 1);
  CHECK(cache.stats().levels[0].within_line_read_hits == 1);
  CHECK(cache.stats().overall_hits == 1);

  // Same pair again: write hit, nothing changes.
  cache.kv_insert(k, H(42));
  CHECK(cache.stats().levels[0].within_line_write_hits == 1);
  CHECK(cache.valid_lines(0)[0].pairs.size() == 1);
  CHECK_THROWS_AS(cache.kv_insert(k, BlockHandle{}), InputError);

  // Lookups never consult memory: a key absent from the cache is absent.
  CHECK_FALSE(cache.kv_lookup({100, 100, 100}).handle);
  CHECK(cache.stats().kv_lookups == 3);
  CHECK(cache.stats().kv_lookups == cache.stats().overall_hits + cache.stats().lookup_misses);
}

TEST_CASE("within-line eviction of k1 by k4") {
  const auto pa_keys = keys_by_pa(1024, {77}, 7, 3);
  const auto& k = pa_keys.at(77);
  KvCacheHierarchy cache(cpu_table5_profile());
  cache.reserve_profile();
  for (int i = 0; i < 4; ++i) cache.kv_insert(k[i], H(i + 1));
  CHECK_FALSE(cache.kv_lookup(k[0]).handle);
  for (int i = 1; i < 4; ++i) CHECK(cache.kv_lookup(k[i]).handle == H(i + 1));
  CHECK(cache.valid_lines(0).at(0).pairs.size() == 3);
  CHECK(cache.valid_lines(1).at(0).pairs.size() == 3);
  // The tag matched, so the miss was resolved at L1 without forwarding.
  CHECK(cache.stats().levels[0].within_line_read_misses == 1);
  CHECK(cache.stats().levels[1].entire_line_read_hits == 0);

  // Recency decides the victim: touch k2 and then k5 evicts k3.
  cache.kv_lookup(k[1]);
  cache.kv_insert(k[4], H(5));
  CHECK(cache.kv_lookup(k[1]).handle == H(2));
  CHECK_FALSE(cache.kv_lookup(k[2]).handle);

  const auto gpu_keys = keys_by_pa(256, {19}, 7, 4).at(19);
  KvCacheHierarchy gpu(gpu_table6_profile());
  gpu.reserve_profile();
  for (int i = 0; i < 6; ++i) gpu.kv_insert(gpu_keys[i], H(i + 1));
  CHECK(gpu.valid_lines(0).at(0).pairs.size() == 6);
  for (int i = 0; i < 6; ++i) CHECK(gpu.kv_lookup(gpu_keys[i]).handle == H(i + 1));
  gpu.kv_insert(gpu_keys[6], H(7));
  CHECK_FALSE(gpu.kv_lookup(gpu_keys[0]).handle);
  CHECK(gpu.valid_lines(0).at(0).pairs.size() == 6);
}

TEST_CASE("L2 hit copies the line into L1") {
  // Three pseudoaddresses on L1 set 5 (m = 1) and distinct L2 sets.
  const auto groups = keys_by_pa(1024, {5, 69, 133}, 2, 9);
  const BlockKey a = groups.at(5)[0], a2 = groups.at(5)[1];
  const BlockKey b = groups.at(69)[0];
  KvCacheHierarchy cache(cpu_table5_profile());
  cache.reserve_profile();
  cache.kv_insert(a, H(1));
  cache.kv_insert(a2, H(2));
  cache.kv_insert(b, H(3));  // displaces a's line from L1 only
  CHECK(cache.stats().levels[0].line_evictions == 1);
  CHECK(cache.stats().levels[1].line_evictions == 0);

  const LookupResult r = cache.kv_lookup(a);
  CHECK(r.handle == H(1));
  CHECK(r.hit_level == 1);
  CHECK(r.cycles == 5);
  CHECK(cache.stats().levels[0].writebacks == 1);
  const auto l1 = cache.valid_lines(0);
  REQUIRE(l1.size() == 1);
  CHECK(l1[0].tag == 5);
  REQUIRE(l1[0].pairs.size() == 2);
  CHECK(l1[0].pairs[0].first == a);  // LRU bits travel with the line
  CHECK(cache.kv_lookup(a2).hit_level == 0);
  CHECK(cache.kv_lookup(b).hit_level == 1);
  CHECK(cache.check_invariants().empty());
}

TEST_CASE("remove") {
  const auto ks = keys_by_pa(1024, {300}, 3, 21).at(300);
  KvCacheHierarchy cache(cpu_table5_profile());
  cache.reserve_profile();

  cache.kv_remove(ks[0]);  // never inserted
  CHECK(cache.valid_lines(0).empty());
  CHECK(cache.valid_lines(1).empty());
  CHECK(cache.stats().kv_removes == 1);

  cache.kv_insert(ks[0], H(1));
  cache.kv_insert(ks[1], H(2));
  cache.kv_remove(ks[0]);
  CHECK_FALSE(cache.kv_lookup(ks[0]).handle);
  CHECK(cache.kv_lookup(ks[1]).handle == H(2));
  for (std::size_t l = 0; l < 2; ++l) CHECK(cache.valid_lines(l).at(0).pairs.size() == 1);

  cache.kv_insert(ks[0], H(9));
  CHECK(cache.kv_lookup(ks[0]).handle == H(9));
  cache.kv_remove(ks[2]);  // same line, absent key
  CHECK(cache.valid_lines(0).at(0).pairs.size() == 2);
  CHECK(cache.check_invariants().empty());

  // The freed slot is reused before any live pair is evicted.
  cache.kv_insert(ks[2], H(3));
  CHECK(cache.kv_lookup(ks[0]).handle == H(9));
  CHECK(cache.kv_lookup(ks[1]).handle == H(2));
}

TEST_CASE("oracle equivalence on conflicting pseudoaddresses") {
  // CPU: 32 classes on two L1 sets (16 lines each compete for one way).
  std::set<std::uint64_t> cpu_pa;
  for (std::uint64_t j = 0; j < 16; ++j) {
    cpu_pa.insert(3 + 64 * j);
    cpu_pa.insert(7 + 64 * j);
  }
  std::vector<BlockKey> cpu_keys;
  for (const auto& [pa, ks] : keys_by_pa(1024, cpu_pa, 6, 1)) {
    cpu_keys.insert(cpu_keys.end(), ks.begin(), ks.end());
  }
  const auto t0 = std::chrono::steady_clock::now();
  const OracleRun cpu = run_oracle(cpu_table5_profile(), cpu_keys, 150000, 5);
  CHECK(cpu.mismatches == 0);
  CHECK(cpu.outer_hits > 1000);
  CHECK(cpu.evictions > 1000);

  std::set<std::uint64_t> gpu_pa;
  for (std::uint64_t j = 0; j < 32; ++j) gpu_pa.insert(8 * j + 1);
  std::vector<BlockKey> gpu_keys;
  for (const auto& [pa, ks] : keys_by_pa(256, gpu_pa, 10, 2)) {
    gpu_keys.insert(gpu_keys.end(), ks.begin(), ks.end());
  }
  const OracleRun gpu = run_oracle(gpu_table6_profile(), gpu_keys, 150000, 6);
  CHECK(gpu.mismatches == 0);
  CHECK(gpu.hits > 10000);
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  CHECK(secs < 30.0);
}

TEST_CASE("oracle equivalence with L2 evictions") {
  // A custom hierarchy where the outer level conflicts as well.
  CacheProfile p{"small", {LevelConfig{"L1", 4, 2, 1, 64, 1},
                           LevelConfig{"L2", 8, 4, 2, 64, 3}}};
  std::mt19937_64 rng(8);
  std::uniform_int_distribution<std::int32_t> coord(-50, 50);
  std::vector<BlockKey> keys;
  for (int i = 0; i < 120; ++i) keys.push_back({coord(rng), coord(rng), coord(rng)});
  const OracleRun r = run_oracle(p, keys, 100000, 9);
  CHECK(r.mismatches == 0);
  CHECK(r.outer_hits > 100);
}

TEST_CASE("debug sweeps find no violations") {
  for (const auto& profile : {cpu_table5_profile(), gpu_table6_profile()}) {
    KvCacheHierarchy cache(profile);
    cache.reserve_profile();
    cache.set_debug_sweeps(true);
    std::mt19937_64 rng(17);
    std::uniform_int_distribution<std::int32_t> coord(-40, 40);
    std::uniform_int_distribution<int> op(0, 9);
    for (int i = 0; i < 3000; ++i) {
      const BlockKey k{coord(rng), coord(rng), coord(rng) / 8};
      const int o = op(rng);
      if (o < 5) cache.kv_lookup(k);
      else if (o < 9) cache.kv_insert(k, H(std::uint64_t(i) + 1));
      else cache.kv_remove(k);
    }
    CHECK(cache.invariant_violations() == 0);
    for (std::size_t l = 0; l < profile.levels.size(); ++l) {
      for (const auto& line : cache.valid_lines(l)) {
        for (const auto& [key, h] : line.pairs) {
          REQUIRE(pseudoaddress(key, cache.nr()) == line.tag);
        }
      }
    }
  }
}

TEST_CASE("fully associative LRU buffer") {
  const BlockKey A{1, 0, 0}, B{2, 0, 0};
  FaLruBuffer one(1);
  CHECK_FALSE(one.access(A));
  CHECK_FALSE(one.access(B));
  CHECK_FALSE(one.access(A));
  FaLruBuffer two(2);
  CHECK_FALSE(two.access(A));
  CHECK_FALSE(two.access(B));
  CHECK(two.access(A));
  CHECK_THROWS_AS(FaLruBuffer(0), ConfigError);

  std::mt19937_64 rng(4);
  std::geometric_distribution<int> g(0.05);
  std::vector<BlockKey> trace;
  for (int i = 0; i < 5000; ++i) trace.push_back({g(rng), 0, 0});
  std::uint64_t prev = 0;
  for (std::size_t cap : {1, 2, 3, 5, 8, 13, 21, 34, 55}) {
    FaLruBuffer buf(cap);
    std::uint64_t hits = 0;
    for (const auto& k : trace) hits += buf.access(k);
    CHECK(hits >= prev);
    CHECK(buf.size() <= cap);
    prev = hits;
  }
}

TEST_CASE("get_blk_ptr protocol") {
  KvCacheHierarchy cache(cpu_table5_profile());
  cache.reserve_profile();
  HashStore store(HashStoreConfig{256}, 8, 0);
  const BlockKey k{3, 3, 3};
  const BlkPtrResult first = get_blk_ptr(cache, store, k);
  CHECK_FALSE(first.cache_hit);
  CHECK(first.fetch.allocated);
  const BlkPtrResult second = get_blk_ptr(cache, store, k);
  CHECK(second.cache_hit);
  CHECK(second.fetch.handle == first.fetch.handle);
  CHECK(store.stats().lookups == 1);
}
