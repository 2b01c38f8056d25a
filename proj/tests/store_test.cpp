#include <doctest.h>

#include <map>
#include <memory>
#include <random>

#include "blockcache/flat_hta_store.hpp"
#include "blockcache/hash_store.hpp"
#include "blockcache/octree_store.hpp"

using namespace blockcache;

namespace {

std::vector<std::unique_ptr<BlockStore>> all_stores(std::uint64_t buckets = 64) {
  std::vector<std::unique_ptr<BlockStore>> v;
  v.push_back(std::make_unique<HashStore>(HashStoreConfig{buckets}, 4, 0));
  v.push_back(std::make_unique<OctreeStore>(OctreeConfig{64}, 4, 0));
  v.push_back(std::make_unique<FlatHtaStore>(FlatHtaConfig{buckets, 3, 64}, 4, 0));
  return v;
}

BlockKey random_key(std::mt19937_64& rng, int half) {
  const auto c = [&] { return static_cast<std::int32_t>(rng() % (2 * half)) - half; };
  return {c(), c(), c()};
}

}  // namespace

TEST_CASE("empty store lookups are absent") {
  for (auto& s : all_stores()) {
    CHECK_FALSE(s->get_block({1, 2, 3}).has_value());
    CHECK(s->stats().lookups == 1);
    CHECK(s->stats().probe_steps >= 1);
  }
}

TEST_CASE("get_or_allocate is idempotent and injective") {
  for (auto& s : all_stores()) {
    INFO(s->kind());
    const auto a = s->get_or_allocate({1, 2, 3});
    CHECK(a.allocated);
    const auto again = s->get_or_allocate({1, 2, 3});
    CHECK_FALSE(again.allocated);
    CHECK(again.handle == a.handle);
    const auto b = s->get_or_allocate({3, 2, 1});
    CHECK(b.handle != a.handle);
    CHECK(s->get_block({1, 2, 3}) == a.handle);
    CHECK(s->stats().allocations == 2);
    // Fresh blocks are zero-initialized.
    for (const Voxel& v : s->block(b.handle).voxels) {
      CHECK(v.sdf == 0.0f);
      CHECK(v.weight == 0.0f);
    }
  }
}

TEST_CASE("remove_block") {
  for (auto& s : all_stores()) {
    CHECK_FALSE(s->remove_block({0, 0, 0}));
    const auto a = s->get_or_allocate({0, 0, 0});
    CHECK(s->remove_block({0, 0, 0}));
    CHECK_FALSE(s->get_block({0, 0, 0}).has_value());
    const auto b = s->get_or_allocate({0, 0, 0});
    CHECK(b.allocated);
    CHECK(b.handle != a.handle);  // retired handles are not reissued
    CHECK(s->stats().removals == 1);
    CHECK_THROWS_AS(s->block(a.handle), InputError);
  }
}

TEST_CASE("arena budget raises CapacityError") {
  HashStore s(HashStoreConfig{16}, 2, 3);
  s.get_or_allocate({0, 0, 0});
  s.get_or_allocate({1, 0, 0});
  s.get_or_allocate({2, 0, 0});
  CHECK_THROWS_AS(s.get_or_allocate({3, 0, 0}), CapacityError);
  s.remove_block({0, 0, 0});
  CHECK_NOTHROW(s.get_or_allocate({3, 0, 0}));
}

TEST_CASE("10^4 random operations agree with std::map for every store") {
  for (auto& s : all_stores(32)) {
    INFO(s->kind());
    std::mt19937_64 rng(99);
    std::map<BlockKey, BlockHandle> oracle;
    for (int i = 0; i < 10000; ++i) {
      const BlockKey k = random_key(rng, 6);
      switch (rng() % 3) {
        case 0: {
          const auto got = s->get_block(k);
          const auto it = oracle.find(k);
          REQUIRE(got.has_value() == (it != oracle.end()));
          if (got) REQUIRE(*got == it->second);
          break;
        }
        case 1: {
          const auto r = s->get_or_allocate(k);
          const auto [it, fresh] = oracle.emplace(k, r.handle);
          REQUIRE(r.allocated == fresh);
          REQUIRE(r.handle == it->second);
          break;
        }
        default:
          REQUIRE(s->remove_block(k) == (oracle.erase(k) == 1));
      }
      REQUIRE(s->size() == oracle.size());
    }
    CHECK(s->stats().probe_steps >= s->stats().lookups);
  }
}

TEST_CASE("handles stay valid across unrelated operations") {
  for (auto& s : all_stores(8)) {
    const auto a = s->get_or_allocate({1, 1, 1});
    s->block(a.handle).voxels[5].sdf = 0.25f;
    for (int i = 0; i < 500; ++i) s->get_or_allocate({i % 30 - 15, i / 30 - 8, 3});
    for (int i = 0; i < 200; ++i) s->remove_block({i % 30 - 15, i / 30 - 8, 3});
    CHECK(s->get_block({1, 1, 1}) == a.handle);
    CHECK(s->block(a.handle).voxels[5].sdf == 0.25f);
  }
}

TEST_CASE("octree probes exactly depth nodes for present keys") {
  OctreeStore s(OctreeConfig{256}, 8, 0);
  CHECK(s.depth() == 8);
  std::mt19937_64 rng(4);
  std::vector<BlockKey> keys;
  for (int i = 0; i < 300; ++i) {
    const BlockKey k = random_key(rng, 128);
    s.get_or_allocate(k);
    keys.push_back(k);
  }
  s.reset_stats();
  for (const auto& k : keys) REQUIRE(s.get_block(k).has_value());
  CHECK(s.stats().probe_steps == keys.size() * 8);
}

TEST_CASE("octree rejects keys outside its root volume") {
  OctreeStore s(OctreeConfig{16}, 8, 0);
  CHECK_NOTHROW(s.get_or_allocate({-8, 7, 0}));
  CHECK_THROWS_AS(s.get_or_allocate({8, 0, 0}), InputError);
  CHECK_THROWS_AS(s.get_block({0, -9, 0}), InputError);
  CHECK_THROWS_AS(OctreeStore(OctreeConfig{12}, 8, 0), ConfigError);
  CHECK_THROWS_AS(OctreeStore(OctreeConfig{1}, 8, 0), ConfigError);
}

TEST_CASE("flat HTA spills full buckets into the overflow map") {
  FlatHtaStore s(FlatHtaConfig{1, 3, 64}, 8, 0);
  for (int i = 0; i < 5; ++i) s.get_or_allocate({i, 0, 0});
  CHECK(s.overflow_entries() == 2);
  CHECK(s.memory_footprint().overflow_entries == 2);
  for (int i = 0; i < 5; ++i) CHECK(s.get_block({i, 0, 0}).has_value());
  // Freeing an in-line slot does not strand the overflowed keys.
  s.remove_block({0, 0, 0});
  for (int i = 1; i < 5; ++i) CHECK(s.get_block({i, 0, 0}).has_value());
  CHECK_THROWS_AS(FlatHtaStore(FlatHtaConfig{4, 4, 64}, 8, 0), ConfigError);
}

TEST_CASE("chained hash comparisons per hit grow with load factor") {
  const std::uint64_t buckets = 1024;
  double previous = 0.0;
  for (double lf : {0.25, 0.5, 1.0, 2.0}) {
    HashStore s(HashStoreConfig{buckets}, 2, 0);
    std::mt19937_64 rng(17);
    std::vector<BlockKey> keys;
    while (s.size() < static_cast<std::uint64_t>(lf * buckets)) {
      const BlockKey k = random_key(rng, 200);
      if (s.get_or_allocate(k).allocated) keys.push_back(k);
    }
    s.reset_stats();
    for (const auto& k : keys) REQUIRE(s.get_block(k).has_value());
    const double per_hit = double(s.stats().key_comparisons) / double(keys.size());
    CHECK(per_hit > previous);
    CHECK(s.load_factor() == doctest::Approx(lf));
    previous = per_hit;
  }
}

TEST_CASE("footprint model formulas") {
  using namespace footprint_model;
  FlatHtaStore hta(FlatHtaConfig{4096, 3, 64}, 8, 0);
  CHECK(hta.memory_footprint().model_bytes_index == 262144);
  CHECK(hta.memory_footprint().model_bytes_payload == 0);

  HashStore hash(HashStoreConfig{1024}, 8, 0);
  CHECK(hash.memory_footprint().model_bytes_index == 1024 * 8);
  CHECK(hash.memory_footprint().model_bytes_payload == 0);

  hash.get_or_allocate({0, 0, 0});
  hash.get_or_allocate({1, 0, 0});
  const auto f = hash.memory_footprint();
  CHECK(f.model_bytes_index == 1024 * 8 + 2 * 32);
  CHECK(f.model_bytes_payload == 2 * 512 * sizeof(Voxel));
  CHECK(f.entries == 2);
  CHECK(f.load_factor == doctest::Approx(2.0 / 1024));

  OctreeStore oct(OctreeConfig{4}, 8, 0);  // depth 2: root + one child
  oct.get_or_allocate({0, 0, 0});
  CHECK(oct.memory_footprint().model_bytes_index == 2 * 64);
  CHECK(oct.memory_footprint().bucket_count_or_depth == 2);

  nlohmann::json j = f;
  for (const char* key : {"store_kind", "bucket_count_or_depth", "entries", "load_factor",
                          "model_bytes_index", "model_bytes_payload", "overflow_entries"}) {
    CHECK(j.contains(key));
  }
}

TEST_CASE("make_store builds each kind") {
  for (StoreKind k : {StoreKind::kHash, StoreKind::kOctree, StoreKind::kFlatHta}) {
    StoreConfig c;
    c.kind = k;
    c.bucket_count = 64;
    c.root_extent_blocks = 64;
    auto s = make_store(c);
    CHECK(s->kind() == to_string(k));
    CHECK(parse_store_kind(s->kind()) == k);
  }
  CHECK_THROWS_AS(parse_store_kind("btree"), ConfigError);
}
