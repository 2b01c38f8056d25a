#pragma once

#include <cstdint>
#include <vector>

#include <json.hpp>

#include "blockcache/block_store.hpp"
#include "blockcache/kv_cache.hpp"
#include "blockcache/trace.hpp"

namespace blockcache {

/// Cycle and energy constants for the modeled comparison between plain
/// store lookups and the reserved-way cache. Level latencies come from the
/// cache profile.
struct CostModelConfig {
  double hash_cycles = 15.0;
  double probe_cycles = 35.0;     // per store probe step
  double insert_cycles = 4.0;     // kv_insert issue cost on a miss
  double access_fraction = 0.6;   // share of runtime spent in block access

  std::vector<double> level_access_pj{10.0, 40.0};  // by profile level
  double hash_pj = 20.0;
  double probe_pj = 150.0;

  void validate() const;
};

struct CostReport {
  std::uint64_t accesses = 0;  // Lookup + Insert events
  std::uint64_t hits = 0;
  std::uint64_t misses = 0;
  std::uint64_t removes = 0;
  double hit_rate = 0.0;
  double mean_probe_steps = 0.0;
  double store_lookup_cycles = 0.0;
  double baseline_cycles = 0.0;
  double mechanism_cycles = 0.0;
  double access_speedup = 1.0;
  double overall_speedup = 1.0;
  double baseline_energy_pj = 0.0;
  double mechanism_energy_pj = 0.0;
  double energy_saving = 0.0;  // 1 - mechanism / baseline
  std::uint64_t stale_hits = 0;  // cached handle differed from the store's
};

void to_json(nlohmann::json& j, const CostReport& r);

struct SimReport {
  SimStats stats;
  CostReport cost;
};

void to_json(nlohmann::json& j, const SimReport& r);

/// Amdahl combination of the access speedup with the access fraction.
double overall_speedup(double access_speedup, double access_fraction);

/// Replays the trace through the cached lookup protocol: Lookup and Insert
/// events look up the cache and, when absent, pay the store cost and insert
/// the resolved handle; Remove events remove the key. Handles are synthetic:
/// a fresh one per key, reissued after a remove.
SimReport run_trace(const AccessTrace& trace, const CacheProfile& profile,
                    const CostModelConfig& cost, const StoreStats& store_stats,
                    bool debug_sweeps = false);

}  // namespace blockcache
