#include "blockcache/cost_model.hpp"

#include <unordered_map>

namespace blockcache {

void CostModelConfig::validate() const {
  if (hash_cycles < 0 || probe_cycles < 0 || insert_cycles < 0 || hash_pj < 0 ||
      probe_pj < 0) {
    throw ConfigError("cost model constants must be non-negative");
  }
  for (double e : level_access_pj) {
    if (e < 0) throw ConfigError("cost model constants must be non-negative");
  }
  if (!(access_fraction >= 0.0 && access_fraction <= 1.0)) {
    throw ConfigError("access_fraction must lie in [0, 1]");
  }
}

double overall_speedup(double access_speedup, double access_fraction) {
  if (access_fraction == 0.0) return 1.0;
  return 1.0 / ((1.0 - access_fraction) + access_fraction / access_speedup);
}

void to_json(nlohmann::json& j, const CostReport& r) {
  j = nlohmann::json{{"accesses", r.accesses},
                     {"hits", r.hits},
                     {"misses", r.misses},
                     {"removes", r.removes},
                     {"hit_rate", r.hit_rate},
                     {"mean_probe_steps", r.mean_probe_steps},
                     {"store_lookup_cycles", r.store_lookup_cycles},
                     {"baseline_cycles", r.baseline_cycles},
                     {"mechanism_cycles", r.mechanism_cycles},
                     {"access_speedup", r.access_speedup},
                     {"overall_speedup", r.overall_speedup},
                     {"baseline_energy_pj", r.baseline_energy_pj},
                     {"mechanism_energy_pj", r.mechanism_energy_pj},
                     {"energy_saving", r.energy_saving},
                     {"stale_hits", r.stale_hits}};
}

void to_json(nlohmann::json& j, const SimReport& r) {
  j = nlohmann::json{{"stats", r.stats}, {"cost", r.cost}};
}

SimReport run_trace(const AccessTrace& trace, const CacheProfile& profile,
                    const CostModelConfig& cost, const StoreStats& store_stats,
                    bool debug_sweeps) {
  cost.validate();
  KvCacheHierarchy cache(profile);
  cache.reserve_profile();
  cache.set_debug_sweeps(debug_sweeps);

  const auto level_pj = [&](std::size_t level) {
    return level < cost.level_access_pj.size() ? cost.level_access_pj[level] : 0.0;
  };

  CostReport r;
  r.mean_probe_steps = store_stats.lookups ? store_stats.mean_probe_steps() : 1.0;
  r.store_lookup_cycles = cost.hash_cycles + r.mean_probe_steps * cost.probe_cycles;
  const double store_pj = cost.hash_pj + r.mean_probe_steps * cost.probe_pj;

  double write_through_pj = 0.0;
  for (std::size_t i = 0; i < profile.levels.size(); ++i) {
    if (cache.reserved_ways(i) > 0) write_through_pj += level_pj(i);
  }

  std::unordered_map<BlockKey, BlockHandle, BlockKeyHash> handles;
  std::uint64_t next_handle = 0;
  double lookup_cycles = 0.0;
  double remove_cycles = 0.0;
  double mech_pj = 0.0;

  for (const AccessEvent& e : trace) {
    if (e.op == AccessOp::kRemove) {
      ++r.removes;
      remove_cycles += double(cache.kv_remove(e.key));
      mech_pj += write_through_pj;
      handles.erase(e.key);
      continue;
    }
    ++r.accesses;
    auto [it, fresh] = handles.try_emplace(e.key, BlockHandle{next_handle});
    if (fresh) ++next_handle;

    const LookupResult res = cache.kv_lookup(e.key);
    lookup_cycles += double(res.cycles);
    // Levels visited: up to the hit level, or every reserved level.
    for (std::size_t i = 0; i < profile.levels.size(); ++i) {
      if (cache.reserved_ways(i) == 0) continue;
      mech_pj += level_pj(i);
      if (res.hit_level >= 0 && i == static_cast<std::size_t>(res.hit_level)) break;
    }
    if (res.handle) {
      ++r.hits;
      if (*res.handle != it->second) ++r.stale_hits;
    } else {
      ++r.misses;
      cache.kv_insert(e.key, it->second);
      mech_pj += store_pj + write_through_pj;
    }
  }

  r.hit_rate = r.accesses ? double(r.hits) / double(r.accesses) : 0.0;
  r.baseline_cycles = double(r.accesses) * r.store_lookup_cycles;
  r.mechanism_cycles = lookup_cycles + remove_cycles +
                       double(r.misses) * (r.store_lookup_cycles + cost.insert_cycles);
  r.access_speedup =
      r.mechanism_cycles > 0.0 ? r.baseline_cycles / r.mechanism_cycles : 1.0;
  r.overall_speedup = overall_speedup(r.access_speedup, cost.access_fraction);
  r.baseline_energy_pj = double(r.accesses) * store_pj;
  r.mechanism_energy_pj = mech_pj;
  r.energy_saving = r.baseline_energy_pj > 0.0
                        ? 1.0 - r.mechanism_energy_pj / r.baseline_energy_pj
                        : 0.0;

  SimReport out{cache.stats(), r};
  if (debug_sweeps && cache.invariant_violations() != 0) {
    throw std::logic_error("cache invariant violated: " + cache.violation_log().front());
  }
  return out;
}

}  // namespace blockcache
