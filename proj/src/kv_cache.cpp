#include "blockcache/kv_cache.hpp"

#include <algorithm>
#include <bit>
#include <sstream>

namespace blockcache {

void LevelConfig::validate() const {
  if (sets == 0 || !std::has_single_bit(sets)) {
    throw ConfigError(name + ": sets must be a power of two");
  }
  if (ways < 1 || ways > 255) throw ConfigError(name + ": ways must be in [1, 255]");
  if (reserved_ways < 0 || reserved_ways > ways) {
    throw ConfigError(name + ": reserved_ways must be in [0, ways]");
  }
  if (line_bytes != 64 && line_bytes != 128) {
    throw ConfigError(name + ": line_bytes must be 64 or 128");
  }
  if (hit_latency_cycles < 0) throw ConfigError(name + ": negative latency");
}

void CacheProfile::validate() const {
  if (levels.empty()) throw ConfigError("cache profile needs at least one level");
  for (const auto& l : levels) {
    l.validate();
    // Lines move between levels whole.
    if (l.line_bytes != levels.front().line_bytes) {
      throw ConfigError("all cache levels must share one line size");
    }
  }
}

CacheProfile cpu_table5_profile() {
  return {"cpu-table5",
          {LevelConfig{"L1", 64, 4, 1, 64, 1}, LevelConfig{"L2", 512, 8, 2, 64, 4}}};
}

CacheProfile gpu_table6_profile() {
  return {"gpu-table6", {LevelConfig{"L1", 256, 4, 1, 128, 28}}};
}

CacheProfile profile_by_name(const std::string& name) {
  if (name == "cpu-table5") return cpu_table5_profile();
  if (name == "gpu-table6") return gpu_table6_profile();
  throw ConfigError("unknown cache profile '" + name + "'");
}

std::uint64_t pseudoaddress(const BlockKey& key, std::uint64_t nr) {
  if (nr == 0) throw ConfigError("pseudoaddress needs NR >= 1");
  return spatial_hash(key) % nr;
}

// ---------------------------------------------------------------------------

int KvCacheHierarchy::Line::find_key(const BlockKey& key) const {
  for (int i = 0; i < lru_count; ++i) {
    const int s = lru[i];
    if (slots[s].key == key) return s;
  }
  return -1;
}

void KvCacheHierarchy::Line::touch_slot(int slot) {
  int pos = 0;
  while (pos < lru_count && lru[pos] != slot) ++pos;
  if (pos == lru_count) ++lru_count;  // newly occupied
  for (; pos > 0; --pos) lru[pos] = lru[pos - 1];
  lru[0] = static_cast<std::uint8_t>(slot);
}

void KvCacheHierarchy::Line::drop_slot(int slot) {
  int pos = 0;
  while (pos < lru_count && lru[pos] != slot) ++pos;
  if (pos == lru_count) return;
  for (; pos + 1 < lru_count; ++pos) lru[pos] = lru[pos + 1];
  --lru_count;
  slots[slot] = {};
}

int KvCacheHierarchy::Level::find_way(std::uint64_t pa) const {
  const std::uint64_t set = pa & (cfg.sets - 1);
  for (int w = 0; w < m; ++w) {
    const Line& l = line(set, w);
    if (l.valid && l.tag == pa) return w;
  }
  return -1;
}

void KvCacheHierarchy::Level::touch_way(std::uint64_t set, int way) {
  std::uint8_t* o = order(set);
  int pos = 0;
  while (o[pos] != way) ++pos;
  for (; pos > 0; --pos) o[pos] = o[pos - 1];
  o[0] = static_cast<std::uint8_t>(way);
}

KvCacheHierarchy::KvCacheHierarchy(CacheProfile profile)
    : profile_(std::move(profile)) {
  profile_.validate();
  for (const auto& cfg : profile_.levels) {
    Level l;
    l.cfg = cfg;
    levels_.push_back(std::move(l));
  }
  reset_state();
}

void KvCacheHierarchy::reset_state() {
  active_.clear();
  for (std::size_t i = 0; i < levels_.size(); ++i) {
    Level& l = levels_[i];
    l.lines.assign(l.cfg.sets * static_cast<std::uint64_t>(l.m), Line{});
    for (auto& line : l.lines) line.reserved = true;
    l.set_order.resize(l.lines.size());
    for (std::uint64_t s = 0; s < l.cfg.sets; ++s) {
      for (int w = 0; w < l.m; ++w) l.order(s)[w] = static_cast<std::uint8_t>(w);
    }
    if (l.m > 0) active_.push_back(i);
  }
  stats_ = {};
  for (const auto& l : levels_) {
    stats_.level_names.push_back(l.cfg.name);
    stats_.levels.emplace_back();
  }
  violations_ = 0;
  violation_log_.clear();
  recompute_nr();
}

void KvCacheHierarchy::recompute_nr() {
  nr_ = active_.empty() ? 0 : levels_[active_.back()].cfg.sets *
                                  static_cast<std::uint64_t>(levels_[active_.back()].m);
}

void KvCacheHierarchy::reserve_lines(int ways, std::size_t level) {
  if (level >= levels_.size()) throw ConfigError("no such cache level");
  if (ways < 0 || ways > levels_[level].cfg.ways) {
    throw ConfigError(levels_[level].cfg.name +
                      ": cannot reserve more ways than the level has");
  }
  levels_[level].m = ways;
  reset_state();
}

void KvCacheHierarchy::reserve_profile() {
  for (auto& l : levels_) l.m = l.cfg.reserved_ways;
  reset_state();
}

void KvCacheHierarchy::unreserve_lines() {
  for (auto& l : levels_) l.m = 0;
  reset_state();
}

void KvCacheHierarchy::require_reserved() const {
  if (!reserved()) throw ConfigError("no reserved cache lines; call reserve_lines");
}

std::uint64_t KvCacheHierarchy::traversal_cycles() const {
  std::uint64_t c = 0;
  for (std::size_t i : active_) c += levels_[i].cfg.hit_latency_cycles;
  return c;
}

std::uint64_t KvCacheHierarchy::outer_pair_capacity() const {
  if (active_.empty()) return 0;
  return nr_ * static_cast<std::uint64_t>(levels_[active_.back()].cfg.pairs_per_line());
}

void KvCacheHierarchy::install(std::size_t level, const Line& content) {
  Level& lv = levels_[level];
  const std::uint64_t set = content.tag & (lv.cfg.sets - 1);
  int way = lv.find_way(content.tag);
  if (way < 0) {
    for (int w = 0; w < lv.m && way < 0; ++w) {
      if (!lv.line(set, w).valid) way = w;
    }
    if (way < 0) {
      way = lv.order(set)[lv.m - 1];
      const std::uint64_t victim = lv.line(set, way).tag;
      ++stats_.levels[level].line_evictions;
      // Inclusion: an inner copy may not outlive the outer line.
      for (std::size_t i : active_) {
        if (i >= level) break;
        const int w = levels_[i].find_way(victim);
        if (w >= 0) {
          levels_[i].line(victim & (levels_[i].cfg.sets - 1), w).valid = false;
        }
      }
    }
  }
  Line& dst = lv.line(set, way);
  dst = content;
  dst.reserved = true;
  dst.valid = true;
  lv.touch_way(set, way);
}

LookupResult KvCacheHierarchy::kv_lookup(const BlockKey& key) {
  require_reserved();
  ++stats_.kv_lookups;
  const std::uint64_t pa = pseudoaddress(key, nr_);
  LookupResult result;
  for (std::size_t a = 0; a < active_.size(); ++a) {
    const std::size_t li = active_[a];
    Level& lv = levels_[li];
    LevelStats& st = stats_.levels[li];
    result.cycles += static_cast<std::uint64_t>(lv.cfg.hit_latency_cycles);
    const int way = lv.find_way(pa);
    if (way < 0) {
      ++st.entire_line_read_misses;
      continue;
    }
    ++st.entire_line_read_hits;
    const std::uint64_t set = pa & (lv.cfg.sets - 1);
    lv.touch_way(set, way);
    Line& line = lv.line(set, way);
    const int slot = line.find_key(key);
    if (slot < 0) {
      ++st.within_line_read_misses;
      break;
    }
    ++st.within_line_read_hits;
    line.touch_slot(slot);
    result.handle = line.slots[slot].handle;
    result.hit_level = static_cast<int>(li);
    // Found outside the innermost level: copy the line inward.
    const Line copy = line;
    for (std::size_t b = a; b-- > 0;) {
      install(active_[b], copy);
      ++stats_.levels[active_[b]].writebacks;
    }
    ++stats_.overall_hits;
    after_op();
    return result;
  }
  ++stats_.lookup_misses;
  after_op();
  return result;
}

std::uint64_t KvCacheHierarchy::kv_insert(const BlockKey& key, BlockHandle handle) {
  if (!handle.valid()) {
    throw InputError("kv_insert with the invalid handle; use kv_remove");
  }
  require_reserved();
  ++stats_.kv_inserts;
  const std::uint64_t pa = pseudoaddress(key, nr_);
  std::uint64_t cycles = 0;

  Line line;
  std::size_t resolved = active_.front();
  bool found = false;
  for (std::size_t li : active_) {
    Level& lv = levels_[li];
    cycles += static_cast<std::uint64_t>(lv.cfg.hit_latency_cycles);
    const int way = lv.find_way(pa);
    if (way < 0) {
      ++stats_.levels[li].entire_line_write_misses;
      continue;
    }
    ++stats_.levels[li].entire_line_write_hits;
    line = lv.line(pa & (lv.cfg.sets - 1), way);
    resolved = li;
    found = true;
    break;
  }

  const int ppl = levels_[active_.back()].cfg.pairs_per_line();
  if (found) {
    int slot = line.find_key(key);
    if (slot >= 0) {
      ++stats_.levels[resolved].within_line_write_hits;
    } else {
      ++stats_.levels[resolved].within_line_write_misses;
      for (int s = 0; s < ppl && slot < 0; ++s) {
        if (!line.slots[s].handle.valid()) slot = s;
      }
      if (slot < 0) {
        slot = line.lru[line.lru_count - 1];
        line.drop_slot(slot);
      }
    }
    line.slots[slot] = {key, handle};
    line.touch_slot(slot);
  } else {
    line = Line{};
    line.tag = pa;
    line.slots[0] = {key, handle};
    line.touch_slot(0);
  }

  // Write-through, outermost first so back-invalidations land before the
  // inner installs pick their victims.
  for (std::size_t a = active_.size(); a-- > 0;) {
    const std::size_t li = active_[a];
    install(li, line);
    if (li != resolved) ++stats_.levels[li].writebacks;
  }
  after_op();
  return cycles;
}

std::uint64_t KvCacheHierarchy::kv_remove(const BlockKey& key) {
  require_reserved();
  ++stats_.kv_removes;
  const std::uint64_t pa = pseudoaddress(key, nr_);
  std::uint64_t cycles = 0;
  bool present = false;
  for (std::size_t li : active_) {
    Level& lv = levels_[li];
    cycles += static_cast<std::uint64_t>(lv.cfg.hit_latency_cycles);
    const int way = lv.find_way(pa);
    if (way < 0) {
      ++stats_.levels[li].entire_line_write_misses;
      continue;
    }
    ++stats_.levels[li].entire_line_write_hits;
    present = lv.line(pa & (lv.cfg.sets - 1), way).find_key(key) >= 0;
    ++(present ? stats_.levels[li].within_line_write_hits
               : stats_.levels[li].within_line_write_misses);
    break;
  }
  if (present) {
    for (std::size_t li : active_) {
      Level& lv = levels_[li];
      const int way = lv.find_way(pa);
      if (way < 0) continue;
      Line& line = lv.line(pa & (lv.cfg.sets - 1), way);
      const int slot = line.find_key(key);
      if (slot >= 0) line.drop_slot(slot);
    }
  }
  after_op();
  return cycles;
}

void KvCacheHierarchy::after_op() {
  if (!debug_sweeps_) return;
  auto v = check_invariants();
  violations_ += v.size();
  for (auto& msg : v) {
    if (violation_log_.size() < 32) violation_log_.push_back(std::move(msg));
  }
}

std::vector<std::string> KvCacheHierarchy::check_invariants() const {
  std::vector<std::string> out;
  const auto fail = [&](const std::string& level, std::uint64_t set, int way,
                        const std::string& what) {
    std::ostringstream os;
    os << level << " set " << set << " way " << way << ": " << what;
    out.push_back(os.str());
  };
  for (std::size_t a = 0; a < active_.size(); ++a) {
    const Level& lv = levels_[active_[a]];
    const int ppl = lv.cfg.pairs_per_line();
    for (std::uint64_t set = 0; set < lv.cfg.sets; ++set) {
      std::vector<bool> seen_way(static_cast<std::size_t>(lv.m), false);
      for (int i = 0; i < lv.m; ++i) {
        const int w = lv.set_order[set * static_cast<std::uint64_t>(lv.m) + i];
        if (w >= lv.m || seen_way[static_cast<std::size_t>(w)]) {
          fail(lv.cfg.name, set, w, "entire-line LRU order is not a permutation");
        } else {
          seen_way[static_cast<std::size_t>(w)] = true;
        }
      }
      for (int w = 0; w < lv.m; ++w) {
        const Line& line = lv.line(set, w);
        if (!line.reserved) fail(lv.cfg.name, set, w, "mode flag not reserved");
        if (!line.valid) continue;
        if (line.tag >= nr_ || (line.tag & (lv.cfg.sets - 1)) != set) {
          fail(lv.cfg.name, set, w, "tag does not derive this set");
        }
        std::vector<bool> in_lru(kMaxPairsPerLine, false);
        for (int i = 0; i < line.lru_count; ++i) {
          const int s = line.lru[i];
          if (s >= ppl || in_lru[static_cast<std::size_t>(s)]) {
            fail(lv.cfg.name, set, w, "within-line LRU is not a permutation");
            continue;
          }
          in_lru[static_cast<std::size_t>(s)] = true;
        }
        for (int s = 0; s < kMaxPairsPerLine; ++s) {
          const Slot& slot = line.slots[s];
          const bool occupied = slot.handle.valid();
          if (occupied != in_lru[static_cast<std::size_t>(s)]) {
            fail(lv.cfg.name, set, w, "within-line LRU disagrees with occupancy");
          }
          if (!occupied) continue;
          if (s >= ppl) fail(lv.cfg.name, set, w, "pair beyond line capacity");
          if (pseudoaddress(slot.key, nr_) != line.tag) {
            fail(lv.cfg.name, set, w, "line holds a key of another pseudoaddress");
          }
          for (std::size_t b = a + 1; b < active_.size(); ++b) {
            const Level& outer = levels_[active_[b]];
            const int ow = outer.find_way(line.tag);
            bool ok = false;
            if (ow >= 0) {
              const Line& ol = outer.line(line.tag & (outer.cfg.sets - 1), ow);
              const int os = ol.find_key(slot.key);
              ok = os >= 0 && ol.slots[os].handle == slot.handle;
            }
            if (!ok) {
              fail(lv.cfg.name, set, w,
                   "pair missing or different at " + outer.cfg.name);
            }
          }
        }
      }
    }
  }
  return out;
}

std::vector<LineView> KvCacheHierarchy::valid_lines(std::size_t level) const {
  std::vector<LineView> out;
  const Level& lv = levels_.at(level);
  for (std::uint64_t set = 0; set < lv.cfg.sets; ++set) {
    for (int w = 0; w < lv.m; ++w) {
      const Line& line = lv.line(set, w);
      if (!line.valid) continue;
      LineView view{set, w, line.tag, {}};
      for (int i = 0; i < line.lru_count; ++i) {
        const Slot& s = line.slots[line.lru[i]];
        view.pairs.emplace_back(s.key, s.handle);
      }
      out.push_back(std::move(view));
    }
  }
  return out;
}

void to_json(nlohmann::json& j, const SimStats& s) {
  j = nlohmann::json::object();
  for (std::size_t i = 0; i < s.levels.size(); ++i) {
    const LevelStats& l = s.levels[i];
    j[s.level_names[i]] = {
        {"entire_line_read_hits", l.entire_line_read_hits},
        {"entire_line_read_misses", l.entire_line_read_misses},
        {"within_line_read_hits", l.within_line_read_hits},
        {"within_line_read_misses", l.within_line_read_misses},
        {"entire_line_write_hits", l.entire_line_write_hits},
        {"entire_line_write_misses", l.entire_line_write_misses},
        {"within_line_write_hits", l.within_line_write_hits},
        {"within_line_write_misses", l.within_line_write_misses},
        {"line_evictions", l.line_evictions},
        {"writebacks", l.writebacks}};
  }
  j["kv_lookups"] = s.kv_lookups;
  j["kv_inserts"] = s.kv_inserts;
  j["kv_removes"] = s.kv_removes;
  j["overall_hits"] = s.overall_hits;
  j["lookup_misses"] = s.lookup_misses;
}

// ---------------------------------------------------------------------------

FaLruBuffer::FaLruBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw ConfigError("FA buffer capacity must be >= 1");
  pos_.reserve(capacity * 2);
}

bool FaLruBuffer::access(const BlockKey& key) {
  auto it = pos_.find(key);
  if (it != pos_.end()) {
    order_.splice(order_.begin(), order_, it->second);
    return true;
  }
  if (order_.size() == capacity_) {
    pos_.erase(order_.back());
    order_.pop_back();
  }
  order_.push_front(key);
  pos_.emplace(key, order_.begin());
  return false;
}

BlkPtrResult get_blk_ptr(KvCacheHierarchy& cache, BlockStore& store,
                         const BlockKey& key) {
  const LookupResult hit = cache.kv_lookup(key);
  if (hit.handle) return {{*hit.handle, false}, true};
  const FetchResult fetched = store.get_or_allocate(key);
  cache.kv_insert(key, fetched.handle);
  return {fetched, false};
}

}  // namespace blockcache
