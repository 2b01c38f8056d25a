#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "blockcache/block_store.hpp"
#include "blockcache/camera.hpp"
#include "blockcache/cost_model.hpp"
#include "blockcache/kv_cache.hpp"
#include "blockcache/scene.hpp"

namespace blockcache {

struct AnalysisConfig {
  std::vector<std::uint64_t> capacities{64, 128, 256, 512, 1024, 2048, 4096, 8192, 16384};
  std::vector<double> sweep_voxel_sizes{0.15, 0.10, 0.05};
  std::uint64_t gap_threshold = 150;
  std::vector<double> footprint_load_factors{0.25, 0.5, 1.0, 2.0};
  std::uint64_t footprint_blocks = 10000;
};

/// Everything a command needs. Every field has a default; parsing rejects
/// unknown keys at every level.
struct RunConfig {
  SceneSpec scene = default_scene();
  TrajectorySpec trajectory;
  CameraIntrinsics camera;
  double depth_noise_stddev = 0.0;  // meters, drawn from `seed`
  std::vector<std::string> depth_frames;  // DPF1 files replacing rendering
  WorldConfig world;
  bool integrate_esdf = false;
  StoreConfig store;
  CacheProfile profile = cpu_table5_profile();
  CostModelConfig cost;
  AnalysisConfig analysis;
  std::uint64_t seed = 1;
  std::string output_dir = "out";

  void validate() const;
};

/// Throws ConfigError with the offending key path.
RunConfig parse_run_config(const nlohmann::json& j);
RunConfig load_run_config(const std::string& path);

/// Fully resolved config; the output directory is omitted.
nlohmann::json to_json(const RunConfig& cfg);

/// FNV-1a 64 of the resolved config's canonical dump, as 16 hex digits.
std::string config_hash(const RunConfig& cfg);

/// Applies {"L1": {"sets": 128, ...}, ...} on top of a preset.
void apply_profile_overrides(CacheProfile& profile, const nlohmann::json& overrides);

std::string fnv1a_hex(const std::string& bytes);

}  // namespace blockcache
