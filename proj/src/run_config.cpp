#include "blockcache/run_config.hpp"

#include <algorithm>
#include <cstdio>
#include <exception>
#include <fstream>
#include <set>

namespace blockcache {

using nlohmann::json;

namespace {

/// Reads fields of one JSON object and rejects keys nobody asked for.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_ + ": expected an object");
  }

  ~ObjectReader() noexcept(false) {
    if (std::uncaught_exceptions() == 0) finish();
  }

  bool has(const std::string& key) const { return j_.contains(key); }
  const json& raw(const std::string& key) {
    used_.insert(key);
    return j_.at(key);
  }
  std::string path(const std::string& key) const { return path_ + "." + key; }

  template <typename T>
  void get(const std::string& key, T& out) {
    if (!j_.contains(key)) return;
    used_.insert(key);
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception&) {
      throw ConfigError(path(key) + ": wrong type");
    }
  }

  void get_vec3(const std::string& key, Vec3d& out) {
    if (!j_.contains(key)) return;
    used_.insert(key);
    const json& a = j_.at(key);
    if (!a.is_array() || a.size() != 3 || !a[0].is_number() || !a[1].is_number() ||
        !a[2].is_number()) {
      throw ConfigError(path(key) + ": expected [x, y, z]");
    }
    out = Vec3d(a[0].get<double>(), a[1].get<double>(), a[2].get<double>());
  }

  void finish() {
    for (const auto& [key, _] : j_.items()) {
      if (!used_.contains(key)) throw ConfigError(path(key) + ": unknown key");
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

json vec3_json(const Vec3d& v) { return json::array({v.x(), v.y(), v.z()}); }

SceneSpec parse_scene(const json& j, const std::string& path) {
  ObjectReader r(j, path);
  std::string preset;
  r.get("preset", preset);
  SceneSpec scene;
  if (preset == "default") {
    scene = default_scene();
  } else if (preset == "plane") {
    scene = plane_scene(0.0);
  } else if (!preset.empty()) {
    throw ConfigError(r.path("preset") + ": unknown scene preset '" + preset + "'");
  }
  if (r.has("primitives")) {
    const json& prims = r.raw("primitives");
    if (!prims.is_array()) throw ConfigError(r.path("primitives") + ": expected array");
    scene.primitives.clear();
    for (std::size_t i = 0; i < prims.size(); ++i) {
      const std::string ppath = r.path("primitives") + "[" + std::to_string(i) + "]";
      ObjectReader pr(prims[i], ppath);
      std::string type;
      pr.get("type", type);
      if (type == "plane") {
        Plane p;
        pr.get_vec3("normal", p.normal);
        pr.get("offset", p.offset);
        scene.primitives.emplace_back(p);
      } else if (type == "sphere") {
        Sphere s;
        pr.get_vec3("center", s.center);
        pr.get("radius", s.radius);
        scene.primitives.emplace_back(s);
      } else if (type == "box") {
        Box b;
        pr.get_vec3("min", b.min);
        pr.get_vec3("max", b.max);
        scene.primitives.emplace_back(b);
      } else {
        throw ConfigError(ppath + ".type: unknown primitive '" + type + "'");
      }
    }
  }
  r.get_vec3("domain_min", scene.domain_min);
  r.get_vec3("domain_max", scene.domain_max);
  return scene;
}

json scene_json(const SceneSpec& s) {
  json prims = json::array();
  for (const auto& prim : s.primitives) {
    if (const auto* p = std::get_if<Plane>(&prim)) {
      prims.push_back({{"type", "plane"}, {"normal", vec3_json(p->normal)}, {"offset", p->offset}});
    } else if (const auto* sp = std::get_if<Sphere>(&prim)) {
      prims.push_back({{"type", "sphere"}, {"center", vec3_json(sp->center)}, {"radius", sp->radius}});
    } else if (const auto* b = std::get_if<Box>(&prim)) {
      prims.push_back({{"type", "box"}, {"min", vec3_json(b->min)}, {"max", vec3_json(b->max)}});
    }
  }
  return {{"primitives", prims},
          {"domain_min", vec3_json(s.domain_min)},
          {"domain_max", vec3_json(s.domain_max)}};
}

TrajectorySpec parse_trajectory(const json& j, const std::string& path) {
  ObjectReader r(j, path);
  TrajectorySpec t;
  std::string kind = "orbit";
  r.get("kind", kind);
  if (kind == "orbit") t.kind = TrajectoryKind::kOrbit;
  else if (kind == "line") t.kind = TrajectoryKind::kLine;
  else throw ConfigError(r.path("kind") + ": unknown trajectory kind '" + kind + "'");
  r.get("steps", t.steps);
  r.get_vec3("center", t.center);
  r.get("radius", t.radius);
  r.get("height", t.height);
  r.get_vec3("start", t.start);
  r.get_vec3("step", t.step);
  r.get_vec3("look_direction", t.look_direction);
  return t;
}

json trajectory_json(const TrajectorySpec& t) {
  return {{"kind", t.kind == TrajectoryKind::kOrbit ? "orbit" : "line"},
          {"steps", t.steps},
          {"center", vec3_json(t.center)},
          {"radius", t.radius},
          {"height", t.height},
          {"start", vec3_json(t.start)},
          {"step", vec3_json(t.step)},
          {"look_direction", vec3_json(t.look_direction)}};
}

json level_json(const LevelConfig& l) {
  return {{"sets", l.sets},
          {"ways", l.ways},
          {"reserved_ways", l.reserved_ways},
          {"line_bytes", l.line_bytes},
          {"hit_latency_cycles", l.hit_latency_cycles}};
}

}  // namespace

void apply_profile_overrides(CacheProfile& profile, const json& overrides) {
  ObjectReader r(overrides, "cache.overrides");
  for (auto& level : profile.levels) {
    if (!r.has(level.name)) continue;
    ObjectReader lr(r.raw(level.name), r.path(level.name));
    lr.get("sets", level.sets);
    lr.get("ways", level.ways);
    lr.get("reserved_ways", level.reserved_ways);
    lr.get("line_bytes", level.line_bytes);
    lr.get("hit_latency_cycles", level.hit_latency_cycles);
  }
}

void RunConfig::validate() const {
  scene.validate();
  camera.validate();
  world.validate();
  profile.validate();
  cost.validate();
  if (trajectory.steps < 1) throw ConfigError("trajectory.steps must be >= 1");
  if (depth_noise_stddev < 0) throw ConfigError("camera.noise_stddev must be >= 0");
  if (store.block_side != world.block_side) {
    throw ConfigError("store block_side must equal world.block_side");
  }
  if (!depth_frames.empty() && depth_frames.size() != static_cast<std::size_t>(trajectory.steps)) {
    throw ConfigError("depth_frames must list one file per trajectory pose");
  }
  if (analysis.capacities.empty() || analysis.capacities.front() == 0 ||
      !std::is_sorted(analysis.capacities.begin(), analysis.capacities.end())) {
    throw ConfigError("analysis.capacities must be ascending and >= 1");
  }
  if (analysis.sweep_voxel_sizes.size() < 2) {
    throw ConfigError("analysis.sweep_voxel_sizes needs at least two sizes");
  }
  for (double vs : analysis.sweep_voxel_sizes) {
    WorldConfig w = world;
    w.voxel_size = vs;
    w.validate();
  }
  for (double lf : analysis.footprint_load_factors) {
    if (!(lf > 0)) throw ConfigError("analysis.footprint_load_factors must be > 0");
  }
}

RunConfig parse_run_config(const json& j) {
  RunConfig cfg;
  ObjectReader r(j, "config");
  if (r.has("scene")) cfg.scene = parse_scene(r.raw("scene"), "config.scene");
  if (r.has("trajectory")) {
    cfg.trajectory = parse_trajectory(r.raw("trajectory"), "config.trajectory");
  }
  if (r.has("camera")) {
    ObjectReader c(r.raw("camera"), "config.camera");
    c.get("fx", cfg.camera.fx);
    c.get("fy", cfg.camera.fy);
    c.get("cx", cfg.camera.cx);
    c.get("cy", cfg.camera.cy);
    c.get("width", cfg.camera.width);
    c.get("height", cfg.camera.height);
    c.get("noise_stddev", cfg.depth_noise_stddev);
    c.get("depth_frames", cfg.depth_frames);
  }
  if (r.has("world")) {
    ObjectReader w(r.raw("world"), "config.world");
    w.get("voxel_size", cfg.world.voxel_size);
    w.get("block_side", cfg.world.block_side);
    w.get("truncation_dist", cfg.world.truncation_dist);
    w.get("clear_radius", cfg.world.clear_radius);
    w.get("integrate_esdf", cfg.integrate_esdf);
  }
  cfg.store.block_side = cfg.world.block_side;
  if (r.has("store")) {
    ObjectReader s(r.raw("store"), "config.store");
    std::string kind = to_string(cfg.store.kind);
    s.get("kind", kind);
    cfg.store.kind = parse_store_kind(kind);
    s.get("bucket_count", cfg.store.bucket_count);
    s.get("pairs_per_bucket", cfg.store.pairs_per_bucket);
    s.get("line_bytes", cfg.store.line_bytes);
    s.get("root_extent_blocks", cfg.store.root_extent_blocks);
    s.get("max_blocks", cfg.store.max_blocks);
  }
  if (r.has("cache")) {
    ObjectReader c(r.raw("cache"), "config.cache");
    std::string name = cfg.profile.name;
    c.get("profile", name);
    cfg.profile = profile_by_name(name);
    if (c.has("overrides")) apply_profile_overrides(cfg.profile, c.raw("overrides"));
  }
  if (r.has("cost")) {
    ObjectReader c(r.raw("cost"), "config.cost");
    c.get("hash_cycles", cfg.cost.hash_cycles);
    c.get("probe_cycles", cfg.cost.probe_cycles);
    c.get("insert_cycles", cfg.cost.insert_cycles);
    c.get("access_fraction", cfg.cost.access_fraction);
    c.get("level_access_pj", cfg.cost.level_access_pj);
    c.get("hash_pj", cfg.cost.hash_pj);
    c.get("probe_pj", cfg.cost.probe_pj);
  }
  if (r.has("analysis")) {
    ObjectReader a(r.raw("analysis"), "config.analysis");
    a.get("capacities", cfg.analysis.capacities);
    a.get("sweep_voxel_sizes", cfg.analysis.sweep_voxel_sizes);
    a.get("gap_threshold", cfg.analysis.gap_threshold);
    a.get("footprint_load_factors", cfg.analysis.footprint_load_factors);
    a.get("footprint_blocks", cfg.analysis.footprint_blocks);
  }
  r.get("seed", cfg.seed);
  r.get("output_dir", cfg.output_dir);
  r.finish();
  cfg.validate();
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config " + path);
  json j;
  try {
    j = json::parse(is);
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return parse_run_config(j);
}

json to_json(const RunConfig& cfg) {
  json levels = json::object();
  for (const auto& l : cfg.profile.levels) levels[l.name] = level_json(l);
  return {
      {"scene", scene_json(cfg.scene)},
      {"trajectory", trajectory_json(cfg.trajectory)},
      {"camera",
       {{"fx", cfg.camera.fx},
        {"fy", cfg.camera.fy},
        {"cx", cfg.camera.cx},
        {"cy", cfg.camera.cy},
        {"width", cfg.camera.width},
        {"height", cfg.camera.height},
        {"noise_stddev", cfg.depth_noise_stddev},
        {"depth_frames", cfg.depth_frames}}},
      {"world",
       {{"voxel_size", cfg.world.voxel_size},
        {"block_side", cfg.world.block_side},
        {"truncation_dist", cfg.world.truncation_dist},
        {"clear_radius", cfg.world.clear_radius},
        {"integrate_esdf", cfg.integrate_esdf}}},
      {"store",
       {{"kind", to_string(cfg.store.kind)},
        {"bucket_count", cfg.store.bucket_count},
        {"pairs_per_bucket", cfg.store.pairs_per_bucket},
        {"line_bytes", cfg.store.line_bytes},
        {"root_extent_blocks", cfg.store.root_extent_blocks},
        {"max_blocks", cfg.store.max_blocks}}},
      {"cache", {{"profile", cfg.profile.name}, {"overrides", levels}}},
      {"cost",
       {{"hash_cycles", cfg.cost.hash_cycles},
        {"probe_cycles", cfg.cost.probe_cycles},
        {"insert_cycles", cfg.cost.insert_cycles},
        {"access_fraction", cfg.cost.access_fraction},
        {"level_access_pj", cfg.cost.level_access_pj},
        {"hash_pj", cfg.cost.hash_pj},
        {"probe_pj", cfg.cost.probe_pj}}},
      {"analysis",
       {{"capacities", cfg.analysis.capacities},
        {"sweep_voxel_sizes", cfg.analysis.sweep_voxel_sizes},
        {"gap_threshold", cfg.analysis.gap_threshold},
        {"footprint_load_factors", cfg.analysis.footprint_load_factors},
        {"footprint_blocks", cfg.analysis.footprint_blocks}}},
      {"seed", cfg.seed}};
}

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string config_hash(const RunConfig& cfg) { return fnv1a_hex(to_json(cfg).dump()); }

}  // namespace blockcache
