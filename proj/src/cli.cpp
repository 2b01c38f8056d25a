#include "blockcache/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "blockcache/pipeline.hpp"

namespace blockcache {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Options {
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::string profile;
  std::string trace_path;
};

/// Files written by one command, in emission order.
using Emitted = std::vector<std::string>;

RunConfig resolve_config(const Options& o) {
  RunConfig cfg = o.config_path.empty() ? parse_run_config(json::object())
                                        : load_run_config(o.config_path);
  if (o.seed) cfg.seed = *o.seed;
  if (!o.profile.empty()) cfg.profile = profile_by_name(o.profile);
  if (!o.out_dir.empty()) cfg.output_dir = o.out_dir;
  cfg.validate();
  return cfg;
}

void write_text(const fs::path& path, const std::string& text, Emitted& emitted) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw InputError("cannot write " + path.string());
  os << text;
  emitted.push_back(path.filename().string());
}

void write_json(const fs::path& path, const json& j, Emitted& emitted) {
  write_text(path, j.dump(2) + "\n", emitted);
}

template <typename Fn>
void write_csv(const fs::path& path, Fn&& fn, Emitted& emitted) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw InputError("cannot write " + path.string());
  fn(os);
  if (!os.flush()) throw InputError("cannot write " + path.string());
  emitted.push_back(path.filename().string());
}

json update_totals(const std::vector<UpdateStats>& frames) {
  UpdateStats t;
  json per_frame = json::array();
  for (const auto& f : frames) {
    t.rays += f.rays;
    t.voxel_updates += f.voxel_updates;
    t.block_accesses += f.block_accesses;
    per_frame.push_back({{"rays", f.rays},
                         {"voxel_updates", f.voxel_updates},
                         {"block_accesses", f.block_accesses},
                         {"distinct_blocks", f.distinct_blocks},
                         {"distinct_voxels", f.distinct_voxels}});
  }
  return {{"rays", t.rays},
          {"voxel_updates", t.voxel_updates},
          {"block_accesses", t.block_accesses},
          {"per_frame", per_frame}};
}

void cmd_gen_trace(const RunConfig& cfg, const std::string& hash, Emitted& emitted) {
  const fs::path out(cfg.output_dir);
  const TraceRun run = generate_trace(cfg);
  write_csv(out / "trace.csv", [&](std::ostream& os) { write_trace_csv(os, run.trace); },
            emitted);
  write_json(out / "trace.meta.json",
             {{"config_hash", hash}, {"events", run.trace.size()},
              {"frames", run.tsdf_frames.size()}},
             emitted);
  json stats = {{"config_hash", hash},
                {"store_stats", run.store_stats},
                {"mean_probe_steps", run.store_stats.mean_probe_steps()},
                {"footprint", run.footprint},
                {"tsdf", update_totals(run.tsdf_frames)}};
  if (cfg.integrate_esdf) stats["esdf"] = update_totals(run.esdf_frames);
  write_json(out / "store_stats.json", stats, emitted);
}

fs::path trace_path_for(const Options& o, const RunConfig& cfg) {
  return o.trace_path.empty() ? fs::path(cfg.output_dir) / "trace.csv"
                              : fs::path(o.trace_path);
}

/// Rejects a trace produced under a different configuration.
std::optional<json> trace_sidecar(const fs::path& trace, const std::string& file,
                                  const std::string& hash, bool have_config) {
  const fs::path side = trace.parent_path() / file;
  if (!fs::exists(side)) return std::nullopt;
  std::ifstream is(side);
  json j;
  try {
    j = json::parse(is);
  } catch (const json::parse_error&) {
    throw ConfigError(side.string() + ": not valid JSON");
  }
  if (have_config && j.value("config_hash", std::string()) != hash) {
    throw ConfigError(side.string() + " was produced by config " +
                      j.value("config_hash", std::string("?")) + ", not " + hash);
  }
  return j;
}

void cmd_simulate(const Options& o, const RunConfig& cfg, const std::string& hash,
                  Emitted& emitted) {
  const fs::path trace_path = trace_path_for(o, cfg);
  if (!fs::exists(trace_path)) throw InputError("missing trace " + trace_path.string());
  const bool have_config = !o.config_path.empty();
  trace_sidecar(trace_path, "trace.meta.json", hash, have_config);
  StoreStats store_stats;
  if (auto s = trace_sidecar(trace_path, "store_stats.json", hash, have_config)) {
    const json& st = (*s)["store_stats"];
    store_stats.lookups = st.value("lookups", std::uint64_t{0});
    store_stats.probe_steps = st.value("probe_steps", std::uint64_t{0});
    store_stats.key_comparisons = st.value("key_comparisons", std::uint64_t{0});
  }
  const AccessTrace trace = read_trace_csv(trace_path.string());
  const SimReport rep = run_trace(trace, cfg.profile, cfg.cost, store_stats);
  json j = rep;
  j["config_hash"] = hash;
  j["profile"] = cfg.profile.name;
  write_json(fs::path(cfg.output_dir) / "sim.json", j, emitted);
}

void cmd_analyze(const Options& o, const RunConfig& cfg, const std::string& hash,
                 Emitted& emitted) {
  const fs::path trace_path = trace_path_for(o, cfg);
  if (!fs::exists(trace_path)) throw InputError("missing trace " + trace_path.string());
  trace_sidecar(trace_path, "trace.meta.json", hash, !o.config_path.empty());
  const AccessTrace trace = read_trace_csv(trace_path.string());
  const AnalysisRun a = analyze_trace(trace, cfg.analysis);
  const fs::path out(cfg.output_dir);
  write_csv(out / "gap_histogram.csv", [&](std::ostream& os) { write_gap_csv(os, a.gaps); },
            emitted);
  write_csv(out / "distinct_blocks.csv",
            [&](std::ostream& os) { write_distinct_csv(os, a.per_frame); }, emitted);
  write_csv(out / "hit_rate.csv", [&](std::ostream& os) { write_hit_rate_csv(os, a.curve); },
            emitted);
  json summary = summary_json(a, trace);
  summary["config_hash"] = hash;
  write_json(out / "analysis.json", summary, emitted);
}

void cmd_sweep(const RunConfig& cfg, const std::string& hash, Emitted& emitted) {
  SweepInputs in{cfg.scene,  make_trajectory(cfg.trajectory), cfg.camera, cfg.world,
                 cfg.store,  cfg.profile, cfg.cost, false};
  const SweepResult r = resolution_sweep(in, cfg.analysis.sweep_voxel_sizes);
  const fs::path out(cfg.output_dir);
  write_csv(out / "sweep.csv", [&](std::ostream& os) { write_sweep_csv(os, r); }, emitted);
  json rows = json::array();
  for (const auto& row : r.rows) {
    rows.push_back({{"voxel_size", row.voxel_size},
                    {"updates_per_frame", row.updates_per_frame},
                    {"voxels_per_frame", row.voxels_per_frame},
                    {"baseline_cycles", row.baseline_cycles},
                    {"modeled_cycles", row.modeled_cycles}});
  }
  write_json(out / "sweep.json", {{"config_hash", hash}, {"rows", rows}}, emitted);
}

void cmd_footprint(const RunConfig& cfg, Emitted& emitted) {
  FootprintInputs in;
  in.blocks = cfg.analysis.footprint_blocks;
  in.block_side = cfg.world.block_side;
  in.seed = cfg.seed;
  const auto rows = footprint_report(in, cfg.analysis.footprint_load_factors);
  write_csv(fs::path(cfg.output_dir) / "footprint.csv",
            [&](std::ostream& os) { write_footprint_csv(os, rows); }, emitted);
}

json file_entry(const fs::path& dir, const std::string& name) {
  const fs::path path = dir / name;
  std::string bytes(fs::file_size(path), '\0');
  std::ifstream is(path, std::ios::binary);
  is.read(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  return {{"file", name}, {"bytes", bytes.size()}, {"fnv1a64", fnv1a_hex(bytes)}};
}

void cmd_report(const Options& o, const RunConfig& cfg, const std::string& hash,
                Emitted& emitted) {
  const fs::path out(cfg.output_dir);
  write_json(out / "config.json", to_json(cfg), emitted);
  cmd_gen_trace(cfg, hash, emitted);
  Options inner = o;
  inner.trace_path.clear();
  cmd_simulate(inner, cfg, hash, emitted);
  cmd_analyze(inner, cfg, hash, emitted);
  cmd_sweep(cfg, hash, emitted);
  cmd_footprint(cfg, emitted);
  json files = json::array();
  for (const auto& name : emitted) files.push_back(file_entry(out, name));
  json manifest = {{"config_hash", hash},
                   {"inputs", {{"config", o.config_path.empty() ? "defaults" : o.config_path},
                               {"seed", cfg.seed},
                               {"profile", cfg.profile.name}}},
                   {"outputs", files}};
  write_json(out / "manifest.json", manifest, emitted);
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Voxel block mapping workloads and reserved-way key/value cache model"};
  app.require_subcommand(1);
  Options o;
  const auto common = [&](CLI::App* sub, bool with_trace) {
    sub->add_option("--config", o.config_path, "run config (JSON)");
    sub->add_option("--out", o.out_dir, "output directory");
    sub->add_option("--seed", o.seed, "random seed");
    sub->add_option("--profile", o.profile, "cache profile (cpu-table5, gpu-table6)");
    if (with_trace) sub->add_option("--trace", o.trace_path, "trace CSV (default <out>/trace.csv)");
  };
  CLI::App* gen = app.add_subcommand("gen-trace", "render, integrate and write the block-access trace");
  CLI::App* sim = app.add_subcommand("simulate", "replay a trace through the cache model");
  CLI::App* sweep = app.add_subcommand("sweep", "voxel-size sweep");
  CLI::App* analyze = app.add_subcommand("analyze", "reuse gaps, distinct blocks, FA hit-rate curve");
  CLI::App* report = app.add_subcommand("report", "run everything and write a manifest");
  common(gen, false);
  common(sim, true);
  common(sweep, false);
  common(analyze, true);
  common(report, false);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    const RunConfig cfg = resolve_config(o);
    const std::string hash = config_hash(cfg);
    fs::create_directories(cfg.output_dir);
    Emitted emitted;
    if (gen->parsed()) cmd_gen_trace(cfg, hash, emitted);
    else if (sim->parsed()) cmd_simulate(o, cfg, hash, emitted);
    else if (sweep->parsed()) cmd_sweep(cfg, hash, emitted);
    else if (analyze->parsed()) cmd_analyze(o, cfg, hash, emitted);
    else if (report->parsed()) cmd_report(o, cfg, hash, emitted);
    for (const auto& f : emitted) out << (fs::path(cfg.output_dir) / f).string() << '\n';
    return kExitOk;
  } catch (const CapacityError& e) {
    err << "error: " << e.what() << '\n';
    return kExitResource;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const InputError& e) {
    err << "input error: " << e.what() << '\n';
    return kExitUsage;
  }
}

}  // namespace blockcache
