#include "blockcache/geometry.hpp"

#include <string>

namespace blockcache {

void WorldConfig::validate() const {
  if (!(voxel_size > 0.0) || !std::isfinite(voxel_size)) {
    throw ConfigError("voxel_size must be > 0");
  }
  if (block_side < 1) throw ConfigError("block_side must be >= 1");
  if (!(truncation_dist >= voxel_size)) {
    throw ConfigError("truncation_dist must be >= voxel_size");
  }
  if (!(clear_radius >= 0.0)) throw ConfigError("clear_radius must be >= 0");
}

BlockLocation voxel_to_block(const VoxelCoord& v, int block_side) {
  if (block_side < 1) throw ConfigError("block_side must be >= 1");
  const std::int32_t b = block_side;
  BlockLocation loc;
  loc.key = {detail::floor_div(v.x, b), detail::floor_div(v.y, b),
             detail::floor_div(v.z, b)};
  // Computed in 64 bits: b * key can leave int32 for keys near the range end.
  loc.local = {
      static_cast<int>(std::int64_t{v.x} - std::int64_t{b} * loc.key.x),
      static_cast<int>(std::int64_t{v.y} - std::int64_t{b} * loc.key.y),
      static_cast<int>(std::int64_t{v.z} - std::int64_t{b} * loc.key.z)};
  loc.local_index = (loc.local[2] * b + loc.local[1]) * b + loc.local[0];
  return loc;
}

VoxelCoord block_voxel(const BlockKey& key, int local_index, int block_side) {
  const int b = block_side;
  const int lx = local_index % b;
  const int ly = (local_index / b) % b;
  const int lz = local_index / (b * b);
  return {key.x * b + lx, key.y * b + ly, key.z * b + lz};
}

std::uint64_t hash_mix(std::uint64_t x) {
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return x;
}

std::uint64_t spatial_hash(const BlockKey& k) {
  // Prime multipliers from the original voxel hashing scheme.
  constexpr std::uint64_t p1 = 73856093ULL;
  constexpr std::uint64_t p2 = 19349669ULL;
  constexpr std::uint64_t p3 = 83492791ULL;
  const auto wide = [](std::int32_t c) {
    return static_cast<std::uint64_t>(static_cast<std::int64_t>(c));
  };
  const std::uint64_t pre = (wide(k.x) * p1) ^ (wide(k.y) * p2) ^ (wide(k.z) * p3);
  return hash_mix(pre);
}

std::array<std::uint8_t, kKeyBytes> serialize_key(const BlockKey& k) {
  std::array<std::uint8_t, kKeyBytes> out{};
  const std::int32_t c[3] = {k.x, k.y, k.z};
  for (int i = 0; i < 3; ++i) {
    const auto u = static_cast<std::uint32_t>(c[i]);
    for (int b = 0; b < 4; ++b) {
      out[static_cast<std::size_t>(i * 4 + b)] =
          static_cast<std::uint8_t>((u >> (8 * b)) & 0xffu);
    }
  }
  return out;
}

BlockKey deserialize_key(const std::array<std::uint8_t, kKeyBytes>& bytes) {
  std::int32_t c[3];
  for (int i = 0; i < 3; ++i) {
    std::uint32_t u = 0;
    for (int b = 0; b < 4; ++b) {
      u |= std::uint32_t{bytes[static_cast<std::size_t>(i * 4 + b)]} << (8 * b);
    }
    c[i] = static_cast<std::int32_t>(u);
  }
  return {c[0], c[1], c[2]};
}

}  // namespace blockcache
