#pragma once

#include <array>
#include <cmath>
#include <compare>
#include <cstdint>
#include <functional>
#include <limits>

#include <Eigen/Core>

#include "blockcache/errors.hpp"

namespace blockcache {

template <typename Scalar>
using Vec3 = Eigen::Matrix<Scalar, 3, 1>;
using Vec3d = Vec3<double>;

struct WorldConfig {
  double voxel_size = 0.05;
  int block_side = 8;
  double truncation_dist = 0.15;
  double clear_radius = 0.2;

  /// Throws ConfigError when an invariant does not hold.
  void validate() const;
  int voxels_per_block() const { return block_side * block_side * block_side; }
};

struct BlockKey {
  std::int32_t x = 0;
  std::int32_t y = 0;
  std::int32_t z = 0;

  friend auto operator<=>(const BlockKey&, const BlockKey&) = default;
};

struct VoxelCoord {
  std::int32_t x = 0;
  std::int32_t y = 0;
  std::int32_t z = 0;

  friend auto operator<=>(const VoxelCoord&, const VoxelCoord&) = default;
};

struct BlockLocation {
  BlockKey key;
  int local_index = 0;  // lz*B*B + ly*B + lx
  std::array<int, 3> local{};
};

inline constexpr std::size_t kKeyBytes = 12;

namespace detail {

inline std::int32_t checked_floor_index(double value) {
  const double f = std::floor(value);
  if (!std::isfinite(f) ||
      f < static_cast<double>(std::numeric_limits<std::int32_t>::min()) ||
      f > static_cast<double>(std::numeric_limits<std::int32_t>::max())) {
    throw InputError("coordinate outside the 32-bit voxel index range");
  }
  return static_cast<std::int32_t>(f);
}

constexpr std::int32_t floor_div(std::int32_t v, std::int32_t b) {
  const std::int32_t q = v / b;
  return (v % b != 0 && ((v < 0) != (b < 0))) ? q - 1 : q;
}

}  // namespace detail

template <typename Derived>
VoxelCoord world_to_voxel(const Eigen::MatrixBase<Derived>& p,
                          const WorldConfig& cfg) {
  EIGEN_STATIC_ASSERT_VECTOR_SPECIFIC_SIZE(Derived, 3)
  const double s = cfg.voxel_size;
  return {detail::checked_floor_index(static_cast<double>(p(0)) / s),
          detail::checked_floor_index(static_cast<double>(p(1)) / s),
          detail::checked_floor_index(static_cast<double>(p(2)) / s)};
}

template <typename Scalar = double>
Vec3<Scalar> voxel_center(const VoxelCoord& v, const WorldConfig& cfg) {
  const Scalar s = static_cast<Scalar>(cfg.voxel_size);
  return Vec3<Scalar>((Scalar(v.x) + Scalar(0.5)) * s,
                      (Scalar(v.y) + Scalar(0.5)) * s,
                      (Scalar(v.z) + Scalar(0.5)) * s);
}

BlockLocation voxel_to_block(const VoxelCoord& v, int block_side);

/// Inverse of voxel_to_block for one local voxel.
VoxelCoord block_voxel(const BlockKey& key, int local_index, int block_side);

/// XOR of prime multiples over wrapping 64-bit arithmetic, then a
/// splitmix64-style finalizer.
std::uint64_t spatial_hash(const BlockKey& k);

/// Finalizer used by spatial_hash, exposed for tests.
std::uint64_t hash_mix(std::uint64_t x);

/// Little-endian x, y, z as int32.
std::array<std::uint8_t, kKeyBytes> serialize_key(const BlockKey& k);
BlockKey deserialize_key(const std::array<std::uint8_t, kKeyBytes>& bytes);

struct BlockKeyHash {
  std::size_t operator()(const BlockKey& k) const {
    return static_cast<std::size_t>(spatial_hash(k));
  }
};

struct VoxelCoordHash {
  std::size_t operator()(const VoxelCoord& v) const {
    return static_cast<std::size_t>(spatial_hash(BlockKey{v.x, v.y, v.z}));
  }
};

}  // namespace blockcache
