#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "blockcache/scene.hpp"

namespace blockcache {

struct CameraIntrinsics {
  double fx = 280.0;
  double fy = 280.0;
  double cx = 160.0;
  double cy = 120.0;
  int width = 320;
  int height = 240;

  void validate() const;
  /// Camera-frame direction through pixel (u, v), scaled to unit depth.
  Vec3d ray(int u, int v) const {
    return Vec3d((u - cx) / fx, (v - cy) / fy, 1.0);
  }
};

/// Camera-to-world rigid transform. Camera frame: x right, y down, z forward.
struct Pose {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Vec3d translation = Vec3d::Zero();

  void validate() const;
  Vec3d optical_axis() const { return rotation.col(2); }
  Vec3d apply(const Vec3d& p_cam) const {
    return rotation * p_cam + translation;
  }
};

/// Rotation whose z column is `forward` and whose x column is horizontal
/// with respect to `up`. Throws InputError when forward is parallel to up.
Pose look_at(const Vec3d& eye, const Vec3d& target,
             const Vec3d& up = Vec3d::UnitZ());

struct DepthFrame {
  int width = 0;
  int height = 0;
  std::vector<float> depths;  // row-major meters, 0 = invalid

  float at(int u, int v) const {
    return depths[static_cast<std::size_t>(v) * width + u];
  }
  void validate() const;
};

struct RenderOptions {
  double max_range = 10.0;
  int max_steps = 512;
  double hit_epsilon = 1e-6;
};

/// Sphere traces the scene SDF through every pixel.
DepthFrame render_depth(const SceneSpec& scene, const Pose& pose,
                        const CameraIntrinsics& intr,
                        const RenderOptions& opts = {});

enum class TrajectoryKind { kOrbit, kLine };

struct TrajectorySpec {
  TrajectoryKind kind = TrajectoryKind::kOrbit;
  int steps = 16;
  // orbit
  Vec3d center{0, 0, 0.3};
  double radius = 2.5;
  double height = 1.5;  // above center
  // line
  Vec3d start{0, -2.5, 1.5};
  Vec3d step{0.05, 0, 0};
  Vec3d look_direction{0, 1, -0.5};
};

std::vector<Pose> make_trajectory(const TrajectorySpec& spec);

/// "DPF1" | u32 width | u32 height | width*height f32, all little-endian.
void write_depth_frame(const std::string& path, const DepthFrame& frame);
DepthFrame read_depth_frame(const std::string& path);

}  // namespace blockcache
