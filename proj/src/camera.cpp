#include "blockcache/camera.hpp"

#include <Eigen/Geometry>

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>

namespace blockcache {

void CameraIntrinsics::validate() const {
  if (!(fx > 0 && fy > 0)) throw ConfigError("focal lengths must be > 0");
  if (width < 1 || height < 1) throw ConfigError("image size must be >= 1");
  if (!(cx >= 0 && cx < width && cy >= 0 && cy < height)) {
    throw ConfigError("principal point must lie inside the image");
  }
}

void Pose::validate() const {
  const double ortho =
      (rotation.transpose() * rotation - Eigen::Matrix3d::Identity())
          .cwiseAbs()
          .maxCoeff();
  if (!(ortho <= 1e-9) || !(std::abs(rotation.determinant() - 1.0) <= 1e-9)) {
    throw InputError("pose rotation is not a proper rotation");
  }
  if (!translation.allFinite()) throw InputError("pose translation not finite");
}

Pose look_at(const Vec3d& eye, const Vec3d& target, const Vec3d& up) {
  const Vec3d forward = (target - eye).normalized();
  const Vec3d side = forward.cross(up);
  if (!forward.allFinite() || side.norm() < 1e-9) {
    throw InputError("look_at: forward direction undefined or parallel to up");
  }
  Pose pose;
  const Vec3d x = side.normalized();
  pose.rotation.col(0) = x;
  pose.rotation.col(1) = forward.cross(x);
  pose.rotation.col(2) = forward;
  pose.translation = eye;
  return pose;
}

void DepthFrame::validate() const {
  if (width < 0 || height < 0 ||
      depths.size() != static_cast<std::size_t>(width) * height) {
    throw InputError("depth frame size does not match its dimensions");
  }
  for (float d : depths) {
    if (!std::isfinite(d) || d < 0.0f) {
      throw InputError("depth values must be finite and >= 0");
    }
  }
}

DepthFrame render_depth(const SceneSpec& scene, const Pose& pose,
                        const CameraIntrinsics& intr,
                        const RenderOptions& opts) {
  intr.validate();
  pose.validate();
  DepthFrame frame{intr.width, intr.height,
                   std::vector<float>(static_cast<std::size_t>(intr.width) *
                                      intr.height, 0.0f)};
  const Vec3d origin = pose.translation;
  for (int v = 0; v < intr.height; ++v) {
    for (int u = 0; u < intr.width; ++u) {
      const Vec3d ray_cam = intr.ray(u, v);
      const double ray_norm = ray_cam.norm();
      const Vec3d dir = pose.rotation * (ray_cam / ray_norm);
      double t = 0.0;
      for (int step = 0; step < opts.max_steps && t <= opts.max_range; ++step) {
        const double d = scene.sdf(origin + t * dir);
        if (d < opts.hit_epsilon) {
          // Distance along the ray -> depth along the optical axis.
          frame.depths[static_cast<std::size_t>(v) * intr.width + u] =
              static_cast<float>(t / ray_norm);
          break;
        }
        t += d;
      }
    }
  }
  return frame;
}

std::vector<Pose> make_trajectory(const TrajectorySpec& spec) {
  if (spec.steps < 1) throw InputError("trajectory needs at least one pose");
  std::vector<Pose> poses;
  poses.reserve(static_cast<std::size_t>(spec.steps));
  switch (spec.kind) {
    case TrajectoryKind::kOrbit: {
      if (!(spec.radius > 0)) throw InputError("orbit radius must be > 0");
      for (int i = 0; i < spec.steps; ++i) {
        const double a = 2.0 * std::numbers::pi * i / spec.steps;
        const Vec3d eye = spec.center + Vec3d(spec.radius * std::cos(a),
                                              spec.radius * std::sin(a),
                                              spec.height);
        poses.push_back(look_at(eye, spec.center));
      }
      break;
    }
    case TrajectoryKind::kLine: {
      if (spec.step.norm() == 0.0) throw InputError("line step must be non-zero");
      const Pose base =
          look_at(spec.start, spec.start + spec.look_direction);
      for (int i = 0; i < spec.steps; ++i) {
        Pose p = base;
        p.translation = spec.start + double(i) * spec.step;
        poses.push_back(p);
      }
      break;
    }
  }
  return poses;
}

namespace {

void put_u32(std::ostream& os, std::uint32_t v) {
  char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xffu);
  os.write(b, 4);
}

std::uint32_t get_u32(std::istream& is) {
  unsigned char b[4];
  if (!is.read(reinterpret_cast<char*>(b), 4)) {
    throw ParseError("truncated depth frame", 0);
  }
  return std::uint32_t{b[0]} | std::uint32_t{b[1]} << 8 |
         std::uint32_t{b[2]} << 16 | std::uint32_t{b[3]} << 24;
}

}  // namespace

void write_depth_frame(const std::string& path, const DepthFrame& frame) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw InputError("cannot open " + path + " for writing");
  os.write("DPF1", 4);
  put_u32(os, static_cast<std::uint32_t>(frame.width));
  put_u32(os, static_cast<std::uint32_t>(frame.height));
  for (float d : frame.depths) put_u32(os, std::bit_cast<std::uint32_t>(d));
}

DepthFrame read_depth_frame(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw InputError("cannot open " + path);
  char magic[4];
  if (!is.read(magic, 4) || std::memcmp(magic, "DPF1", 4) != 0) {
    throw ParseError("bad depth frame magic", 0);
  }
  DepthFrame f;
  f.width = static_cast<int>(get_u32(is));
  f.height = static_cast<int>(get_u32(is));
  f.depths.resize(static_cast<std::size_t>(f.width) * f.height);
  for (float& d : f.depths) d = std::bit_cast<float>(get_u32(is));
  f.validate();
  return f;
}

}  // namespace blockcache
