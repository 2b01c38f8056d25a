#pragma once

#include <variant>
#include <vector>

#include "blockcache/geometry.hpp"

namespace blockcache {

/// Half-space n·p <= offset is solid; sdf = n·p - offset with n normalized.
struct Plane {
  Vec3d normal{0, 0, 1};
  double offset = 0.0;
};

struct Sphere {
  Vec3d center{0, 0, 0};
  double radius = 1.0;
};

struct Box {
  Vec3d min{-0.5, -0.5, -0.5};
  Vec3d max{0.5, 0.5, 0.5};
};

using Primitive = std::variant<Plane, Sphere, Box>;

/// Union of analytic primitives; the scene SDF is the minimum over them.
struct SceneSpec {
  std::vector<Primitive> primitives;
  Vec3d domain_min{-5, -5, -5};
  Vec3d domain_max{5, 5, 5};

  void validate() const;
  double sdf(const Vec3d& p) const;
};

double primitive_sdf(const Primitive& prim, const Vec3d& p);

/// Ground plane with two spheres and a box, z up.
SceneSpec default_scene();

/// Plane z = height, viewed from above.
SceneSpec plane_scene(double height = 0.0);

}  // namespace blockcache
