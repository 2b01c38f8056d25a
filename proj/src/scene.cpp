#include "blockcache/scene.hpp"

#include <algorithm>
#include <limits>

namespace blockcache {

namespace {

struct SdfVisitor {
  const Vec3d& p;

  double operator()(const Plane& pl) const {
    return pl.normal.normalized().dot(p) - pl.offset;
  }
  double operator()(const Sphere& s) const { return (p - s.center).norm() - s.radius; }
  double operator()(const Box& b) const {
    const Vec3d c = 0.5 * (b.min + b.max);
    const Vec3d half = 0.5 * (b.max - b.min);
    const Vec3d q = (p - c).cwiseAbs() - half;
    return q.cwiseMax(0.0).norm() + std::min(q.maxCoeff(), 0.0);
  }
};

}  // namespace

double primitive_sdf(const Primitive& prim, const Vec3d& p) {
  return std::visit(SdfVisitor{p}, prim);
}

void SceneSpec::validate() const {
  if (primitives.empty()) throw ConfigError("scene needs at least one primitive");
  if ((domain_max.array() <= domain_min.array()).any()) {
    throw ConfigError("scene domain must have positive extent");
  }
  for (const auto& prim : primitives) {
    if (const auto* pl = std::get_if<Plane>(&prim); pl && pl->normal.norm() == 0.0) {
      throw ConfigError("plane normal must be non-zero");
    }
    if (const auto* s = std::get_if<Sphere>(&prim); s && !(s->radius > 0.0)) {
      throw ConfigError("sphere radius must be > 0");
    }
    if (const auto* b = std::get_if<Box>(&prim);
        b && (b->max.array() <= b->min.array()).any()) {
      throw ConfigError("box max must exceed min on every axis");
    }
  }
}

double SceneSpec::sdf(const Vec3d& p) const {
  double d = std::numeric_limits<double>::infinity();
  for (const auto& prim : primitives) d = std::min(d, primitive_sdf(prim, p));
  return d;
}

SceneSpec default_scene() {
  SceneSpec s;
  s.primitives = {Plane{Vec3d(0, 0, 1), 0.0},
                  Sphere{Vec3d(0, 0, 0.5), 0.5},
                  Sphere{Vec3d(-0.7, 0.6, 0.3), 0.3},
                  Box{Vec3d(0.6, -0.4, 0.0), Vec3d(1.1, 0.2, 0.6)}};
  s.domain_min = Vec3d(-4, -4, -1);
  s.domain_max = Vec3d(4, 4, 4);
  return s;
}

SceneSpec plane_scene(double height) {
  SceneSpec s;
  s.primitives = {Plane{Vec3d(0, 0, 1), height}};
  s.domain_min = Vec3d(-4, -4, -1);
  s.domain_max = Vec3d(4, 4, 4);
  return s;
}

}  // namespace blockcache
