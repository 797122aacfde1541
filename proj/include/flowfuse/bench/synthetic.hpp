#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <utility>

#include "flowfuse/tsdf/camera.hpp"
#include "flowfuse/tsdf/mesh.hpp"

namespace flowfuse::synth {

/// Direction of the ray through pixel (u, v) in camera coordinates, scaled so z = 1.
inline Vec3 pixel_ray(const Intrinsics& k, int u, int v) { return Vec3((u - k.cx) / k.fx, (v - k.cy) / k.fy, 1.0); }

/// Renders a depth map by casting one ray per pixel center. `hit` receives a
/// world-frame origin and unit direction and returns the ray parameter of the
/// first surface, or a non-positive value for a miss.
template <class Hit>
DepthMap render_depth(const Intrinsics& k, const RigidTransform& camera_pose, Hit&& hit) {
  k.validate();
  DepthMap depth(k);
  const Vec3 origin = camera_pose.translation;
  for (int v = 0; v < k.height; ++v)
    for (int u = 0; u < k.width; ++u) {
      const Vec3 ray_c = pixel_ray(k, u, v);
      const double len = ray_c.norm();
      const Vec3 dir = camera_pose.rotation * (ray_c / len);
      const double t = hit(origin, dir);
      if (t > 0.0 && std::isfinite(t)) depth.at(u, v) = t / len;  // z = t * (1 / |ray|)
    }
  return depth;
}

/// Axis-aligned ellipsoid c + diag(radii) * unit sphere; first positive hit.
inline double intersect_ellipsoid(const Vec3& o, const Vec3& d, const Vec3& center, const Vec3& radii) {
  const Vec3 os = (o - center).cwiseQuotient(radii);
  const Vec3 ds = d.cwiseQuotient(radii);
  const double a = ds.squaredNorm(), b = os.dot(ds), c = os.squaredNorm() - 1.0;
  const double disc = b * b - a * c;
  if (disc < 0.0) return -1.0;
  const double s = std::sqrt(disc);
  const double t0 = (-b - s) / a;
  if (t0 > 0.0) return t0;
  const double t1 = (-b + s) / a;
  return t1 > 0.0 ? t1 : -1.0;
}

inline DepthMap render_sphere(const Intrinsics& k, const RigidTransform& pose, const Vec3& center, double radius) {
  return render_depth(k, pose, [&](const Vec3& o, const Vec3& d) {
    return intersect_ellipsoid(o, d, center, Vec3::Constant(radius));
  });
}

inline DepthMap render_ellipsoid(const Intrinsics& k, const RigidTransform& pose, const Vec3& center,
                                 const Vec3& radii) {
  return render_depth(k, pose, [&](const Vec3& o, const Vec3& d) { return intersect_ellipsoid(o, d, center, radii); });
}

/// Concave corner: the inside of the octant {p > apex} seen from within, i.e.
/// the three quarter-planes x = apex.x, y = apex.y, z = apex.z.
struct Corner {
  Vec3 apex = Vec3::Zero();
  Vec3 extent = Vec3::Constant(0.3);  // walls stop at apex + extent

  double intersect(const Vec3& o, const Vec3& d) const {
    double best = std::numeric_limits<double>::infinity();
    for (int a = 0; a < 3; ++a) {
      if (std::abs(d[a]) < 1e-15) continue;
      const double t = (apex[a] - o[a]) / d[a];
      if (t <= 0.0 || t >= best) continue;
      const Vec3 p = o + t * d;
      bool on_wall = true;
      for (int b = 0; b < 3; ++b)
        if (b != a && (p[b] < apex[b] || p[b] > apex[b] + extent[b])) on_wall = false;
      if (on_wall) best = t;
    }
    return std::isfinite(best) ? best : -1.0;
  }

  /// Unsigned distance to the union of the three walls.
  double distance(const Vec3& p) const {
    double best = std::numeric_limits<double>::infinity();
    for (int a = 0; a < 3; ++a) {
      Vec3 q = p;
      q[a] = apex[a];
      for (int b = 0; b < 3; ++b)
        if (b != a) q[b] = std::clamp(q[b], apex[b], apex[b] + extent[b]);
      best = std::min(best, (p - q).norm());
    }
    return best;
  }

  /// The three walls, each split into n x n quads.
  TriangleMesh mesh(int n = 32) const {
    TriangleMesh m;
    for (int a = 0; a < 3; ++a) {
      const int b = (a + 1) % 3, c = (a + 2) % 3;
      const auto base = static_cast<std::uint32_t>(m.vertices.size());
      for (int j = 0; j <= n; ++j)
        for (int i = 0; i <= n; ++i) {
          Vec3 p = apex;
          p[b] += extent[b] * i / n;
          p[c] += extent[c] * j / n;
          m.vertices.push_back(p);
        }
      const auto id = [&](int i, int j) { return base + static_cast<std::uint32_t>(j * (n + 1) + i); };
      for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
          m.triangles.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
          m.triangles.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
        }
    }
    return m;
  }
};

inline DepthMap render_corner(const Intrinsics& k, const RigidTransform& pose, const Corner& corner) {
  return render_depth(k, pose, [&](const Vec3& o, const Vec3& d) { return corner.intersect(o, d); });
}

/// Outward-facing icosphere with `subdivisions` rounds of 4:1 splitting.
inline TriangleMesh icosphere(const Vec3& center, double radius, int subdivisions) {
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Vec3> v = {{-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0}, {0, -1, t}, {0, 1, t},
                         {0, -1, -t}, {0, 1, -t}, {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1}};
  std::vector<std::array<std::uint32_t, 3>> f = {
      {0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11}, {1, 5, 9}, {5, 11, 4},
      {11, 10, 2}, {10, 7, 6}, {7, 1, 8},  {3, 9, 4},  {3, 4, 2},   {3, 2, 6}, {3, 6, 8},
      {3, 8, 9},  {4, 9, 5},  {2, 4, 11}, {6, 2, 10}, {8, 6, 7},   {9, 8, 1}};
  for (auto& p : v) p.normalize();
  for (int s = 0; s < subdivisions; ++s) {
    std::map<std::pair<std::uint32_t, std::uint32_t>, std::uint32_t> mid;
    const auto midpoint = [&](std::uint32_t a, std::uint32_t b) {
      const auto key = std::minmax(a, b);
      if (auto it = mid.find(key); it != mid.end()) return it->second;
      v.push_back((v[a] + v[b]).normalized());
      const auto id = static_cast<std::uint32_t>(v.size() - 1);
      mid.emplace(key, id);
      return id;
    };
    std::vector<std::array<std::uint32_t, 3>> next;
    next.reserve(f.size() * 4);
    for (const auto& tri : f) {
      const auto a = midpoint(tri[0], tri[1]), b = midpoint(tri[1], tri[2]), c = midpoint(tri[2], tri[0]);
      next.push_back({tri[0], a, c});
      next.push_back({tri[1], b, a});
      next.push_back({tri[2], c, b});
      next.push_back({a, b, c});
    }
    f = std::move(next);
  }
  TriangleMesh m;
  m.vertices.reserve(v.size());
  for (const auto& p : v) m.vertices.push_back(center + radius * p);
  m.triangles = std::move(f);
  return m;
}

}  // namespace flowfuse::synth
