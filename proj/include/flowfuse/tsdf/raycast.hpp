#pragma once

#include <limits>

#include "flowfuse/tsdf/camera.hpp"
#include "flowfuse/tsdf/volume.hpp"

namespace flowfuse {

namespace detail {

// Ray parameter interval inside the box of voxel centers; empty when t_far < t_near.
inline std::pair<double, double> clip_ray_to_box(const Vec3& o, const Vec3& dir, const Vec3& lo, const Vec3& hi) {
  double t_near = 0.0, t_far = std::numeric_limits<double>::infinity();
  for (int a = 0; a < 3; ++a) {
    if (dir[a] == 0.0) {
      if (o[a] < lo[a] || o[a] > hi[a]) return {1.0, 0.0};
      continue;
    }
    double t0 = (lo[a] - o[a]) / dir[a], t1 = (hi[a] - o[a]) / dir[a];
    if (t0 > t1) std::swap(t0, t1);
    t_near = std::max(t_near, t0);
    t_far = std::min(t_far, t1);
  }
  return {t_near, t_far};
}

}  // namespace detail

/// Ray-marched surface of a volume as seen from `camera_pose`.
///
/// Rays advance in steps of delta/2 and stop at the first +/- sign change of
/// the sampled tsdf, refined by one linear interpolation. Points carry unit
/// normals from the tsdf gradient; where the gradient is unavailable the
/// normal faces the camera and is flagged degenerate.
inline PointCloud raycast(const TsdfVolume& vol, const RigidTransform& camera_pose, const Intrinsics& k) {
  k.validate();
  PointCloud out;
  if (vol.observed_count() == 0) return out;
  const auto& g = vol.geometry();
  const double step = 0.5 * vol.truncation();
  const Vec3 o = camera_pose.translation;
  const Vec3 lo = g.min_corner(), hi = g.max_corner();

  for (int v = 0; v < k.height; ++v)
    for (int u = 0; u < k.width; ++u) {
      const Vec3 dir = (camera_pose.rotation * Vec3((u - k.cx) / k.fx, (v - k.cy) / k.fy, 1.0)).normalized();
      const auto [t_near, t_far] = detail::clip_ray_to_box(o, dir, lo, hi);
      if (t_far < t_near) continue;

      std::optional<double> prev;
      double t_prev = t_near;
      const long n_steps = static_cast<long>((t_far - t_near) / step);
      for (long n = 0; n <= n_steps; ++n) {
        const double t = t_near + static_cast<double>(n) * step;
        const auto cur = vol.sample(o + t * dir);
        if (prev && cur && *prev > 0.0 && *cur <= 0.0) {
          const double t_hit = t_prev + step * (*prev / (*prev - *cur));
          const Vec3 p = o + t_hit * dir;
          const auto grad = vol.gradient(p);
          const double len = grad ? grad->norm() : 0.0;
          out.points.push_back(p);
          if (len > 0.0) {
            out.normals.push_back(*grad / len);
            out.normal_degenerate.push_back(0);
          } else {
            out.normals.push_back(-dir);
            out.normal_degenerate.push_back(1);
          }
          break;
        }
        prev = cur;
        t_prev = t;
      }
    }
  return out;
}

}  // namespace flowfuse
