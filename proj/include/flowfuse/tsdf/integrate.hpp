#pragma once

#include "flowfuse/tsdf/camera.hpp"
#include "flowfuse/tsdf/volume.hpp"

namespace flowfuse {

/// Projective TSDF integration of one depth map.
///
/// `camera_pose` maps camera coordinates to world coordinates. Each voxel
/// center is projected to its nearest pixel; with valid depth d and
/// projective distance sdf = d - z > -delta the voxel takes a unit-weight
/// running-average update of min(1, sdf / delta).
inline void integrate_depth(TsdfVolume& vol, const DepthMap& depth, const RigidTransform& camera_pose) {
  depth.validate();
  const auto& g = vol.geometry();
  const auto& k = depth.intrinsics;
  const RigidTransform world_to_cam = camera_pose.inverse();
  const double delta = vol.truncation();
  const double w_max = vol.max_weight();

  for_each_voxel(g, [&](int i, int j, int kk, std::size_t idx) {
    const Vec3 pc = world_to_cam.apply(g.center(i, j, kk));
    if (pc.z() <= 0.0) return;
    const long u = pixel_round(k.fx * pc.x() / pc.z() + k.cx);
    const long v = pixel_round(k.fy * pc.y() / pc.z() + k.cy);
    if (!depth.in_bounds(u, v)) return;
    const double d = depth.at(int(u), int(v));
    if (d <= 0.0) return;
    const double sdf = d - pc.z();
    if (sdf <= -delta) return;
    const double f = std::min(1.0, sdf / delta);
    const double w = vol.weight(idx);
    vol.set(idx, (w * vol.tsdf(idx) + f) / (w + 1.0), std::min(w + 1.0, w_max));
  });
}

}  // namespace flowfuse
