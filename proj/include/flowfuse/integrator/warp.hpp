#pragma once

#include "flowfuse/tsdf/camera.hpp"

namespace flowfuse {

/// x' = x + v(x). Colors are carried over; normals do not survive a non-rigid warp.
inline PointCloud warp_cloud(const PointCloud& live, const FlowField& flow) {
  require_same_length(live.size(), flow.size(), "warp_cloud");
  PointCloud out;
  out.points.resize(live.size());
  for (std::size_t i = 0; i < live.size(); ++i) out.points[i] = live.points[i] + flow[i];
  out.colors = live.colors;
  return out;
}

struct RenderOptions {
  int splat_radius = 0;  // 0: one pixel per point; 1: also the 8 neighbours
};

/// Z-buffered projection of a world-frame cloud into a depth map.
inline DepthMap render_synthetic_depth(const PointCloud& cloud, const RigidTransform& camera_pose,
                                       const Intrinsics& k, const RenderOptions& opt = {}) {
  k.validate();
  require(opt.splat_radius >= 0, "splat radius must be >= 0");
  DepthMap depth(k);
  const RigidTransform world_to_cam = camera_pose.inverse();
  for (const auto& p : cloud.points) {
    const Vec3 pc = world_to_cam.apply(p);
    if (pc.z() <= 0.0) continue;
    const long u = pixel_round(k.fx * pc.x() / pc.z() + k.cx);
    const long v = pixel_round(k.fy * pc.y() / pc.z() + k.cy);
    for (long dv = -opt.splat_radius; dv <= opt.splat_radius; ++dv)
      for (long du = -opt.splat_radius; du <= opt.splat_radius; ++du) {
        if (!depth.in_bounds(u + du, v + dv)) continue;
        double& d = depth.at(int(u + du), int(v + dv));
        if (d <= 0.0 || pc.z() < d) d = pc.z();
      }
  }
  return depth;
}

}  // namespace flowfuse
