#pragma once

#include <optional>

#include "flowfuse/integrator/voxel_flow_field.hpp"
#include "flowfuse/tsdf/volume.hpp"

namespace flowfuse {

inline void require_same_grid(const GridGeometry& a, const GridGeometry& b) {
  require(a == b, "volume grids do not match (resolution, voxel size and origin must be identical)");
}

/// Weighted running average of `live` into `global`.
///
/// Every global voxel x pulls the live sample at x + v(x); voxels whose live
/// sample is undefined keep their state.
inline void fuse(TsdfVolume& global, const TsdfVolume& live, const VoxelFlowField* warp = nullptr) {
  const auto& g = global.geometry();
  require_same_grid(g, live.geometry());
  if (warp) require_same_grid(g, warp->geometry);
  const double inv_vs = 1.0 / g.voxel_size;
  const double w_max = global.max_weight();

  for_each_voxel(g, [&](int i, int j, int k, std::size_t idx) {
    Vec3 grid(i, j, k);
    if (warp) grid += (*warp)[idx] * inv_vs;
    const auto s = live.sample_grid(grid);
    if (!s || s->weight <= 0.0) return;
    const double wg = global.weight(idx);
    if (wg <= 0.0) {
      global.set(idx, s->tsdf, std::min(s->weight, w_max));
      return;
    }
    const double fused = (wg * global.tsdf(idx) + s->weight * s->tsdf) / (wg + s->weight);
    global.set(idx, std::clamp(fused, -1.0, 1.0), std::min(wg + s->weight, w_max));
  });
}

}  // namespace flowfuse
