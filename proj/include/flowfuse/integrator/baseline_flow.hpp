#pragma once

#include "flowfuse/geom/normals.hpp"
#include "flowfuse/icp.hpp"

namespace flowfuse {

enum class BaselineVariant { RigidIcp, NearestNeighbor };

/// Classical stand-ins for a learned scene-flow predictor.
///
/// RigidIcp: v(x) = T x - x with T from point-to-plane ICP of live onto
/// canonical (canonical normals are estimated when absent).
/// NearestNeighbor: v(x) = nearest canonical point - x.
inline FlowField baseline_flow(const PointCloud& live, const PointCloud& canonical, BaselineVariant variant,
                               const IcpConfig& icp = {}) {
  require(!live.empty() && !canonical.empty(), "baseline_flow: empty point set");
  FlowField flow = FlowField::zeros(live.size());
  if (variant == BaselineVariant::NearestNeighbor) {
    const NeighborIndex index(canonical.points);
    for (std::size_t i = 0; i < live.size(); ++i)
      flow[i] = canonical.points[index.nearest(live.points[i]).index] - live.points[i];
    return flow;
  }
  const PointCloud target = canonical.has_normals() ? canonical : estimate_normals(canonical);
  const auto res = icp_point_to_plane(live, target, RigidTransform::identity(), icp);
  for (std::size_t i = 0; i < live.size(); ++i) flow[i] = res.transform.apply(live.points[i]) - live.points[i];
  return flow;
}

}  // namespace flowfuse
