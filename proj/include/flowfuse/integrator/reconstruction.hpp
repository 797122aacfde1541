#pragma once

#include <chrono>
#include <functional>
#include <string>

#include "flowfuse/integrator/baseline_flow.hpp"
#include "flowfuse/integrator/refine.hpp"
#include "flowfuse/integrator/warp.hpp"
#include "flowfuse/tsdf/fuse.hpp"
#include "flowfuse/tsdf/integrate.hpp"
#include "flowfuse/tsdf/raycast.hpp"

namespace flowfuse {

/// Inputs handed to an external flow provider for one frame.
struct FlowRequest {
  std::size_t frame = 0;
  const PointCloud& live_camera;       // back-projected live depth, camera frame
  const PointCloud& live_compensated;  // the same points mapped through the compensated pose
  const PointCloud& canonical;         // raycast of the global volume (may be empty if not needed)
};

/// Where per-frame scene flow comes from.
struct FlowSource {
  enum class Kind { External, RigidIcp, NearestNeighbor };
  using Provider = std::function<FlowField(const FlowRequest&)>;

  Kind kind = Kind::External;
  Provider provider;  // External only; must return one vector per live point

  static FlowSource external(Provider p) { return {Kind::External, std::move(p)}; }
  static FlowSource zero() {
    return external([](const FlowRequest& r) { return FlowField::zeros(r.live_camera.size()); });
  }
  static FlowSource rigid_icp() { return {Kind::RigidIcp, {}}; }
  static FlowSource nearest_neighbor() { return {Kind::NearestNeighbor, {}}; }
};

enum class TrackingMode {
  Icp,    // point-to-plane ICP of the live cloud against the canonical raycast
  Fixed,  // keep the current camera pose (static, known camera)
};

struct ReconstructionConfig {
  GridGeometry grid;
  double max_weight = TsdfVolume::kDefaultMaxWeight;
  Intrinsics intrinsics;
  TrackingMode tracking = TrackingMode::Icp;
  IcpConfig icp;
  IcpConfig baseline_icp;
  RefineConfig refine;
  RenderOptions render;
  RigidTransform initial_pose;
};

struct ReconstructionState {
  TsdfVolume global;
  RigidTransform camera_pose;
  std::size_t frame_index = 0;

  explicit ReconstructionState(const ReconstructionConfig& cfg)
      : global(cfg.grid, cfg.max_weight), camera_pose(cfg.initial_pose) {}
};

struct FrameDiagnostics {
  std::size_t frame = 0;
  bool skipped = false;
  std::string warning;
  std::size_t live_points = 0;
  std::size_t canonical_points = 0;
  int icp_iterations = 0;
  double icp_residual = 0.0;
  std::vector<double> energy;
  double seconds = 0.0;
};

/// One frame of flow-driven fusion.
///
/// The first frame is integrated directly at the initial pose. Later frames:
/// track the camera, fetch scene flow between the compensated live cloud and
/// the canonical raycast, warp and re-render the live cloud into a synthetic
/// depth map, integrate it into a fresh live volume, refine a voxel flow
/// field against the global volume and fuse through it. Any library error
/// during a frame skips it and leaves the state untouched.
inline FrameDiagnostics reconstruct_step(ReconstructionState& state, const DepthMap& live_depth,
                                         const FlowSource& source, const ReconstructionConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  FrameDiagnostics diag;
  diag.frame = state.frame_index;
  const auto finish = [&] {
    diag.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    ++state.frame_index;
    return diag;
  };

  if (state.frame_index == 0) {
    integrate_depth(state.global, live_depth, state.camera_pose);
    diag.live_points = live_depth.valid_count();
    return finish();
  }

  try {
    live_depth.validate();
    const PointCloud live = back_project(live_depth);
    diag.live_points = live.size();
    require(!live.empty(), "live frame has no valid depth", ErrorKind::Data);

    const bool need_canonical = cfg.tracking == TrackingMode::Icp || source.kind != FlowSource::Kind::External;
    PointCloud canonical;
    if (need_canonical) {
      canonical = raycast(state.global, state.camera_pose, cfg.intrinsics);
      diag.canonical_points = canonical.size();
      require(!canonical.empty(), "canonical raycast is empty", ErrorKind::Numerical);
    }

    RigidTransform pose = state.camera_pose;
    if (cfg.tracking == TrackingMode::Icp) {
      const auto icp = icp_point_to_plane(live, canonical, state.camera_pose, cfg.icp);
      pose = icp.transform;
      diag.icp_iterations = icp.iterations;
      diag.icp_residual = icp.residual;
    }

    const PointCloud compensated = transform_cloud(live, pose);
    FlowField flow;
    switch (source.kind) {
      case FlowSource::Kind::External:
        require(static_cast<bool>(source.provider), "external flow source has no provider");
        flow = source.provider(FlowRequest{diag.frame, live, compensated, canonical});
        break;
      case FlowSource::Kind::RigidIcp:
        flow = baseline_flow(compensated, canonical, BaselineVariant::RigidIcp, cfg.baseline_icp);
        break;
      case FlowSource::Kind::NearestNeighbor:
        flow = baseline_flow(compensated, canonical, BaselineVariant::NearestNeighbor);
        break;
    }
    require(flow.size() == live.size(), "flow field length does not match the live cloud", ErrorKind::Data);
    validate(flow);

    const PointCloud warped = warp_cloud(compensated, flow);
    const DepthMap synthetic = render_synthetic_depth(warped, pose, cfg.intrinsics, cfg.render);

    TsdfVolume live_volume(cfg.grid, cfg.max_weight);
    integrate_depth(live_volume, synthetic, pose);
    auto refined = refine_vector_field(live_volume, state.global, cfg.refine);
    diag.energy = std::move(refined.energy);

    fuse(state.global, live_volume, &refined.field);
    state.camera_pose = pose;
  } catch (const Error& e) {
    diag.skipped = true;
    diag.warning = e.what();
  }
  return finish();
}

}  // namespace flowfuse
