#pragma once

#include <chrono>
#include <fstream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "flowfuse/bench/scene_config.hpp"
#include "flowfuse/io/depth_png.hpp"
#include "flowfuse/io/geometry_io.hpp"
#include "flowfuse/tsdf/checkpoint.hpp"
#include "flowfuse/tsdf/marching_cubes.hpp"
#include "flowfuse/tsdf/mesh_error.hpp"
#include "flowfuse/version.hpp"

namespace flowfuse::bench {

/// Pairs a flow file with the live camera-frame cloud by position.
///
/// File positions and vectors live in the space scaled by `scale`; each live
/// point x is looked up at S x and its vector is mapped back through S^-1.
/// Every live point must match exactly one file point within `tolerance`.
inline FlowField match_flow(const PointCloud& live_camera, const FlowSample& file, const Vec3& scale,
                            double tolerance) {
  require(file.points.size() == live_camera.size(),
          "flow file has " + std::to_string(file.points.size()) + " points, live cloud has " +
              std::to_string(live_camera.size()),
          ErrorKind::Data);
  const NeighborIndex index(file.points.points);
  std::vector<std::uint8_t> used(file.points.size(), 0);
  FlowField flow = FlowField::zeros(live_camera.size());
  for (std::size_t i = 0; i < live_camera.size(); ++i) {
    const auto nb = index.nearest(live_camera.points[i].cwiseProduct(scale));
    require(nb.distance <= tolerance, "live point " + std::to_string(i) + " has no flow within tolerance",
            ErrorKind::Data);
    require(!used[nb.index], "flow file point matched twice", ErrorKind::Data);
    used[nb.index] = 1;
    flow[i] = file.flow[nb.index].cwiseQuotient(scale);
  }
  return flow;
}

struct FrameRow {
  long frame = 0;
  FrameDiagnostics diag;
};

struct RunResult {
  std::vector<FrameRow> rows;
  std::size_t processed = 0;
  std::size_t skipped = 0;
  TriangleMesh mesh;
  std::optional<double> reference_error;  // mean, meters
};

namespace detail {

inline std::string csv_safe(std::string s) {
  for (auto& c : s)
    if (c == ',' || c == '\n' || c == '\r') c = ';';
  return s;
}

inline void write_manifest(const fs::path& path, const std::vector<FrameRow>& rows) {
  std::ofstream os(path);
  if (!os) fail(ErrorKind::Data, "cannot write " + path.string());
  os.precision(10);
  os << "frame,status,live_points,canonical_points,icp_iterations,icp_residual,energy_first,energy_last,note\n";
  for (const auto& r : rows) {
    const auto& d = r.diag;
    os << r.frame << ',' << (d.skipped ? "skipped" : "ok") << ',' << d.live_points << ',' << d.canonical_points << ','
       << d.icp_iterations << ',' << d.icp_residual << ',' << (d.energy.empty() ? 0.0 : d.energy.front()) << ','
       << (d.energy.empty() ? 0.0 : d.energy.back()) << ',' << csv_safe(d.warning) << '\n';
  }
}

inline void write_timing(const fs::path& path, const std::vector<FrameRow>& rows) {
  std::ofstream os(path);
  if (!os) fail(ErrorKind::Data, "cannot write " + path.string());
  os << "frame,seconds\n";
  for (const auto& r : rows) os << r.frame << ',' << r.diag.seconds << '\n';
}

}  // namespace detail

/// Runs the whole sequence and writes into `output_dir`:
/// mesh_<frame>.ply every `checkpoint_every` frames, mesh.ply, volume.tsdf,
/// manifest.csv (one row per frame), summary.txt and timing.csv. Only
/// timing.csv depends on wall-clock time.
inline RunResult run_reconstruction(const SceneConfig& scene, std::ostream* log = nullptr) {
  scene.validate();
  fs::create_directories(scene.output_dir);
  const auto& cfg = scene.recon;
  ReconstructionState state(cfg);
  RunResult result;

  long current = 0;
  FlowSource source;
  switch (scene.flow_source) {
    case FlowSourceKind::Zero: source = FlowSource::zero(); break;
    case FlowSourceKind::RigidIcp: source = FlowSource::rigid_icp(); break;
    case FlowSourceKind::NearestNeighbor: source = FlowSource::nearest_neighbor(); break;
    case FlowSourceKind::External:
      source = FlowSource::external([&](const FlowRequest& req) {
        const auto path = scene.flow_path(current);
        require(fs::is_regular_file(path), "missing flow file " + path.string(), ErrorKind::Data);
        return match_flow(req.live_camera, read_flow(path.string()), scene.scale, scene.flow_match_tolerance);
      });
      break;
  }

  for (long n = 0; n < scene.frames; ++n) {
    current = scene.first_frame + n;
    FrameRow row;
    row.frame = current;
    const auto t0 = std::chrono::steady_clock::now();
    std::optional<DepthMap> depth;
    try {
      depth = read_depth_png(scene.depth_path(current).string(), cfg.intrinsics);
      depth->validate();
    } catch (const Error& e) {
      row.diag.frame = state.frame_index;
      row.diag.skipped = true;
      row.diag.warning = e.what();
      row.diag.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
    if (depth) row.diag = reconstruct_step(state, *depth, source, cfg);

    if (row.diag.skipped) {
      ++result.skipped;
      if (log) *log << "warning: frame " << current << " skipped: " << row.diag.warning << '\n';
    } else {
      ++result.processed;
    }
    result.rows.push_back(std::move(row));

    if ((n + 1) % scene.checkpoint_every == 0 && n + 1 < scene.frames && state.frame_index > 0)
      write_mesh((scene.output_dir / format_frame("mesh_%06ld.ply", current)).string(), extract_mesh(state.global));
  }

  result.mesh = extract_mesh(state.global);
  write_mesh((scene.output_dir / "mesh.ply").string(), result.mesh);
  save_checkpoint((scene.output_dir / "volume.tsdf").string(), state.global);
  detail::write_manifest(scene.output_dir / "manifest.csv", result.rows);
  detail::write_timing(scene.output_dir / "timing.csv", result.rows);

  if (!scene.reference_mesh.empty() && !result.mesh.vertices.empty())
    result.reference_error = mesh_error(result.mesh, read_mesh(scene.reference_mesh.string())).mean;

  std::ofstream summary(scene.output_dir / "summary.txt");
  if (!summary) fail(ErrorKind::Data, "cannot write summary.txt");
  summary.precision(10);
  scene.echo.write(summary);
  summary << "[summary]\n"
          << "version = " << kVersion << '\n'
          << "frames = " << scene.frames << '\n'
          << "processed = " << result.processed << '\n'
          << "skipped = " << result.skipped << '\n'
          << "observed_voxels = " << state.global.observed_count() << '\n'
          << "mesh_vertices = " << result.mesh.vertices.size() << '\n'
          << "mesh_triangles = " << result.mesh.triangles.size() << '\n';
  if (result.reference_error) summary << "mean_error_mm = " << *result.reference_error * 1000.0 << '\n';
  return result;
}

}  // namespace flowfuse::bench
