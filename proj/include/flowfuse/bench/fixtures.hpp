#pragma once

#include <filesystem>
#include <fstream>
#include <ostream>
#include <random>
#include <sstream>
#include <string>

#include "flowfuse/bench/scene_config.hpp"
#include "flowfuse/bench/synthetic.hpp"
#include "flowfuse/io/depth_png.hpp"
#include "flowfuse/io/geometry_io.hpp"

namespace flowfuse::bench {

/// Camera at `eye` looking at `target` (camera z forward, y down).
inline RigidTransform look_at(const Vec3& eye, const Vec3& target, const Vec3& up = Vec3(0, -1, 0)) {
  const Vec3 z = (target - eye).normalized();
  const Vec3 x = z.cross(up).normalized();
  const Vec3 y = z.cross(x);
  RigidTransform t;
  t.rotation.col(0) = x;
  t.rotation.col(1) = y;
  t.rotation.col(2) = z;
  t.translation = eye;
  return t;
}

/// Depth as it comes back from a 16-bit PNG with the given depth_scale.
inline DepthMap quantize(DepthMap d) {
  const double s = d.intrinsics.depth_scale;
  for (auto& x : d.depth) {
    const double q = std::round(x * s);
    x = (q > 0.0 && q <= 65535.0) ? q / s : 0.0;
  }
  return d;
}

/// Static concave corner seen by a slowly moving camera.
struct CornerSequence {
  Intrinsics intrinsics{256.0, 256.0, 159.5, 119.5, 320, 240, 5000.0};
  synth::Corner corner{Vec3::Constant(-0.15), Vec3::Constant(0.35)};
  GridGeometry grid{Vec3i::Constant(96), 0.004, Vec3::Constant(-0.17)};
  int frames = 10;

  RigidTransform pose(int n) const {
    const RigidTransform base = look_at(Vec3(0.2, 0.22, 0.25), corner.apex);
    return RigidTransform::from_axis_angle(Vec3::UnitY(), 0.01 * n, Vec3(0.002 * n, 0.0, 0.0)) * base;
  }
  DepthMap depth(int n) const { return quantize(synth::render_corner(intrinsics, pose(n), corner)); }
};

/// A sphere that translates and stretches along the axes over the sequence,
/// observed by a fixed camera at the origin looking down +z.
///
/// Frame n shows the ellipsoid c + t_n + diag(s_n)(x - c) of the canonical
/// sphere; the ground-truth flow maps every observed point back onto the
/// canonical sphere.
struct SphereSequence {
  Intrinsics intrinsics{320.0, 320.0, 159.5, 159.5, 320, 320, 5000.0};
  Vec3 center{0.0, 0.0, 0.5};
  double radius = 0.08;
  int frames = 20;
  Vec3 final_translation{0.02, 0.01, 0.0};
  Vec3 final_stretch{0.15, -0.075, 0.075};  // s_n = 1 + stretch * n / (frames - 1)
  GridGeometry grid{Vec3i::Constant(128), 0.003, Vec3(0.0, 0.0, 0.5) - Vec3::Constant(0.003 * 63.5)};

  double progress(int n) const { return frames > 1 ? double(n) / (frames - 1) : 0.0; }
  Vec3 translation(int n) const { return final_translation * progress(n); }
  Vec3 scale(int n) const { return Vec3::Ones() + final_stretch * progress(n); }

  DepthMap depth(int n) const {
    return quantize(synth::render_ellipsoid(intrinsics, RigidTransform::identity(), center + translation(n),
                                            radius * scale(n)));
  }

  /// Flow for world-frame points of frame n back to the canonical sphere.
  FlowField flow(const PointCloud& live, int n) const {
    FlowField f = FlowField::zeros(live.size());
    const Vec3 t = translation(n), s = scale(n);
    for (std::size_t i = 0; i < live.size(); ++i) {
      const Vec3& x = live.points[i];
      f[i] = center + (x - center - t).cwiseQuotient(s) - x;
    }
    return f;
  }

  TriangleMesh reference(int subdivisions = 5) const { return synth::icosphere(center, radius, subdivisions); }
};

namespace detail {

inline void write_text(const fs::path& path, const std::string& text) {
  std::ofstream os(path);
  if (!os) fail(ErrorKind::Data, "cannot write " + path.string());
  os << text;
}

inline std::string vec_text(const Vec3& v) {
  std::ostringstream ss;
  ss.precision(17);
  ss << v.x() << ' ' << v.y() << ' ' << v.z();
  return ss.str();
}

inline std::string pose_text(const RigidTransform& t) {
  std::ostringstream ss;
  ss.precision(17);
  const Mat4 m = t.matrix();
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) ss << (r || c ? " " : "") << m(r, c);
  return ss.str();
}

inline std::string scene_text(const GridGeometry& g, int frames, const std::string& tracking,
                              const RigidTransform& initial_pose, const std::string& flow_source,
                              const std::string& output, const std::string& reference) {
  std::ostringstream ss;
  ss.precision(17);
  ss << "[dataset]\nroot = .\ndepth_pattern = depth/%06ld.png\nframes = " << frames
     << "\nintrinsics = intrinsics.txt\n\n"
     << "[volume]\nvoxel_size = " << g.voxel_size << "\nresolution = " << g.dims.x() << ' ' << g.dims.y() << ' '
     << g.dims.z() << "\norigin = " << vec_text(g.origin) << "\n\n"
     << "[tracking]\nmode = " << tracking << "\ninitial_pose = " << pose_text(initial_pose) << "\n\n"
     << "[refine]\nstep_alpha = 0.1\niterations = 30\n\n"
     << "[flow]\nsource = " << flow_source << "\npattern = flow/%06ld.ply\n\n"
     << "[output]\ndir = " << output << "\ncheckpoint_every = 25\n\n"
     << "[evaluation]\nreference_mesh = " << reference << '\n';
  return ss.str();
}

inline void write_intrinsics_file(const fs::path& path, const Intrinsics& k) {
  std::ofstream os(path);
  if (!os) fail(ErrorKind::Data, "cannot write " + path.string());
  write_intrinsics(os, k);
}

// Writes depth PNGs and ground-truth flow files whose
// positions are the back-projection of the PNG exactly as it will be read.
template <class Seq>
void write_sphere_sequence(const fs::path& dir, const Seq& seq) {
  fs::create_directories(dir / "depth");
  fs::create_directories(dir / "flow");
  write_intrinsics_file(dir / "intrinsics.txt", seq.intrinsics);
  for (int n = 0; n < seq.frames; ++n) {
    const auto png = dir / format_frame("depth/%06ld.png", n);
    write_depth_png(png.string(), seq.depth(n));
    const PointCloud live = back_project(read_depth_png(png.string(), seq.intrinsics));
    write_flow((dir / format_frame("flow/%06ld.ply", n)).string(), live, seq.flow(live, n));
  }
  write_mesh((dir / "reference.ply").string(), seq.reference());
}

}  // namespace detail

/// 32 points for the loss command: source on a plane, ground-truth flow onto
/// a sphere patch (the target, with radial normals), prediction = gt + noise.
struct LossFixture {
  PointCloud source, target;
  FlowField pred, gt;
};

inline LossFixture make_loss_fixture(std::uint32_t seed, std::size_t n = 32, double noise = 0.01) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  std::normal_distribution<double> gauss(0.0, noise);
  LossFixture f;
  const Vec3 c(0.0, 0.0, 1.0);
  const double r = 0.5;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3 s(0.3 * uni(rng), 0.3 * uni(rng), 0.0);
    const Vec3 dir = (Vec3(s.x(), s.y(), 0.0) - c).normalized();
    const Vec3 on_sphere = c + r * dir;
    f.source.points.push_back(s);
    f.target.points.push_back(on_sphere);
    f.target.normals.push_back(dir);
    f.gt.vectors.push_back(on_sphere - s);
    f.pred.vectors.push_back(on_sphere - s + Vec3(gauss(rng), gauss(rng), gauss(rng)));
  }
  return f;
}

/// Extents of the KITTI-style rescale fixture (meters).
inline constexpr double kKittiHalfX = 0.5, kKittiHalfY = 0.3, kKittiZMin = 0.2, kKittiZMax = 1.1;

inline PointCloud make_kitti_like_cloud(std::uint32_t seed, std::size_t n = 2048) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> ux(-kKittiHalfX, kKittiHalfX), uy(-kKittiHalfY, kKittiHalfY),
      uz(kKittiZMin, kKittiZMax), un(-1.0, 1.0);
  PointCloud c;
  for (std::size_t i = 0; i < n; ++i) {
    c.points.emplace_back(ux(rng), uy(rng), uz(rng));
    Vec3 nrm(un(rng), un(rng), un(rng));
    if (nrm.norm() < 1e-3) nrm = Vec3::UnitZ();
    c.normals.push_back(nrm.normalized());
  }
  // pin the extremes so the bounding box equals the nominal extents
  c.points[0] = Vec3(-kKittiHalfX, -kKittiHalfY, kKittiZMin);
  c.points[1] = Vec3(kKittiHalfX, kKittiHalfY, kKittiZMax);
  return c;
}

/// Writes every synthetic scene under `root`. Returns the list of scene configs.
inline std::vector<fs::path> make_fixtures(const fs::path& root, std::ostream* log = nullptr) {
  std::vector<fs::path> configs;
  const auto note = [&](const std::string& s) {
    if (log) *log << s << '\n';
  };

  {  // static scene, moving camera, zero flow
    const CornerSequence seq;
    const auto dir = root / "static_corner";
    fs::create_directories(dir / "depth");
    detail::write_intrinsics_file(dir / "intrinsics.txt", seq.intrinsics);
    for (int n = 0; n < seq.frames; ++n)
      write_depth_png((dir / format_frame("depth/%06ld.png", n)).string(), seq.depth(n));
    write_mesh((dir / "reference.ply").string(), seq.corner.mesh(64));
    detail::write_text(dir / "scene.cfg", detail::scene_text(seq.grid, seq.frames, "icp", seq.pose(0), "zero",
                                                             "out", "reference.ply"));
    configs.push_back(dir / "scene.cfg");
    note("wrote " + dir.string());
  }

  {  // deforming sphere with ground-truth flow, three flow sources
    const SphereSequence seq;
    const auto dir = root / "deforming_sphere";
    detail::write_sphere_sequence(dir, seq);
    for (const char* src : {"external", "zero", "rigid"}) {
      const std::string name = std::string(src) == "external" ? "gt" : src;
      detail::write_text(dir / (name + ".cfg"),
                         detail::scene_text(seq.grid, seq.frames, "fixed", RigidTransform::identity(), src,
                                            "out_" + name, "reference.ply"));
      configs.push_back(dir / (name + ".cfg"));
    }
    note("wrote " + dir.string());
  }

  {  // translating sphere with ground-truth flow
    SphereSequence seq;
    seq.frames = 10;
    seq.final_translation = Vec3(0.018, 0.0, 0.0);
    seq.final_stretch = Vec3::Zero();
    const auto dir = root / "translating_sphere";
    detail::write_sphere_sequence(dir, seq);
    detail::write_text(dir / "gt.cfg", detail::scene_text(seq.grid, seq.frames, "fixed", RigidTransform::identity(),
                                                          "external", "out_gt", "reference.ply"));
    configs.push_back(dir / "gt.cfg");
    note("wrote " + dir.string());
  }

  {  // metrics: errors of 0.04 and 0.08 on vectors of length 0.1
    const auto dir = root / "metrics";
    fs::create_directories(dir);
    PointCloud pts;
    pts.points = {Vec3(0, 0, 1), Vec3(0.1, 0, 1)};
    const FlowField gt({Vec3(0.1, 0, 0), Vec3(0, 0.1, 0)});
    const FlowField pred({Vec3(0.14, 0, 0), Vec3(0, 0.18, 0)});
    write_flow((dir / "gt.ply").string(), pts, gt, ply::Format::Ascii);
    write_flow((dir / "pred.ply").string(), pts, pred, ply::Format::Ascii);
    note("wrote " + dir.string());
  }

  {  // loss: 32-point instance
    const auto dir = root / "loss";
    fs::create_directories(dir);
    const auto f = make_loss_fixture(7);
    write_point_cloud((dir / "source.ply").string(), f.source);
    write_point_cloud((dir / "target.ply").string(), f.target);
    write_flow((dir / "pred.ply").string(), f.source, f.pred);
    write_flow((dir / "gt.ply").string(), f.source, f.gt);
    note("wrote " + dir.string());
  }

  {  // rescale: KITTI-style extents with normals and flow
    const auto dir = root / "rescale";
    fs::create_directories(dir / "sequence");
    const auto cloud = make_kitti_like_cloud(11);
    write_point_cloud((dir / "kitti_like.ply").string(), cloud);
    std::mt19937 rng(12);
    std::normal_distribution<double> g(0.0, 0.02);
    for (int n = 0; n < 3; ++n) {
      FlowField flow = FlowField::zeros(cloud.size());
      for (auto& v : flow.vectors) v = Vec3(g(rng), g(rng), g(rng));
      write_flow((dir / format_frame("sequence/%06ld.ply", n)).string(), cloud, flow);
    }
    note("wrote " + dir.string());
  }

  {  // mesh error: concentric spheres 1 mm apart
    const auto dir = root / "mesh_error";
    fs::create_directories(dir);
    write_mesh((dir / "sphere_100mm.ply").string(), synth::icosphere(Vec3::Zero(), 0.100, 5));
    write_mesh((dir / "sphere_101mm.ply").string(), synth::icosphere(Vec3::Zero(), 0.101, 5));
    note("wrote " + dir.string());
  }
  return configs;
}

}  // namespace flowfuse::bench
