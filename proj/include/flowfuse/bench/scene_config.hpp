#pragma once

#include <cctype>
#include <cstdio>
#include <filesystem>
#include <string>

#include "flowfuse/integrator/reconstruction.hpp"
#include "flowfuse/io/key_value.hpp"

namespace flowfuse::bench {

namespace fs = std::filesystem;

/// Expands a printf-style pattern containing one integer conversion, e.g. "depth/%06ld.png".
inline std::string format_frame(const std::string& pattern, long frame) {
  const int n = std::snprintf(nullptr, 0, pattern.c_str(), frame);
  require(n >= 0, "bad frame pattern '" + pattern + "'");
  std::string out(static_cast<std::size_t>(n) + 1, '\0');
  std::snprintf(out.data(), out.size(), pattern.c_str(), frame);
  out.pop_back();
  return out;
}

inline void check_frame_pattern(const std::string& pattern) {
  int conversions = 0;
  for (std::size_t i = 0; i < pattern.size(); ++i) {
    if (pattern[i] != '%') continue;
    if (i + 1 < pattern.size() && pattern[i + 1] == '%') {
      ++i;
      continue;
    }
    std::size_t j = i + 1;
    while (j < pattern.size() && (std::isdigit(static_cast<unsigned char>(pattern[j])) || pattern[j] == '0')) ++j;
    require(j + 1 < pattern.size() && pattern[j] == 'l' && pattern[j + 1] == 'd',
            "frame pattern '" + pattern + "' must use a single %ld conversion (e.g. %06ld)");
    ++conversions;
    i = j + 1;
  }
  require(conversions == 1, "frame pattern '" + pattern + "' must contain exactly one %ld conversion");
}

/// Reads fx, fy, cx, cy, width, height and depth_scale from `prefix` keys.
inline Intrinsics intrinsics_from(const KeyValueConfig& kv, const std::string& prefix = "") {
  Intrinsics k;
  k.fx = kv.get_double(prefix + "fx");
  k.fy = kv.get_double(prefix + "fy");
  k.cx = kv.get_double(prefix + "cx");
  k.cy = kv.get_double(prefix + "cy");
  k.width = static_cast<int>(kv.get_int(prefix + "width"));
  k.height = static_cast<int>(kv.get_int(prefix + "height"));
  k.depth_scale = kv.get_double(prefix + "depth_scale", 1000.0);
  k.validate();
  return k;
}

inline Intrinsics load_intrinsics(const std::string& path) { return intrinsics_from(KeyValueConfig::load(path)); }

inline void write_intrinsics(std::ostream& os, const Intrinsics& k) {
  const auto prec = os.precision(17);
  os << "fx = " << k.fx << "\nfy = " << k.fy << "\ncx = " << k.cx << "\ncy = " << k.cy << "\nwidth = " << k.width
     << "\nheight = " << k.height << "\ndepth_scale = " << k.depth_scale << '\n';
  os.precision(prec);
}

enum class FlowSourceKind { External, Zero, RigidIcp, NearestNeighbor };

inline FlowSourceKind parse_flow_source(const std::string& s) {
  if (s == "external") return FlowSourceKind::External;
  if (s == "zero") return FlowSourceKind::Zero;
  if (s == "rigid") return FlowSourceKind::RigidIcp;
  if (s == "nn") return FlowSourceKind::NearestNeighbor;
  fail(ErrorKind::InvalidArgument, "flow.source must be one of external, zero, rigid, nn (got '" + s + "')");
}

inline const char* flow_source_name(FlowSourceKind k) {
  switch (k) {
    case FlowSourceKind::External: return "external";
    case FlowSourceKind::Zero: return "zero";
    case FlowSourceKind::RigidIcp: return "rigid";
    case FlowSourceKind::NearestNeighbor: return "nn";
  }
  return "";
}

/// Everything a reconstruction run needs. Relative paths are resolved
/// against the directory holding the config file.
struct SceneConfig {
  fs::path dataset_root;
  std::string depth_pattern = "depth/%06ld.png";
  long first_frame = 0;
  long frames = 0;

  ReconstructionConfig recon;

  FlowSourceKind flow_source = FlowSourceKind::Zero;
  std::string flow_pattern = "flow/%06ld.ply";
  double flow_match_tolerance = 1e-6;  // m, in the flow files' coordinates
  Vec3 scale = Vec3::Ones();            // external flow files live in the scaled space

  fs::path output_dir = "out";
  long checkpoint_every = 25;
  fs::path reference_mesh;  // optional; enables a final mesh error in the summary

  KeyValueConfig echo;

  fs::path depth_path(long frame) const { return dataset_root / format_frame(depth_pattern, frame); }
  fs::path flow_path(long frame) const { return dataset_root / format_frame(flow_pattern, frame); }

  void validate() const {
    require(frames >= 1, "dataset.frames must be >= 1");
    require(first_frame >= 0, "dataset.first_frame must be >= 0");
    require(checkpoint_every >= 1, "output.checkpoint_every must be >= 1");
    require(scale.minCoeff() > 0.0 && is_finite(scale), "scale factors must be positive");
    require(flow_match_tolerance > 0.0, "flow.match_tolerance must be positive");
    check_frame_pattern(depth_pattern);
    if (flow_source == FlowSourceKind::External) check_frame_pattern(flow_pattern);
    recon.grid.validate();
    recon.intrinsics.validate();
    recon.refine.validate();
    require(fs::is_directory(dataset_root), "dataset root '" + dataset_root.string() + "' does not exist");
    if (!reference_mesh.empty())
      require(fs::is_regular_file(reference_mesh), "reference mesh '" + reference_mesh.string() + "' does not exist");
  }
};

namespace detail {

inline Vec3 vec3_from(const KeyValueConfig& kv, const std::string& key, const Vec3& fallback) {
  if (!kv.has(key)) return fallback;
  const auto v = kv.get_doubles(key);
  require(v.size() == 3, "config key '" + key + "' needs three numbers");
  return Vec3(v[0], v[1], v[2]);
}

inline fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() ? path : base / path;
}

inline RigidTransform pose_from(const KeyValueConfig& kv, const std::string& key) {
  const auto v = kv.get_doubles(key);
  require(v.size() == 16, "config key '" + key + "' needs 16 numbers (row-major 4x4)");
  Mat4 m;
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) m(r, c) = v[std::size_t(r * 4 + c)];
  auto t = RigidTransform::from_matrix(m);
  require(t.is_valid(1e-6), "config key '" + key + "' is not a rigid transform");
  t.rotation = orthonormalize(t.rotation);
  return t;
}

}  // namespace detail

/// Builds a SceneConfig from key=value text. `base_dir` anchors relative paths.
inline SceneConfig scene_config_from(const KeyValueConfig& kv, const fs::path& base_dir) {
  SceneConfig s;
  s.echo = kv;
  s.dataset_root = detail::resolve(base_dir, kv.get("dataset.root", "."));
  s.depth_pattern = kv.get("dataset.depth_pattern", s.depth_pattern);
  s.first_frame = kv.get_int("dataset.first_frame", 0);
  s.frames = kv.get_int("dataset.frames");

  auto& r = s.recon;
  if (kv.has("dataset.intrinsics"))
    r.intrinsics = load_intrinsics(detail::resolve(base_dir, kv.get("dataset.intrinsics")).string());
  else
    r.intrinsics = intrinsics_from(kv, "camera.");

  r.grid.voxel_size = kv.get_double("volume.voxel_size", r.grid.voxel_size);
  if (kv.has("volume.resolution")) {
    const auto res = kv.get_doubles("volume.resolution");
    require(res.size() == 1 || res.size() == 3, "volume.resolution needs one or three integers");
    for (int a = 0; a < 3; ++a) {
      const double d = res[res.size() == 1 ? 0 : std::size_t(a)];
      require(d == std::floor(d) && d >= 2, "volume.resolution entries must be integers >= 2");
      r.grid.dims[a] = static_cast<int>(d);
    }
  }
  r.grid.origin = detail::vec3_from(kv, "volume.origin", r.grid.origin);
  r.max_weight = kv.get_double("volume.max_weight", r.max_weight);

  const auto mode = kv.get("tracking.mode", "icp");
  if (mode == "icp") r.tracking = TrackingMode::Icp;
  else if (mode == "fixed") r.tracking = TrackingMode::Fixed;
  else fail(ErrorKind::InvalidArgument, "tracking.mode must be icp or fixed");
  if (kv.has("tracking.initial_pose")) r.initial_pose = detail::pose_from(kv, "tracking.initial_pose");

  r.icp.max_iterations = static_cast<int>(kv.get_int("icp.max_iterations", r.icp.max_iterations));
  r.icp.convergence_delta = kv.get_double("icp.convergence_delta", r.icp.convergence_delta);
  r.icp.max_correspondence_dist = kv.get_double("icp.max_correspondence_dist", r.icp.max_correspondence_dist);
  r.baseline_icp = r.icp;

  r.refine.step_alpha = kv.get_double("refine.step_alpha", r.refine.step_alpha);
  r.refine.iterations = static_cast<int>(kv.get_int("refine.iterations", r.refine.iterations));
  r.refine.active_band = kv.get_double("refine.active_band", r.refine.active_band);
  r.refine.cap_displacement = kv.get_bool("refine.cap_displacement", r.refine.cap_displacement);
  r.render.splat_radius = static_cast<int>(kv.get_int("render.splat_radius", 0));

  s.flow_source = parse_flow_source(kv.get("flow.source", "zero"));
  s.flow_pattern = kv.get("flow.pattern", s.flow_pattern);
  s.flow_match_tolerance = kv.get_double("flow.match_tolerance", s.flow_match_tolerance);
  s.scale = detail::vec3_from(kv, "scale.factors", s.scale);

  s.output_dir = detail::resolve(base_dir, kv.get("output.dir", "out"));
  s.checkpoint_every = kv.get_int("output.checkpoint_every", s.checkpoint_every);
  if (const auto ref = kv.get("evaluation.reference_mesh", ""); !ref.empty())
    s.reference_mesh = detail::resolve(base_dir, ref);
  s.validate();
  return s;
}

inline SceneConfig load_scene_config(const fs::path& path) {
  const auto kv = KeyValueConfig::load(path.string());
  return scene_config_from(kv, path.parent_path().empty() ? fs::path(".") : path.parent_path());
}

}  // namespace flowfuse::bench
