#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "flowfuse/error.hpp"

namespace flowfuse {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

inline bool is_finite(const Vec3& v) { return std::isfinite(v.x()) && std::isfinite(v.y()) && std::isfinite(v.z()); }

/// Unordered set of 3D points (meters) with optional per-point attributes.
///
/// Attribute vectors are either empty or exactly as long as `points`.
/// `normal_degenerate` is only meaningful alongside `normals`; a set flag
/// marks a normal whose neighborhood had no well-defined plane, and
/// consumers that project onto normals skip those points.
struct PointCloud {
  std::vector<Vec3> points;
  std::vector<Vec3> normals;
  std::vector<Vec3> colors;  // RGB in [0,1]
  std::vector<std::uint8_t> normal_degenerate;

  std::size_t size() const noexcept { return points.size(); }
  bool empty() const noexcept { return points.empty(); }
  bool has_normals() const noexcept { return !normals.empty(); }
  bool has_colors() const noexcept { return !colors.empty(); }

  bool is_degenerate(std::size_t i) const noexcept {
    return !normal_degenerate.empty() && normal_degenerate[i] != 0;
  }

  void clear_normals() {
    normals.clear();
    normal_degenerate.clear();
  }
};

/// Per-point 3D displacements aligned with a source cloud.
struct FlowField {
  std::vector<Vec3> vectors;

  FlowField() = default;
  explicit FlowField(std::vector<Vec3> v) : vectors(std::move(v)) {}
  static FlowField zeros(std::size_t n) { return FlowField(std::vector<Vec3>(n, Vec3::Zero())); }

  std::size_t size() const noexcept { return vectors.size(); }
  bool empty() const noexcept { return vectors.empty(); }
  Vec3& operator[](std::size_t i) { return vectors[i]; }
  const Vec3& operator[](std::size_t i) const { return vectors[i]; }
};

/// Throws if the cloud violates its invariants.
inline void validate(const PointCloud& cloud) {
  const auto n = cloud.points.size();
  require(cloud.normals.empty() || cloud.normals.size() == n, "normals length does not match points", ErrorKind::Data);
  require(cloud.colors.empty() || cloud.colors.size() == n, "colors length does not match points", ErrorKind::Data);
  require(cloud.normal_degenerate.empty() || cloud.normal_degenerate.size() == n,
          "degenerate flags length does not match points", ErrorKind::Data);
  for (const auto& p : cloud.points) require(is_finite(p), "point coordinate is NaN or infinite", ErrorKind::Data);
  for (const auto& nrm : cloud.normals)
    require(std::abs(nrm.norm() - 1.0) <= 1e-6, "stored normal is not unit length", ErrorKind::Data);
}

inline void validate(const FlowField& flow) {
  for (const auto& v : flow.vectors) require(is_finite(v), "flow component is NaN or infinite", ErrorKind::Data);
}

inline void require_same_length(std::size_t a, std::size_t b, const char* what) {
  if (a != b)
    fail(ErrorKind::InvalidArgument,
         std::string(what) + ": length mismatch (" + std::to_string(a) + " vs " + std::to_string(b) + ")");
}

}  // namespace flowfuse
