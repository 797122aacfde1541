#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "flowfuse/geom/point_cloud.hpp"

namespace flowfuse {

struct TriangleMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<std::uint32_t, 3>> triangles;
  std::vector<double> vertex_scalar;  // optional, e.g. per-vertex error

  bool empty() const noexcept { return triangles.empty(); }

  Vec3 face_normal(std::size_t t) const {
    const auto& f = triangles[t];
    return (vertices[f[1]] - vertices[f[0]]).cross(vertices[f[2]] - vertices[f[0]]);
  }
};

inline void validate(const TriangleMesh& mesh) {
  const auto n = mesh.vertices.size();
  for (const auto& v : mesh.vertices) require(is_finite(v), "mesh vertex is NaN or infinite", ErrorKind::Data);
  for (const auto& f : mesh.triangles) {
    require(f[0] < n && f[1] < n && f[2] < n, "triangle index out of range", ErrorKind::Data);
    require(f[0] != f[1] && f[1] != f[2] && f[0] != f[2], "degenerate triangle", ErrorKind::Data);
  }
  require(mesh.vertex_scalar.empty() || mesh.vertex_scalar.size() == n, "vertex scalar length mismatch",
          ErrorKind::Data);
}

/// Removes triangles with repeated indices.
inline void drop_degenerate_triangles(TriangleMesh& mesh) {
  std::erase_if(mesh.triangles, [](const auto& f) { return f[0] == f[1] || f[1] == f[2] || f[0] == f[2]; });
}

}  // namespace flowfuse
