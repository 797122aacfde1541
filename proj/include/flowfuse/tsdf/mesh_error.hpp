#pragma once

#include <algorithm>
#include <limits>
#include <numeric>

#include "flowfuse/tsdf/mesh.hpp"

namespace flowfuse {

/// Closest point on triangle (a, b, c) to p (Voronoi-region walk).
inline Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
  const Vec3 ab = b - a, ac = c - a, ap = p - a;
  const double d1 = ab.dot(ap), d2 = ac.dot(ap);
  if (d1 <= 0.0 && d2 <= 0.0) return a;

  const Vec3 bp = p - b;
  const double d3 = ab.dot(bp), d4 = ac.dot(bp);
  if (d3 >= 0.0 && d4 <= d3) return b;

  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) return a + ab * (d1 / (d1 - d3));

  const Vec3 cp = p - c;
  const double d5 = ab.dot(cp), d6 = ac.dot(cp);
  if (d6 >= 0.0 && d5 <= d6) return c;

  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) return a + ac * (d2 / (d2 - d6));

  const double va = d3 * d6 - d5 * d4;
  if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) return b + (c - b) * ((d4 - d3) / ((d4 - d3) + (d5 - d6)));

  const double denom = 1.0 / (va + vb + vc);
  return a + ab * (vb * denom) + ac * (vc * denom);
}

inline double point_triangle_distance(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
  return (p - closest_point_on_triangle(p, a, b, c)).norm();
}

/// Bounding-volume hierarchy over mesh triangles for closest-surface queries.
class TriangleBvh {
public:
  explicit TriangleBvh(const TriangleMesh& mesh) : mesh_(mesh) {
    require(!mesh.triangles.empty(), "mesh has no triangles");
    order_.resize(mesh.triangles.size());
    std::iota(order_.begin(), order_.end(), std::uint32_t{0});
    centroids_.reserve(mesh.triangles.size());
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
      const auto& f = mesh.triangles[t];
      centroids_.push_back((mesh.vertices[f[0]] + mesh.vertices[f[1]] + mesh.vertices[f[2]]) / 3.0);
    }
    build(0, static_cast<std::uint32_t>(order_.size()));
  }

  /// Unsigned distance from p to the closest point of the surface.
  double distance(const Vec3& p) const {
    double best2 = std::numeric_limits<double>::infinity();
    query(0, p, best2);
    return std::sqrt(best2);
  }

private:
  struct Node {
    Vec3 lo, hi;
    std::uint32_t begin, end;
    std::uint32_t left = 0, right = 0;
    bool leaf = true;
  };

  static constexpr std::uint32_t kLeafSize = 4;

  std::uint32_t build(std::uint32_t begin, std::uint32_t end) {
    Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity()), hi = -lo;
    Vec3 clo = lo, chi = hi;
    for (auto i = begin; i < end; ++i) {
      const auto& f = mesh_.triangles[order_[i]];
      for (int q = 0; q < 3; ++q) {
        lo = lo.cwiseMin(mesh_.vertices[f[q]]);
        hi = hi.cwiseMax(mesh_.vertices[f[q]]);
      }
      clo = clo.cwiseMin(centroids_[order_[i]]);
      chi = chi.cwiseMax(centroids_[order_[i]]);
    }
    const auto id = static_cast<std::uint32_t>(nodes_.size());
    nodes_.push_back({lo, hi, begin, end});
    int axis = 0;
    (chi - clo).maxCoeff(&axis);
    if (end - begin <= kLeafSize || chi[axis] <= clo[axis]) return id;
    const auto mid = begin + (end - begin) / 2;
    std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                     [&](std::uint32_t a, std::uint32_t b) {
                       const double ca = centroids_[a][axis], cb = centroids_[b][axis];
                       return ca < cb || (ca == cb && a < b);
                     });
    const auto left = build(begin, mid);
    const auto right = build(mid, end);
    nodes_[id].left = left;
    nodes_[id].right = right;
    nodes_[id].leaf = false;
    return id;
  }

  static double box_distance2(const Node& n, const Vec3& p) {
    const Vec3 d = (n.lo - p).cwiseMax(p - n.hi).cwiseMax(Vec3::Zero());
    return d.squaredNorm();
  }

  void query(std::uint32_t id, const Vec3& p, double& best2) const {
    const Node& n = nodes_[id];
    if (n.leaf) {
      for (auto i = n.begin; i < n.end; ++i) {
        const auto& f = mesh_.triangles[order_[i]];
        const Vec3 q = closest_point_on_triangle(p, mesh_.vertices[f[0]], mesh_.vertices[f[1]], mesh_.vertices[f[2]]);
        best2 = std::min(best2, (p - q).squaredNorm());
      }
      return;
    }
    const double dl = box_distance2(nodes_[n.left], p), dr = box_distance2(nodes_[n.right], p);
    const auto first = dl <= dr ? n.left : n.right, second = dl <= dr ? n.right : n.left;
    if (std::min(dl, dr) <= best2) query(first, p, best2);
    if (std::max(dl, dr) <= best2) query(second, p, best2);
  }

  const TriangleMesh& mesh_;
  std::vector<std::uint32_t> order_;
  std::vector<Vec3> centroids_;
  std::vector<Node> nodes_;
};

struct MeshErrorResult {
  double mean = 0.0;
  std::vector<double> per_vertex;  // same units as the meshes
};

/// Distance from every reconstructed vertex to the reference surface.
inline MeshErrorResult mesh_error(const TriangleMesh& reconstructed, const TriangleMesh& reference) {
  require(!reconstructed.vertices.empty(), "reconstructed mesh is empty", ErrorKind::Data);
  require(!reference.triangles.empty(), "reference mesh is empty", ErrorKind::Data);
  const TriangleBvh bvh(reference);
  MeshErrorResult r;
  r.per_vertex.reserve(reconstructed.vertices.size());
  for (const auto& v : reconstructed.vertices) {
    r.per_vertex.push_back(bvh.distance(v));
    r.mean += r.per_vertex.back();
  }
  r.mean /= static_cast<double>(r.per_vertex.size());
  return r;
}

/// Blue -> red heatmap over [0, max_error]; values past the end saturate.
inline Vec3 error_color(double error, double max_error) {
  const double t = std::clamp(error / max_error, 0.0, 1.0);
  // blue (0,0,1) -> cyan -> green -> yellow -> red (1,0,0)
  const double r = std::clamp(4.0 * t - 2.0, 0.0, 1.0);
  const double g = t < 0.5 ? std::clamp(4.0 * t, 0.0, 1.0) : std::clamp(4.0 - 4.0 * t, 0.0, 1.0);
  const double b = std::clamp(2.0 - 4.0 * t, 0.0, 1.0);
  return {r, g, b};
}

}  // namespace flowfuse
