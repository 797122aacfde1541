#pragma once

#include <array>
#include <unordered_map>

#include "flowfuse/tsdf/mesh.hpp"
#include "flowfuse/tsdf/volume.hpp"

namespace flowfuse {

namespace mc {

// Usual corner numbering: 0..3 counter-clockwise on z=0, 4..7 above them.
inline constexpr std::array<std::array<int, 3>, 8> kCorner = {{
    {0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}, {0, 0, 1}, {1, 0, 1}, {1, 1, 1}, {0, 1, 1},
}};

inline constexpr std::array<std::array<int, 2>, 12> kEdge = {{
    {0, 1}, {1, 2}, {2, 3}, {3, 0}, {4, 5}, {5, 6}, {6, 7}, {7, 4}, {0, 4}, {1, 5}, {2, 6}, {3, 7},
}};

struct CaseTable {
  static constexpr int kMaxEntries = 3 * 12 + 1;
  // Edge ids, three per triangle, -1 terminated.
  std::array<std::array<int, kMaxEntries>, 256> triangles;
  std::array<std::uint16_t, 256> edges;  // bitmask of edges with a crossing
};

inline int edge_between(int a, int b) {
  for (int e = 0; e < 12; ++e)
    if ((kEdge[e][0] == a && kEdge[e][1] == b) || (kEdge[e][0] == b && kEdge[e][1] == a)) return e;
  return -1;
}

// Builds the 256-case table by contour tracing on the cube faces. On each
// face, every run of inside corners is cut off by one segment, which also
// fixes the ambiguous two-diagonal face the same way for both cells sharing
// it. Segments chain into closed loops which are fan-triangulated with the
// winding that puts the positive (outside) side in front.
inline CaseTable build_case_table() {
  // Face corner cycles; orientation is fixed below to be counter-clockwise
  // seen from outside the cube.
  std::array<std::array<int, 4>, 6> faces = {{
      {0, 1, 2, 3}, {4, 5, 6, 7}, {0, 1, 5, 4}, {3, 2, 6, 7}, {0, 3, 7, 4}, {1, 2, 6, 5},
  }};
  const auto pos = [](int c) { return Vec3(kCorner[c][0], kCorner[c][1], kCorner[c][2]); };
  for (auto& f : faces) {
    const Vec3 n = (pos(f[1]) - pos(f[0])).cross(pos(f[2]) - pos(f[1]));
    const Vec3 outward = 0.25 * (pos(f[0]) + pos(f[1]) + pos(f[2]) + pos(f[3])) - Vec3::Constant(0.5);
    if (n.dot(outward) < 0.0) std::swap(f[1], f[3]);
  }

  const auto trace = [&](int mask, bool flip) {
    std::array<int, CaseTable::kMaxEntries> tris;
    tris.fill(-1);
    std::array<int, 12> next;
    next.fill(-1);
    const auto inside = [&](int c) { return (mask >> c) & 1; };
    for (const auto& f : faces) {
      // Crossings in walk order, tagged entry (outside -> inside) or exit.
      std::array<std::pair<int, bool>, 4> xs;
      int nx = 0;
      for (int q = 0; q < 4; ++q) {
        const int a = f[q], b = f[(q + 1) % 4];
        if (inside(a) != inside(b)) xs[nx++] = {edge_between(a, b), inside(b) != 0};
      }
      for (int q = 0; q < nx; ++q)
        if (xs[q].second) next[xs[q].first] = xs[(q + 1) % nx].first;  // entry -> following exit
    }
    int nt = 0;
    std::array<bool, 12> used{};
    for (int start = 0; start < 12; ++start) {
      if (next[start] < 0 || used[start]) continue;
      std::array<int, 12> loop;
      int len = 0;
      for (int e = start; !used[e]; e = next[e]) {
        used[e] = true;
        loop[len++] = e;
      }
      for (int q = 1; q + 1 < len; ++q) {
        tris[3 * nt + 0] = loop[0];
        tris[3 * nt + 1] = flip ? loop[q + 1] : loop[q];
        tris[3 * nt + 2] = flip ? loop[q] : loop[q + 1];
        ++nt;
      }
    }
    return tris;
  };

  // Corner 0 alone inside: the triangle must face away from it.
  bool flip = false;
  {
    const auto t = trace(1, false);
    const auto mid = [&](int e) { return 0.5 * (pos(kEdge[e][0]) + pos(kEdge[e][1])); };
    const Vec3 n = (mid(t[1]) - mid(t[0])).cross(mid(t[2]) - mid(t[0]));
    flip = n.dot(Vec3::Ones()) < 0.0;
  }

  CaseTable table;
  for (int mask = 0; mask < 256; ++mask) {
    table.triangles[mask] = trace(mask, flip);
    std::uint16_t bits = 0;
    for (int e = 0; e < 12; ++e)
      if (((mask >> kEdge[e][0]) & 1) != ((mask >> kEdge[e][1]) & 1)) bits |= std::uint16_t(1u << e);
    table.edges[mask] = bits;
  }
  return table;
}

inline const CaseTable& case_table() {
  static const CaseTable table = build_case_table();
  return table;
}

}  // namespace mc

/// Marching cubes at isolevel 0. Corners with tsdf < 0 are inside. Cells with
/// an unobserved corner are skipped. Vertices are shared between cells and
/// triangles face the positive side.
inline TriangleMesh extract_mesh(const TsdfVolume& vol) {
  const auto& g = vol.geometry();
  const auto& table = mc::case_table();
  TriangleMesh mesh;
  std::unordered_map<std::uint64_t, std::uint32_t> edge_vertex;

  const auto vertex_on_edge = [&](int i, int j, int k, int e, const std::array<double, 8>& val) {
    const int a = mc::kEdge[e][0], b = mc::kEdge[e][1];
    const auto& ca = mc::kCorner[a];
    const auto& cb = mc::kCorner[b];
    int axis = 0;
    while (ca[axis] == cb[axis]) ++axis;
    const int li = i + std::min(ca[0], cb[0]), lj = j + std::min(ca[1], cb[1]), lk = k + std::min(ca[2], cb[2]);
    const std::uint64_t key = std::uint64_t(g.linear(li, lj, lk)) * 3 + std::uint64_t(axis);
    if (auto it = edge_vertex.find(key); it != edge_vertex.end()) return it->second;
    // Interpolate from the lower corner along +axis so both cells agree bit-for-bit.
    const int lo = ca[axis] < cb[axis] ? a : b, hi = lo == a ? b : a;
    const double t = val[lo] / (val[lo] - val[hi]);
    Vec3 p = g.center(li, lj, lk);
    p[axis] += t * g.voxel_size;
    const auto id = static_cast<std::uint32_t>(mesh.vertices.size());
    mesh.vertices.push_back(p);
    edge_vertex.emplace(key, id);
    return id;
  };

  std::array<double, 8> val;
  for (int k = 0; k + 1 < g.dims.z(); ++k)
    for (int j = 0; j + 1 < g.dims.y(); ++j)
      for (int i = 0; i + 1 < g.dims.x(); ++i) {
        int mask = 0;
        bool observed = true;
        for (int c = 0; c < 8 && observed; ++c) {
          const auto idx = g.linear(i + mc::kCorner[c][0], j + mc::kCorner[c][1], k + mc::kCorner[c][2]);
          observed = vol.weight(idx) > 0.0;
          val[c] = vol.tsdf(idx);
          if (val[c] < 0.0) mask |= 1 << c;
        }
        if (!observed || mask == 0 || mask == 255) continue;
        const auto& tri = table.triangles[mask];
        for (int q = 0; tri[q] >= 0; q += 3) {
          mesh.triangles.push_back({vertex_on_edge(i, j, k, tri[q], val), vertex_on_edge(i, j, k, tri[q + 1], val),
                                    vertex_on_edge(i, j, k, tri[q + 2], val)});
        }
      }
  return mesh;
}

}  // namespace flowfuse
