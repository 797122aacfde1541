#pragma once

#include <cmath>
#include <string>

#include "flowfuse/io/ply.hpp"
#include "flowfuse/tsdf/mesh.hpp"

namespace flowfuse {

namespace detail {

inline std::vector<double> column(const std::vector<Vec3>& v, int axis) {
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i][axis];
  return out;
}

inline const ply::Element& require_vertices(const ply::File& f) {
  const auto* e = f.find("vertex");
  if (!e) fail(ErrorKind::Data, "ply: no vertex element");
  return *e;
}

inline std::vector<Vec3> read_triplet(const ply::Element& e, const char* a, const char* b, const char* c) {
  const auto *pa = e.find(a), *pb = e.find(b), *pc = e.find(c);
  if (!pa || !pb || !pc) return {};
  if (pa->is_list || pb->is_list || pc->is_list) fail(ErrorKind::Data, "ply: coordinate property is a list");
  std::vector<Vec3> out(e.count);
  for (std::size_t i = 0; i < e.count; ++i) out[i] = Vec3(pa->values[i], pb->values[i], pc->values[i]);
  return out;
}

}  // namespace detail

/// Point cloud as a PLY vertex element: x,y,z[,nx,ny,nz][,red,green,blue].
inline ply::File to_ply(const PointCloud& cloud, ply::Format format = ply::Format::BinaryLittleEndian) {
  ply::File f;
  f.format = format;
  ply::Element e;
  e.name = "vertex";
  e.count = cloud.size();
  for (int a = 0; a < 3; ++a) e.add_scalar(std::string(1, "xyz"[a]), ply::Type::Float64, detail::column(cloud.points, a));
  if (cloud.has_normals())
    for (int a = 0; a < 3; ++a)
      e.add_scalar(std::string("n") + "xyz"[a], ply::Type::Float64, detail::column(cloud.normals, a));
  if (cloud.has_colors()) {
    const char* names[] = {"red", "green", "blue"};
    for (int a = 0; a < 3; ++a) {
      auto c = detail::column(cloud.colors, a);
      for (auto& x : c) x = std::round(std::clamp(x, 0.0, 1.0) * 255.0);
      e.add_scalar(names[a], ply::Type::UInt8, std::move(c));
    }
  }
  f.elements.push_back(std::move(e));
  return f;
}

inline PointCloud cloud_from_ply(const ply::File& f) {
  const auto& e = detail::require_vertices(f);
  PointCloud cloud;
  cloud.points = detail::read_triplet(e, "x", "y", "z");
  if (cloud.points.size() != e.count) fail(ErrorKind::Data, "ply: vertex element lacks x, y, z");
  cloud.normals = detail::read_triplet(e, "nx", "ny", "nz");
  for (auto& n : cloud.normals) {
    const double len = n.norm();
    if (len > 0.0) n /= len;
  }
  cloud.colors = detail::read_triplet(e, "red", "green", "blue");
  if (!cloud.colors.empty() && ply::is_integral(e.find("red")->type))
    for (auto& c : cloud.colors) c /= 255.0;
  validate(cloud);
  return cloud;
}

inline void write_point_cloud(const std::string& path, const PointCloud& cloud,
                              ply::Format format = ply::Format::BinaryLittleEndian) {
  ply::write_file(path, to_ply(cloud, format));
}

inline PointCloud read_point_cloud(const std::string& path) { return cloud_from_ply(ply::read_file(path)); }

/// Positions plus flow vectors: x,y,z,fx,fy,fz per point.
struct FlowSample {
  PointCloud points;
  FlowField flow;
};

inline ply::File flow_to_ply(const PointCloud& points, const FlowField& flow,
                             ply::Format format = ply::Format::BinaryLittleEndian) {
  require_same_length(points.size(), flow.size(), "flow file");
  ply::File f;
  f.format = format;
  ply::Element e;
  e.name = "vertex";
  e.count = points.size();
  for (int a = 0; a < 3; ++a) e.add_scalar(std::string(1, "xyz"[a]), ply::Type::Float64, detail::column(points.points, a));
  for (int a = 0; a < 3; ++a)
    e.add_scalar(std::string("f") + "xyz"[a], ply::Type::Float64, detail::column(flow.vectors, a));
  f.elements.push_back(std::move(e));
  return f;
}

inline FlowSample flow_from_ply(const ply::File& f) {
  const auto& e = detail::require_vertices(f);
  FlowSample s;
  s.points.points = detail::read_triplet(e, "x", "y", "z");
  s.flow.vectors = detail::read_triplet(e, "fx", "fy", "fz");
  if (s.points.size() != e.count || s.flow.size() != e.count)
    fail(ErrorKind::Data, "ply: flow file needs x, y, z, fx, fy, fz");
  validate(s.points);
  validate(s.flow);
  return s;
}

inline void write_flow(const std::string& path, const PointCloud& points, const FlowField& flow,
                       ply::Format format = ply::Format::BinaryLittleEndian) {
  ply::write_file(path, flow_to_ply(points, flow, format));
}

inline FlowSample read_flow(const std::string& path) { return flow_from_ply(ply::read_file(path)); }

/// Mesh PLY. The per-vertex scalar goes to a float "quality" property; when
/// `colors` is non-empty it is written as red/green/blue.
inline ply::File mesh_to_ply(const TriangleMesh& mesh, const std::vector<Vec3>& colors = {},
                             ply::Format format = ply::Format::BinaryLittleEndian) {
  validate(mesh);
  ply::File f;
  f.format = format;
  ply::Element v;
  v.name = "vertex";
  v.count = mesh.vertices.size();
  for (int a = 0; a < 3; ++a)
    v.add_scalar(std::string(1, "xyz"[a]), ply::Type::Float32, detail::column(mesh.vertices, a));
  if (!mesh.vertex_scalar.empty()) v.add_scalar("quality", ply::Type::Float32, mesh.vertex_scalar);
  if (!colors.empty()) {
    require_same_length(colors.size(), mesh.vertices.size(), "mesh colors");
    const char* names[] = {"red", "green", "blue"};
    for (int a = 0; a < 3; ++a) {
      auto c = detail::column(colors, a);
      for (auto& x : c) x = std::round(std::clamp(x, 0.0, 1.0) * 255.0);
      v.add_scalar(names[a], ply::Type::UInt8, std::move(c));
    }
  }
  ply::Element faces;
  faces.name = "face";
  faces.count = mesh.triangles.size();
  std::vector<std::vector<std::int64_t>> idx(mesh.triangles.size());
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t)
    idx[t] = {mesh.triangles[t][0], mesh.triangles[t][1], mesh.triangles[t][2]};
  faces.add_list("vertex_indices", ply::Type::UInt8, ply::Type::Int32, std::move(idx));
  f.elements.push_back(std::move(v));
  f.elements.push_back(std::move(faces));
  return f;
}

inline TriangleMesh mesh_from_ply(const ply::File& f) {
  const auto& v = detail::require_vertices(f);
  TriangleMesh mesh;
  mesh.vertices = detail::read_triplet(v, "x", "y", "z");
  if (mesh.vertices.size() != v.count) fail(ErrorKind::Data, "ply: vertex element lacks x, y, z");
  if (const auto* q = v.find("quality"); q && !q->is_list) mesh.vertex_scalar = q->values;
  if (const auto* fe = f.find("face")) {
    const ply::Property* idx = fe->find("vertex_indices");
    if (!idx) idx = fe->find("vertex_index");
    if (!idx || !idx->is_list) fail(ErrorKind::Data, "ply: face element lacks vertex_indices");
    for (const auto& poly : idx->lists) {
      if (poly.size() < 3) fail(ErrorKind::Data, "ply: face with fewer than 3 vertices");
      for (std::size_t q = 1; q + 1 < poly.size(); ++q)
        mesh.triangles.push_back({static_cast<std::uint32_t>(poly[0]), static_cast<std::uint32_t>(poly[q]),
                                  static_cast<std::uint32_t>(poly[q + 1])});
    }
  }
  drop_degenerate_triangles(mesh);
  validate(mesh);
  return mesh;
}

inline void write_mesh(const std::string& path, const TriangleMesh& mesh, const std::vector<Vec3>& colors = {},
                       ply::Format format = ply::Format::BinaryLittleEndian) {
  ply::write_file(path, mesh_to_ply(mesh, colors, format));
}

inline TriangleMesh read_mesh(const std::string& path) { return mesh_from_ply(ply::read_file(path)); }

}  // namespace flowfuse
