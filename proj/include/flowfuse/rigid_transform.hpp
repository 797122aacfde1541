#pragma once

#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

#include <Eigen/Geometry>
#include <Eigen/SVD>

#include "flowfuse/geom/point_cloud.hpp"

namespace flowfuse {

using Mat4 = Eigen::Matrix4d;

/// Element of SE(3): x -> R x + t.
struct RigidTransform {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  static RigidTransform identity() { return {}; }

  static RigidTransform from_axis_angle(const Vec3& axis, double angle, const Vec3& t = Vec3::Zero()) {
    return {Eigen::AngleAxisd(angle, axis.normalized()).toRotationMatrix(), t};
  }

  static RigidTransform from_matrix(const Mat4& m) { return {m.topLeftCorner<3, 3>(), m.topRightCorner<3, 1>()}; }

  Mat4 matrix() const {
    Mat4 m = Mat4::Identity();
    m.topLeftCorner<3, 3>() = rotation;
    m.topRightCorner<3, 1>() = translation;
    return m;
  }

  Vec3 apply(const Vec3& p) const { return rotation * p + translation; }
  Vec3 operator*(const Vec3& p) const { return apply(p); }

  RigidTransform operator*(const RigidTransform& rhs) const {
    return {rotation * rhs.rotation, rotation * rhs.translation + translation};
  }

  RigidTransform inverse() const {
    const Mat3 rt = rotation.transpose();
    return {rt, -rt * translation};
  }

  double rotation_angle() const {
    const double c = std::clamp((rotation.trace() - 1.0) * 0.5, -1.0, 1.0);
    return std::acos(c);
  }

  bool is_valid(double tol = 1e-9) const {
    return (rotation.transpose() * rotation - Mat3::Identity()).cwiseAbs().maxCoeff() <= tol &&
           std::abs(rotation.determinant() - 1.0) <= tol;
  }
};

/// Nearest rotation to `m` in the Frobenius sense (polar decomposition).
inline Mat3 orthonormalize(const Mat3& m) {
  Eigen::JacobiSVD<Mat3> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 u = svd.matrixU();
  const Mat3 v = svd.matrixV();
  if ((u * v.transpose()).determinant() < 0.0) u.col(2) = -u.col(2);
  return u * v.transpose();
}

inline PointCloud transform_cloud(const PointCloud& cloud, const RigidTransform& t) {
  PointCloud out = cloud;
  for (auto& p : out.points) p = t.apply(p);
  for (auto& n : out.normals) n = t.rotation * n;
  return out;
}

/// Writes the transform as a 4x4 row-major matrix, one row per line.
inline void write_transform(std::ostream& os, const RigidTransform& t) {
  const Mat4 m = t.matrix();
  os << std::setprecision(17);
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) os << (c ? " " : "") << m(r, c);
    os << '\n';
  }
}

inline RigidTransform read_transform(std::istream& is) {
  Mat4 m;
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c)
      if (!(is >> m(r, c))) fail(ErrorKind::Data, "transform: expected 16 numbers");
  RigidTransform t = RigidTransform::from_matrix(m);
  require(t.is_valid(1e-6), "transform: rotation block is not orthonormal", ErrorKind::Data);
  t.rotation = orthonormalize(t.rotation);
  return t;
}

inline std::string to_string(const RigidTransform& t) {
  std::ostringstream os;
  write_transform(os, t);
  return os.str();
}

}  // namespace flowfuse
