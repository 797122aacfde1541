#pragma once

#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "flowfuse/geom/neighbor_index.hpp"
#include "flowfuse/rigid_transform.hpp"

namespace flowfuse {

struct IcpConfig {
  int max_iterations = 30;
  double convergence_delta = 1e-6;  // on the norm of the (omega, t) update
  double max_correspondence_dist = 0.1;
  std::size_t min_correspondences = 6;
  double max_condition_number = 1e12;
};

struct IcpResult {
  RigidTransform transform;
  double residual = 0.0;  // sum of squared point-to-plane distances at `transform`
  int iterations = 0;
  std::size_t correspondences = 0;
  std::vector<double> residual_trace;  // residual at the start of each iteration
};

namespace detail {

inline Mat3 skew(const Vec3& w) {
  Mat3 s;
  s << 0.0, -w.z(), w.y(), w.z(), 0.0, -w.x(), -w.y(), w.x(), 0.0;
  return s;
}

struct PlaneSystem {
  Eigen::Matrix<double, 6, 6> ata = Eigen::Matrix<double, 6, 6>::Zero();
  Eigen::Matrix<double, 6, 1> atb = Eigen::Matrix<double, 6, 1>::Zero();
  double residual = 0.0;
  std::size_t count = 0;
};

inline PlaneSystem accumulate_plane_system(const PointCloud& source, const PointCloud& target,
                                           const NeighborIndex& index, const RigidTransform& pose,
                                           double max_dist) {
  PlaneSystem sys;
  for (const auto& ps : source.points) {
    const Vec3 p = pose.apply(ps);
    const Neighbor nb = index.nearest(p);
    if (nb.distance > max_dist || target.is_degenerate(nb.index)) continue;
    const Vec3& n = target.normals[nb.index];
    const double r = n.dot(p - target.points[nb.index]);
    Eigen::Matrix<double, 6, 1> j;
    j.head<3>() = p.cross(n);
    j.tail<3>() = n;
    sys.ata.selfadjointView<Eigen::Lower>().rankUpdate(j);
    sys.atb += j * r;
    sys.residual += r * r;
    ++sys.count;
  }
  sys.ata.triangularView<Eigen::StrictlyUpper>() = sys.ata.transpose();
  return sys;
}

}  // namespace detail

/// Point-to-plane ICP (Gauss-Newton on the small-angle linearization).
///
/// Returns the transform mapping `source` into the frame of `target`.
/// Throws Error(Numerical) with "insufficient overlap" when fewer than
/// `min_correspondences` pairs survive the distance gate, and with
/// "degenerate geometry" when the 6x6 normal matrix is near-singular.
inline IcpResult icp_point_to_plane(const PointCloud& source, const PointCloud& target, const NeighborIndex& index,
                                    const RigidTransform& init, const IcpConfig& cfg = {}) {
  require(!source.empty() && !target.empty(), "icp: empty point set");
  require(target.has_normals(), "icp: target has no normals");
  require(cfg.max_iterations > 0 && cfg.convergence_delta > 0 && cfg.max_correspondence_dist > 0 &&
              cfg.min_correspondences > 0,
          "icp: configuration values must be positive");

  IcpResult result;
  RigidTransform pose = init;
  pose.rotation = orthonormalize(pose.rotation);

  for (int it = 0; it < cfg.max_iterations; ++it) {
    auto sys = detail::accumulate_plane_system(source, target, index, pose, cfg.max_correspondence_dist);
    if (sys.count < cfg.min_correspondences) fail(ErrorKind::Numerical, "insufficient overlap");
    result.residual_trace.push_back(sys.residual);

    Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, 6, 6>> eig(sys.ata, Eigen::EigenvaluesOnly);
    const double lo = eig.eigenvalues()[0], hi = eig.eigenvalues()[5];
    if (!(lo > 0.0) || hi / lo > cfg.max_condition_number) fail(ErrorKind::Numerical, "degenerate geometry");

    const Eigen::Matrix<double, 6, 1> x = sys.ata.ldlt().solve(-sys.atb);
    const Vec3 omega = x.head<3>();
    const Vec3 t = x.tail<3>();
    const RigidTransform step{orthonormalize(Mat3::Identity() + detail::skew(omega)), t};
    pose = step * pose;
    pose.rotation = orthonormalize(pose.rotation);
    result.iterations = it + 1;
    if (x.norm() < cfg.convergence_delta) break;
  }

  const auto final_sys = detail::accumulate_plane_system(source, target, index, pose, cfg.max_correspondence_dist);
  result.transform = pose;
  result.residual = final_sys.residual;
  result.correspondences = final_sys.count;
  return result;
}

inline IcpResult icp_point_to_plane(const PointCloud& source, const PointCloud& target, const RigidTransform& init,
                                    const IcpConfig& cfg = {}) {
  require(!target.empty(), "icp: empty point set");
  const NeighborIndex index(target.points);
  return icp_point_to_plane(source, target, index, init, cfg);
}

}  // namespace flowfuse
