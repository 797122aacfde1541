#pragma once

#include <Eigen/Eigenvalues>

#include "flowfuse/geom/neighbor_index.hpp"

namespace flowfuse {

struct NormalEstimationConfig {
  std::size_t k = 16;
  Vec3 sensor_origin = Vec3::Zero();
  // Two smallest covariance eigenvalues this close (relative to the largest)
  // mean the neighborhood has no unique plane.
  double degenerate_tolerance = 1e-9;
};

/// k-NN PCA normals, oriented toward the sensor origin.
///
/// The returned cloud carries unit normals for every point; neighborhoods whose
/// smallest two eigenvalues coincide are flagged in `normal_degenerate`.
inline PointCloud estimate_normals(const PointCloud& cloud, const NormalEstimationConfig& cfg = {}) {
  require(cfg.k >= 3, "normal estimation needs k >= 3");
  require(cloud.size() >= cfg.k, "normal estimation needs at least k points");
  for (const auto& p : cloud.points) require(is_finite(p), "point coordinate is NaN or infinite", ErrorKind::Data);

  const NeighborIndex index(cloud.points);
  PointCloud out = cloud;
  out.normals.assign(cloud.size(), Vec3::UnitZ());
  out.normal_degenerate.assign(cloud.size(), 0);

  Eigen::SelfAdjointEigenSolver<Mat3> solver;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const auto nbrs = index.knn(cloud.points[i], cfg.k);
    Vec3 mean = Vec3::Zero();
    for (const auto& nb : nbrs) mean += cloud.points[nb.index];
    mean /= static_cast<double>(nbrs.size());
    Mat3 cov = Mat3::Zero();
    for (const auto& nb : nbrs) {
      const Vec3 d = cloud.points[nb.index] - mean;
      cov += d * d.transpose();
    }
    cov /= static_cast<double>(nbrs.size());

    solver.compute(cov);
    const Vec3 evals = solver.eigenvalues();  // ascending
    Vec3 n = solver.eigenvectors().col(0).normalized();
    const double scale = std::max(evals[2], std::numeric_limits<double>::min());
    if (evals[1] - evals[0] <= cfg.degenerate_tolerance * scale) out.normal_degenerate[i] = 1;
    if (n.dot(cfg.sensor_origin - cloud.points[i]) < 0.0) n = -n;
    out.normals[i] = n;
  }
  return out;
}

inline PointCloud estimate_normals(const PointCloud& cloud, std::size_t k) {
  NormalEstimationConfig cfg;
  cfg.k = k;
  return estimate_normals(cloud, cfg);
}

}  // namespace flowfuse
