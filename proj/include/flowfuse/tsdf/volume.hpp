#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <vector>

#include "flowfuse/geom/point_cloud.hpp"

namespace flowfuse {

using Vec3i = Eigen::Vector3i;

/// Regular voxel grid; voxel (i, j, k) is centered at origin + voxel_size * (i, j, k).
struct GridGeometry {
  Vec3i dims = Vec3i::Constant(256);
  double voxel_size = 0.003;
  Vec3 origin = Vec3::Zero();

  std::size_t voxel_count() const { return std::size_t(dims.x()) * dims.y() * dims.z(); }
  std::size_t linear(int i, int j, int k) const { return std::size_t(i) + std::size_t(dims.x()) * (std::size_t(j) + std::size_t(dims.y()) * k); }
  bool contains(int i, int j, int k) const {
    return i >= 0 && j >= 0 && k >= 0 && i < dims.x() && j < dims.y() && k < dims.z();
  }
  Vec3 center(int i, int j, int k) const { return origin + voxel_size * Vec3(i, j, k); }
  Vec3 to_grid(const Vec3& p) const { return (p - origin) / voxel_size; }
  double truncation() const { return 4.0 * voxel_size; }

  /// Bounding box of the voxel centers.
  Vec3 min_corner() const { return origin; }
  Vec3 max_corner() const { return origin + voxel_size * (dims.cast<double>() - Vec3::Ones()); }

  void validate() const {
    require(dims.minCoeff() >= 2, "volume resolution must be at least 2 in every axis");
    require(voxel_size > 0.0 && std::isfinite(voxel_size), "voxel_size must be positive");
    require(is_finite(origin), "volume origin must be finite");
  }

  bool operator==(const GridGeometry& o) const {
    return dims == o.dims && voxel_size == o.voxel_size && origin == o.origin;
  }
};

template <class Fn>
void for_each_voxel(const GridGeometry& g, Fn&& fn) {
  std::size_t idx = 0;
  for (int k = 0; k < g.dims.z(); ++k)
    for (int j = 0; j < g.dims.y(); ++j)
      for (int i = 0; i < g.dims.x(); ++i, ++idx) fn(i, j, k, idx);
}

struct TsdfSample {
  double tsdf;
  double weight;
};

/// Dense truncated signed distance volume.
///
/// tsdf is the signed distance divided by the truncation distance
/// (4 voxels) and clamped to [-1, 1]; positive in front of the surface.
/// A voxel with weight 0 has never been observed and holds tsdf 1.
class TsdfVolume {
public:
  static constexpr double kDefaultMaxWeight = 128.0;

  TsdfVolume() = default;
  explicit TsdfVolume(const GridGeometry& geometry, double max_weight = kDefaultMaxWeight)
      : geometry_(geometry), max_weight_(max_weight) {
    geometry_.validate();
    require(max_weight > 0.0, "max_weight must be positive");
    tsdf_.assign(geometry_.voxel_count(), 1.0);
    weight_.assign(geometry_.voxel_count(), 0.0);
  }

  const GridGeometry& geometry() const noexcept { return geometry_; }
  double voxel_size() const noexcept { return geometry_.voxel_size; }
  double truncation() const noexcept { return geometry_.truncation(); }
  double max_weight() const noexcept { return max_weight_; }
  std::size_t voxel_count() const noexcept { return tsdf_.size(); }

  double& tsdf(std::size_t idx) { return tsdf_[idx]; }
  double tsdf(std::size_t idx) const { return tsdf_[idx]; }
  double& weight(std::size_t idx) { return weight_[idx]; }
  double weight(std::size_t idx) const { return weight_[idx]; }
  double tsdf(int i, int j, int k) const { return tsdf_[geometry_.linear(i, j, k)]; }
  double weight(int i, int j, int k) const { return weight_[geometry_.linear(i, j, k)]; }

  const std::vector<double>& tsdf_values() const noexcept { return tsdf_; }
  const std::vector<double>& weight_values() const noexcept { return weight_; }

  void set(std::size_t idx, double tsdf, double weight) {
    tsdf_[idx] = tsdf;
    weight_[idx] = weight;
  }

  std::size_t observed_count() const {
    std::size_t n = 0;
    for (double w : weight_) n += w > 0.0;
    return n;
  }

  void reset() {
    std::fill(tsdf_.begin(), tsdf_.end(), 1.0);
    std::fill(weight_.begin(), weight_.end(), 0.0);
  }

  /// Trilinear tsdf and weight at a point given in grid (voxel index) units.
  /// Corners with a zero interpolation coefficient are not consulted; every
  /// other corner must be inside the grid and observed.
  std::optional<TsdfSample> sample_grid(const Vec3& g) const {
    if (!is_finite(g)) return std::nullopt;
    const Vec3 base = g.array().floor();
    const Vec3 f = g - base;
    const int i0 = static_cast<int>(base.x()), j0 = static_cast<int>(base.y()), k0 = static_cast<int>(base.z());
    double value = 0.0, weight = 0.0;
    for (int c = 0; c < 8; ++c) {
      const int di = c & 1, dj = (c >> 1) & 1, dk = (c >> 2) & 1;
      const double coef = (di ? f.x() : 1.0 - f.x()) * (dj ? f.y() : 1.0 - f.y()) * (dk ? f.z() : 1.0 - f.z());
      if (coef == 0.0) continue;
      const int i = i0 + di, j = j0 + dj, k = k0 + dk;
      if (!geometry_.contains(i, j, k)) return std::nullopt;
      const auto idx = geometry_.linear(i, j, k);
      if (weight_[idx] <= 0.0) return std::nullopt;
      value += coef * tsdf_[idx];
      weight += coef * weight_[idx];
    }
    return TsdfSample{value, weight};
  }

  std::optional<double> sample(const Vec3& p) const {
    const auto s = sample_grid(geometry_.to_grid(p));
    return s ? std::optional<double>(s->tsdf) : std::nullopt;
  }

  /// Central-difference gradient in tsdf units per meter (grid coordinates in).
  std::optional<Vec3> gradient_grid(const Vec3& g) const {
    Vec3 grad;
    for (int a = 0; a < 3; ++a) {
      Vec3 lo = g, hi = g;
      lo[a] -= 1.0;
      hi[a] += 1.0;
      const auto sl = sample_grid(lo);
      if (!sl) return std::nullopt;
      const auto sh = sample_grid(hi);
      if (!sh) return std::nullopt;
      grad[a] = (sh->tsdf - sl->tsdf) / (2.0 * geometry_.voxel_size);
    }
    return grad;
  }

  std::optional<Vec3> gradient(const Vec3& p) const { return gradient_grid(geometry_.to_grid(p)); }

private:
  GridGeometry geometry_;
  double max_weight_ = kDefaultMaxWeight;
  std::vector<double> tsdf_;
  std::vector<double> weight_;
};

}  // namespace flowfuse
