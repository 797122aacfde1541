#pragma once

#include <algorithm>
#include <cmath>

#include "flowfuse/geom/neighbor_index.hpp"

namespace flowfuse {

/// Weights of the combined training loss. Defaults are the values that work
/// well on FlyingThings-style data.
struct LossWeights {
  double lambda_pp = 1.3;
  double lambda_cos = 0.9;

  void validate() const {
    require(std::isfinite(lambda_pp) && lambda_pp >= 0.0, "lambda_pp must be finite and >= 0");
    require(std::isfinite(lambda_cos) && lambda_cos >= 0.0, "lambda_cos must be finite and >= 0");
  }
};

/// A scalar loss and its gradient with respect to every predicted vector.
struct LossTerm {
  double value = 0.0;
  FlowField gradient;
  std::size_t used = 0;     // points contributing to the mean
  bool degenerate = false;  // every point was skipped
};

struct LossReport {
  double l2 = 0.0;
  double point_to_plane = 0.0;
  double cosine = 0.0;
  double combined = 0.0;
  FlowField gradient;
  bool cosine_degenerate = false;
};

/// Mean end-point distance, mean_i |v_i - g_i|.
inline LossTerm l2_loss(const FlowField& pred, const FlowField& gt) {
  require_same_length(pred.size(), gt.size(), "l2_loss");
  require(!pred.empty(), "l2_loss: empty flow field");
  const double inv_n = 1.0 / static_cast<double>(pred.size());
  LossTerm out;
  out.gradient = FlowField::zeros(pred.size());
  out.used = pred.size();
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const Vec3 e = pred[i] - gt[i];
    const double len = e.norm();
    out.value += len;
    if (len > 0.0) out.gradient[i] = e * (inv_n / len);
  }
  out.value *= inv_n;
  return out;
}

/// Mean squared point-to-plane distance of the warped source against its
/// nearest target point. Correspondences are held fixed for the gradient.
inline LossTerm point_to_plane_loss(const PointCloud& source, const FlowField& pred, const PointCloud& target,
                                    const NeighborIndex& target_index) {
  require_same_length(source.size(), pred.size(), "point_to_plane_loss");
  require(target.has_normals(), "point_to_plane_loss: target has no normals");
  require(target_index.size() == target.size(), "point_to_plane_loss: index does not match target");

  struct Pair {
    std::size_t src;
    Vec3 normal;
    double proj;
  };
  std::vector<Pair> pairs;
  pairs.reserve(source.size());
  for (std::size_t i = 0; i < source.size(); ++i) {
    const Vec3 warped = source.points[i] + pred[i];
    const auto nb = target_index.nearest(warped);
    if (target.is_degenerate(nb.index)) continue;
    const Vec3& n = target.normals[nb.index];
    pairs.push_back({i, n, n.dot(warped - target.points[nb.index])});
  }
  if (pairs.empty()) fail(ErrorKind::Numerical, "point_to_plane_loss: all target normals are degenerate");

  LossTerm out;
  out.gradient = FlowField::zeros(source.size());
  out.used = pairs.size();
  const double inv_n = 1.0 / static_cast<double>(pairs.size());
  for (const auto& p : pairs) {
    out.value += p.proj * p.proj;
    out.gradient[p.src] = p.normal * (2.0 * inv_n * p.proj);
  }
  out.value *= inv_n;
  return out;
}

inline constexpr double kDefaultCosineEps = 1e-8;

/// Mean of (1 - cos(v, g)) over points where both vectors are longer than eps.
inline LossTerm cosine_loss(const FlowField& pred, const FlowField& gt, double eps = kDefaultCosineEps) {
  require_same_length(pred.size(), gt.size(), "cosine_loss");
  LossTerm out;
  out.gradient = FlowField::zeros(pred.size());
  std::vector<std::size_t> kept;
  kept.reserve(pred.size());
  for (std::size_t i = 0; i < pred.size(); ++i)
    if (pred[i].norm() >= eps && gt[i].norm() >= eps) kept.push_back(i);
  if (kept.empty()) {
    out.degenerate = true;
    return out;
  }
  out.used = kept.size();
  const double inv_m = 1.0 / static_cast<double>(kept.size());
  for (const auto i : kept) {
    const Vec3& v = pred[i];
    const Vec3& g = gt[i];
    const double nv = v.norm(), ng = g.norm();
    const double c = v.dot(g) / (nv * ng);
    out.value += std::max(0.0, 1.0 - c);  // rounding can push c past 1
    // d cos / dv = g/(|v||g|) - cos v/|v|^2
    out.gradient[i] = -(g / (nv * ng) - v * (c / (nv * nv))) * inv_m;
  }
  out.value *= inv_m;
  return out;
}

inline LossReport combined_loss(const PointCloud& source, const FlowField& pred, const FlowField& gt,
                                const PointCloud& target, const NeighborIndex& target_index,
                                const LossWeights& weights = {}, double cosine_eps = kDefaultCosineEps) {
  weights.validate();
  const auto l2 = l2_loss(pred, gt);
  const auto pp = point_to_plane_loss(source, pred, target, target_index);
  const auto cs = cosine_loss(pred, gt, cosine_eps);

  LossReport r;
  r.l2 = l2.value;
  r.point_to_plane = pp.value;
  r.cosine = cs.value;
  r.cosine_degenerate = cs.degenerate;
  r.combined = l2.value + weights.lambda_pp * pp.value + weights.lambda_cos * cs.value;
  r.gradient = FlowField::zeros(pred.size());
  for (std::size_t i = 0; i < pred.size(); ++i)
    r.gradient[i] = l2.gradient[i] + weights.lambda_pp * pp.gradient[i] + weights.lambda_cos * cs.gradient[i];
  return r;
}

}  // namespace flowfuse
