#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "flowfuse/geom/point_cloud.hpp"

namespace flowfuse {

struct Neighbor {
  std::size_t index = 0;
  double distance = 0.0;
};

/// Exact kd-tree over a fixed point set.
///
/// Results are ordered by (squared distance, point index), so equidistant
/// candidates always resolve to the lowest index and every query is
/// deterministic. Immutable after construction; concurrent queries are safe.
class NeighborIndex {
public:
  static constexpr std::size_t kLeafSize = 8;

  explicit NeighborIndex(std::span<const Vec3> points) : points_(points.begin(), points.end()) {
    require(!points_.empty(), "empty point set", ErrorKind::InvalidArgument);
    for (const auto& p : points_) require(is_finite(p), "point coordinate is NaN or infinite", ErrorKind::Data);
    order_.resize(points_.size());
    std::iota(order_.begin(), order_.end(), std::uint32_t{0});
    nodes_.reserve(2 * points_.size() / kLeafSize + 1);
    build(0, static_cast<std::uint32_t>(order_.size()));
  }

  std::size_t size() const noexcept { return points_.size(); }
  const Vec3& point(std::size_t i) const { return points_[i]; }
  std::span<const Vec3> points() const noexcept { return points_; }

  Neighbor nearest(const Vec3& query) const {
    Candidate best{std::numeric_limits<double>::infinity(), std::numeric_limits<std::uint32_t>::max()};
    nearest_recursive(0, query, best);
    return {best.index, std::sqrt(best.dist2)};
  }

  /// k nearest points, closest first. Returns min(k, size()) entries.
  std::vector<Neighbor> knn(const Vec3& query, std::size_t k) const {
    std::vector<Candidate> heap;
    k = std::min(k, points_.size());
    if (k == 0) return {};
    heap.reserve(k + 1);
    knn_recursive(0, query, k, heap);
    std::vector<Neighbor> out;
    out.reserve(heap.size());
    for (const auto& c : heap) out.push_back({c.index, std::sqrt(c.dist2)});
    return out;
  }

  /// All points within `radius` (inclusive), closest first.
  std::vector<Neighbor> radius_search(const Vec3& query, double radius) const {
    std::vector<Candidate> hits;
    radius_recursive(0, query, radius * radius, hits);
    std::sort(hits.begin(), hits.end());
    std::vector<Neighbor> out;
    out.reserve(hits.size());
    for (const auto& c : hits) out.push_back({c.index, std::sqrt(c.dist2)});
    return out;
  }

private:
  struct Node {
    std::uint32_t begin = 0, end = 0;
    std::int32_t axis = -1;  // -1 marks a leaf
    double split = 0.0;
    std::uint32_t left = 0, right = 0;
  };

  struct Candidate {
    double dist2;
    std::uint32_t index;
    bool operator<(const Candidate& o) const { return dist2 < o.dist2 || (dist2 == o.dist2 && index < o.index); }
  };

  std::uint32_t build(std::uint32_t begin, std::uint32_t end) {
    const auto id = static_cast<std::uint32_t>(nodes_.size());
    nodes_.push_back({begin, end, -1, 0.0, 0, 0});
    if (end - begin <= kLeafSize) return id;

    Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
    Vec3 hi = -lo;
    for (auto i = begin; i < end; ++i) {
      lo = lo.cwiseMin(points_[order_[i]]);
      hi = hi.cwiseMax(points_[order_[i]]);
    }
    int axis = 0;
    (hi - lo).maxCoeff(&axis);
    if (hi[axis] - lo[axis] <= 0.0) return id;  // all coincident

    const auto mid = begin + (end - begin) / 2;
    std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                     [&](std::uint32_t a, std::uint32_t b) {
                       const double ca = points_[a][axis], cb = points_[b][axis];
                       return ca < cb || (ca == cb && a < b);
                     });
    const double split = points_[order_[mid]][axis];
    const auto left = build(begin, mid);
    const auto right = build(mid, end);
    auto& node = nodes_[id];
    node.axis = axis;
    node.split = split;
    node.left = left;
    node.right = right;
    return id;
  }

  // Points in `left` have coord <= split, points in `right` have coord >= split.
  void nearest_recursive(std::uint32_t id, const Vec3& q, Candidate& best) const {
    const Node& node = nodes_[id];
    if (node.axis < 0) {
      for (auto i = node.begin; i < node.end; ++i) {
        const auto idx = order_[i];
        const Candidate c{(points_[idx] - q).squaredNorm(), idx};
        if (c < best) best = c;
      }
      return;
    }
    const double diff = q[node.axis] - node.split;
    const auto near = diff <= 0.0 ? node.left : node.right;
    const auto far = diff <= 0.0 ? node.right : node.left;
    nearest_recursive(near, q, best);
    if (diff * diff <= best.dist2) nearest_recursive(far, q, best);
  }

  void knn_recursive(std::uint32_t id, const Vec3& q, std::size_t k, std::vector<Candidate>& best) const {
    const Node& node = nodes_[id];
    if (node.axis < 0) {
      for (auto i = node.begin; i < node.end; ++i) {
        const auto idx = order_[i];
        const Candidate c{(points_[idx] - q).squaredNorm(), idx};
        if (best.size() == k && !(c < best.back())) continue;
        best.insert(std::upper_bound(best.begin(), best.end(), c), c);
        if (best.size() > k) best.pop_back();
      }
      return;
    }
    const double diff = q[node.axis] - node.split;
    const auto near = diff <= 0.0 ? node.left : node.right;
    const auto far = diff <= 0.0 ? node.right : node.left;
    knn_recursive(near, q, k, best);
    if (best.size() < k || diff * diff <= best.back().dist2) knn_recursive(far, q, k, best);
  }

  void radius_recursive(std::uint32_t id, const Vec3& q, double r2, std::vector<Candidate>& hits) const {
    const Node& node = nodes_[id];
    if (node.axis < 0) {
      for (auto i = node.begin; i < node.end; ++i) {
        const auto idx = order_[i];
        const double d2 = (points_[idx] - q).squaredNorm();
        if (d2 <= r2) hits.push_back({d2, idx});
      }
      return;
    }
    const double diff = q[node.axis] - node.split;
    const auto near = diff <= 0.0 ? node.left : node.right;
    const auto far = diff <= 0.0 ? node.right : node.left;
    radius_recursive(near, q, r2, hits);
    if (diff * diff <= r2) radius_recursive(far, q, r2, hits);
  }

  std::vector<Vec3> points_;
  std::vector<std::uint32_t> order_;
  std::vector<Node> nodes_;
};

inline NeighborIndex build_index(const PointCloud& cloud) { return NeighborIndex(cloud.points); }

inline Neighbor nearest(const NeighborIndex& index, const Vec3& query) { return index.nearest(query); }

}  // namespace flowfuse
