#pragma once

#include <vector>

#include "flowfuse/tsdf/volume.hpp"

namespace flowfuse {

/// Per-voxel displacement (meters) on the grid of a companion volume.
struct VoxelFlowField {
  GridGeometry geometry;
  std::vector<Vec3> vectors;

  VoxelFlowField() = default;
  explicit VoxelFlowField(const GridGeometry& g) : geometry(g), vectors(g.voxel_count(), Vec3::Zero()) {}

  Vec3& operator[](std::size_t idx) { return vectors[idx]; }
  const Vec3& operator[](std::size_t idx) const { return vectors[idx]; }

  double max_norm() const {
    double m = 0.0;
    for (const auto& v : vectors) m = std::max(m, v.norm());
    return m;
  }
};

}  // namespace flowfuse
