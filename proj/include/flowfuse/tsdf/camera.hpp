#pragma once

#include <cmath>
#include <vector>

#include "flowfuse/rigid_transform.hpp"

namespace flowfuse {

/// Pinhole intrinsics. Pixel (u, v) has its center at integer coordinates.
struct Intrinsics {
  double fx = 525.0;
  double fy = 525.0;
  double cx = 319.5;
  double cy = 239.5;
  int width = 640;
  int height = 480;
  double depth_scale = 1000.0;  // raw depth units per meter in image files

  void validate() const {
    require(fx > 0 && fy > 0, "intrinsics: fx and fy must be positive");
    require(width > 0 && height > 0, "intrinsics: image size must be positive");
    require(depth_scale > 0, "intrinsics: depth_scale must be positive");
  }
};

/// Round-half-up pixel snapping shared by projection and rendering.
inline long pixel_round(double x) { return static_cast<long>(std::floor(x + 0.5)); }

/// Dense depth image in meters; 0 marks an invalid pixel.
struct DepthMap {
  int width = 0;
  int height = 0;
  std::vector<double> depth;
  Intrinsics intrinsics;

  DepthMap() = default;
  explicit DepthMap(const Intrinsics& k) : width(k.width), height(k.height), depth(std::size_t(k.width) * k.height, 0.0), intrinsics(k) {}

  double& at(int u, int v) { return depth[std::size_t(v) * width + u]; }
  double at(int u, int v) const { return depth[std::size_t(v) * width + u]; }
  bool in_bounds(long u, long v) const { return u >= 0 && v >= 0 && u < width && v < height; }

  std::size_t valid_count() const {
    std::size_t n = 0;
    for (double d : depth) n += d > 0.0;
    return n;
  }

  void validate() const {
    intrinsics.validate();
    require(width == intrinsics.width && height == intrinsics.height, "depth map size does not match intrinsics");
    require(depth.size() == std::size_t(width) * height, "depth buffer size mismatch");
    for (double d : depth) require(std::isfinite(d) && d >= 0.0, "depth must be finite and >= 0", ErrorKind::Data);
  }
};

/// Back-projects every valid pixel into the camera frame, row-major pixel order.
inline PointCloud back_project(const DepthMap& depth) {
  PointCloud cloud;
  const auto& k = depth.intrinsics;
  cloud.points.reserve(depth.valid_count());
  for (int v = 0; v < depth.height; ++v)
    for (int u = 0; u < depth.width; ++u) {
      const double d = depth.at(u, v);
      if (d <= 0.0) continue;
      cloud.points.emplace_back((u - k.cx) * d / k.fx, (v - k.cy) * d / k.fy, d);
    }
  return cloud;
}

}  // namespace flowfuse
