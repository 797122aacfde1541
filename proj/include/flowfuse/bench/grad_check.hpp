#pragma once

#include <algorithm>
#include <functional>

#include "flowfuse/geom/point_cloud.hpp"

namespace flowfuse::bench {

/// Compares an analytic gradient with central differences of `value`.
///
/// Returns max_i,a |g_analytic - g_fd| / max(max |g_fd|, tiny): the largest
/// component deviation relative to the largest finite-difference component.
inline double max_relative_deviation(const std::function<double(const FlowField&)>& value, const FlowField& at,
                                     const FlowField& analytic, double step = 1e-6) {
  require_same_length(at.size(), analytic.size(), "gradient check");
  require(step > 0.0, "finite-difference step must be positive");
  FlowField x = at;
  double max_dev = 0.0, max_fd = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i)
    for (int a = 0; a < 3; ++a) {
      const double orig = x[i][a];
      x[i][a] = orig + step;
      const double hi = value(x);
      x[i][a] = orig - step;
      const double lo = value(x);
      x[i][a] = orig;
      const double fd = (hi - lo) / (2.0 * step);
      max_dev = std::max(max_dev, std::abs(analytic[i][a] - fd));
      max_fd = std::max(max_fd, std::abs(fd));
    }
  return max_dev / std::max(max_fd, 1e-300);
}

}  // namespace flowfuse::bench
