#pragma once

#include <vector>

#include "flowfuse/integrator/voxel_flow_field.hpp"
#include "flowfuse/tsdf/fuse.hpp"

namespace flowfuse {

struct RefineConfig {
  double step_alpha = 0.1;
  int iterations = 30;       // 3..70 is the useful range
  double active_band = 1.0;  // |tsdf| cutoff on the global volume
  bool cap_displacement = true;  // clamp |v| to twice the truncation distance

  void validate() const {
    require(step_alpha > 0.0, "refine: step_alpha must be positive");
    require(iterations >= 0, "refine: iterations must be >= 0");
    require(active_band > 0.0, "refine: active_band must be positive");
  }
};

struct RefineResult {
  VoxelFlowField field;
  // energy[k] = 1/2 sum r^2 over the voxels updatable at iterate k; iterations + 1 entries.
  std::vector<double> energy;
};

/// Data-term gradient descent aligning the live volume to the global one.
///
/// For each observed global voxel x inside the active band the residual is
/// r = phi_live(x + v) - phi_global(x) and the step is
/// v <- v - alpha * r * grad phi_live(x + v).
/// Residuals and gradients are taken on the metric signed distance
/// (tsdf * delta), so the gradient is unitless and alpha is dimensionless.
/// All voxels update from the previous iterate (Jacobi order). A voxel whose
/// sample or gradient is undefined is skipped for that iterate, in the update
/// and in the energy alike.
inline RefineResult refine_vector_field(const TsdfVolume& live, const TsdfVolume& global, const RefineConfig& cfg = {}) {
  cfg.validate();
  const auto& g = global.geometry();
  require_same_grid(g, live.geometry());
  const double delta = global.truncation();
  const double inv_vs = 1.0 / g.voxel_size;
  const double cap = 2.0 * delta;

  struct Active {
    std::size_t idx;
    Vec3 grid;
  };
  std::vector<Active> active;
  for_each_voxel(g, [&](int i, int j, int k, std::size_t idx) {
    if (global.weight(idx) > 0.0 && std::abs(global.tsdf(idx)) < cfg.active_band)
      active.push_back({idx, Vec3(i, j, k)});
  });

  RefineResult out{VoxelFlowField(g), {}};
  auto& v = out.field.vectors;
  std::vector<Vec3> next(active.size());

  const auto energy_at = [&]() {
    double e = 0.0;
    for (const auto& a : active) {
      const Vec3 pos = a.grid + v[a.idx] * inv_vs;
      const auto s = live.sample_grid(pos);
      if (!s || !live.gradient_grid(pos)) continue;
      const double r = delta * (s->tsdf - global.tsdf(a.idx));
      e += 0.5 * r * r;
    }
    return e;
  };

  for (int it = 0; it < cfg.iterations; ++it) {
    double e = 0.0;
    for (std::size_t n = 0; n < active.size(); ++n) {
      const auto& a = active[n];
      next[n] = v[a.idx];
      const Vec3 pos = a.grid + v[a.idx] * inv_vs;
      const auto s = live.sample_grid(pos);
      if (!s) continue;
      const auto grad = live.gradient_grid(pos);
      if (!grad) continue;
      const double r = delta * (s->tsdf - global.tsdf(a.idx));
      e += 0.5 * r * r;
      Vec3 updated = v[a.idx] - cfg.step_alpha * r * (delta * *grad);
      if (cfg.cap_displacement && updated.norm() > cap) updated *= cap / updated.norm();
      next[n] = updated;
    }
    out.energy.push_back(e);
    for (std::size_t n = 0; n < active.size(); ++n) v[active[n].idx] = next[n];
  }
  out.energy.push_back(energy_at());
  return out;
}

}  // namespace flowfuse
