#include <gtest/gtest.h>

#include <fstream>
#include <map>

#include "flowfuse/bench/synthetic.hpp"
#include "flowfuse/io/depth_png.hpp"
#include "flowfuse/tsdf/checkpoint.hpp"
#include "flowfuse/tsdf/fuse.hpp"
#include "flowfuse/tsdf/integrate.hpp"
#include "flowfuse/tsdf/marching_cubes.hpp"
#include "flowfuse/tsdf/mesh_error.hpp"
#include "flowfuse/tsdf/raycast.hpp"
#include "test_support.hpp"

using namespace flowfuse;

namespace {

GridGeometry grid(int n, double vs, const Vec3& origin) {
  GridGeometry g;
  g.dims = Vec3i::Constant(n);
  g.voxel_size = vs;
  g.origin = origin;
  return g;
}

Intrinsics small_camera(int w = 64, int h = 64, double f = 64.0) {
  Intrinsics k;
  k.width = w;
  k.height = h;
  k.fx = k.fy = f;
  k.cx = (w - 1) / 2.0;
  k.cy = (h - 1) / 2.0;
  return k;
}

// Fills the volume with a clamped analytic signed distance.
template <class Sdf>
TsdfVolume analytic_volume(const GridGeometry& g, Sdf&& sdf) {
  TsdfVolume vol(g);
  for_each_voxel(g, [&](int i, int j, int k, std::size_t idx) {
    vol.set(idx, std::clamp(sdf(g.center(i, j, k)) / g.truncation(), -1.0, 1.0), 1.0);
  });
  return vol;
}

// Independent per-voxel evaluation of the projective update for a fresh volume.
std::vector<std::pair<double, double>> integrate_oracle(const GridGeometry& g, const DepthMap& depth) {
  std::vector<std::pair<double, double>> out(g.voxel_count(), {1.0, 0.0});
  const auto& k = depth.intrinsics;
  const double delta = 4.0 * g.voxel_size;
  std::size_t idx = 0;
  for (int z = 0; z < g.dims.z(); ++z)
    for (int y = 0; y < g.dims.y(); ++y)
      for (int x = 0; x < g.dims.x(); ++x, ++idx) {
        const Vec3 p = g.origin + g.voxel_size * Vec3(x, y, z);
        if (p.z() <= 0) continue;
        const double uf = k.fx * p.x() / p.z() + k.cx, vf = k.fy * p.y() / p.z() + k.cy;
        const long u = static_cast<long>(std::floor(uf + 0.5)), v = static_cast<long>(std::floor(vf + 0.5));
        if (u < 0 || v < 0 || u >= k.width || v >= k.height) continue;
        const double d = depth.depth[std::size_t(v) * k.width + std::size_t(u)];
        if (d <= 0) continue;
        const double sdf = d - p.z();
        if (sdf <= -delta) continue;
        out[idx] = {std::min(1.0, sdf / delta), 1.0};
      }
  return out;
}

}  // namespace

TEST(Integrate, WallExamples) {
  // wall at 0.5 m, voxel 0.01 m, truncation 0.04 m
  const auto g = grid(30, 0.01, Vec3(-0.05, -0.05, 0.30));
  TsdfVolume vol(g);
  DepthMap depth(small_camera());
  std::fill(depth.depth.begin(), depth.depth.end(), 0.5);
  integrate_depth(vol, depth, RigidTransform::identity());
  // z = 0.48: sdf 0.02 -> 0.5
  EXPECT_NEAR(vol.tsdf(5, 5, 18), 0.5, 1e-9);
  EXPECT_EQ(vol.weight(5, 5, 18), 1.0);
  // z = 0.40: sdf 0.10 -> clamped to 1
  EXPECT_EQ(vol.tsdf(5, 5, 10), 1.0);
  EXPECT_EQ(vol.weight(5, 5, 10), 1.0);
  // z = 0.55: behind the truncation band, untouched
  EXPECT_EQ(vol.tsdf(5, 5, 25), 1.0);
  EXPECT_EQ(vol.weight(5, 5, 25), 0.0);
  // z = 0.52: sdf -0.02 -> -0.5
  EXPECT_NEAR(vol.tsdf(5, 5, 22), -0.5, 1e-9);
}

TEST(Integrate, SphereMatchesPerVoxelOracleExactly) {
  const auto k = small_camera(96, 96, 110.0);
  const auto depth = synth::render_sphere(k, RigidTransform::identity(), Vec3(0.01, -0.02, 0.5), 0.08);
  const auto g = grid(48, 0.004, Vec3(-0.09, -0.11, 0.40));
  TsdfVolume vol(g);
  integrate_depth(vol, depth, RigidTransform::identity());
  const auto want = integrate_oracle(g, depth);
  std::size_t touched = 0;
  for (std::size_t i = 0; i < want.size(); ++i) {
    ASSERT_EQ(vol.tsdf(i), want[i].first) << "voxel " << i;
    ASSERT_EQ(vol.weight(i), want[i].second) << "voxel " << i;
    touched += want[i].second > 0;
  }
  EXPECT_GT(touched, 1000u);
}

TEST(Integrate, PoseMovesTheVolumeConsistently) {
  // camera translated by +0.1 in x sees the wall at the same depth
  const auto g = grid(20, 0.01, Vec3(0.0, -0.1, 0.40));
  DepthMap depth(small_camera());
  std::fill(depth.depth.begin(), depth.depth.end(), 0.5);
  TsdfVolume a(g), b(g);
  integrate_depth(a, depth, RigidTransform::identity());
  integrate_depth(b, depth, RigidTransform::from_axis_angle(Vec3::UnitZ(), 0.0, Vec3(0.1, 0, 0)));
  EXPECT_NEAR(a.tsdf(0, 10, 8), b.tsdf(0, 10, 8), 1e-9);
}

TEST(Integrate, RepeatedFrameKeepsValuesAndAccumulatesWeight) {
  const auto k = small_camera(96, 96, 110.0);
  const auto depth = synth::render_sphere(k, RigidTransform::identity(), Vec3(0, 0, 0.5), 0.08);
  const auto g = grid(48, 0.004, Vec3(-0.1, -0.1, 0.40));
  TsdfVolume once(g), twice(g);
  integrate_depth(once, depth, RigidTransform::identity());
  integrate_depth(twice, depth, RigidTransform::identity());
  integrate_depth(twice, depth, RigidTransform::identity());
  for (std::size_t i = 0; i < once.voxel_count(); ++i) {
    EXPECT_NEAR(twice.tsdf(i), once.tsdf(i), 1e-15);
    EXPECT_EQ(twice.weight(i), 2.0 * once.weight(i));
    EXPECT_GE(twice.tsdf(i), -1.0);
    EXPECT_LE(twice.tsdf(i), 1.0);
  }
}

TEST(Integrate, WeightSaturatesAtMaximum) {
  const auto g = grid(8, 0.01, Vec3(-0.04, -0.04, 0.46));
  TsdfVolume vol(g, 3.0);
  DepthMap depth(small_camera());
  std::fill(depth.depth.begin(), depth.depth.end(), 0.5);
  for (int i = 0; i < 6; ++i) integrate_depth(vol, depth, RigidTransform::identity());
  EXPECT_EQ(vol.weight(4, 4, 2), 3.0);
}

TEST(Sample, CornerCentreAndMidpoint) {
  TsdfVolume vol(grid(4, 0.01, Vec3::Zero()));
  for (std::size_t i = 0; i < vol.voxel_count(); ++i) vol.set(i, 0.2, 1.0);
  vol.set(vol.geometry().linear(2, 1, 1), 0.6, 1.0);
  EXPECT_NEAR(*vol.sample(Vec3(0.01, 0.01, 0.01)), 0.2, 1e-15);
  EXPECT_NEAR(*vol.sample(Vec3(0.015, 0.01, 0.01)), 0.4, 1e-15);
  // unobserved neighbour makes the sample undefined, unless its coefficient is zero
  vol.set(vol.geometry().linear(3, 1, 1), 1.0, 0.0);
  EXPECT_FALSE(vol.sample(Vec3(0.025, 0.01, 0.01)).has_value());
  EXPECT_TRUE(vol.sample(Vec3(0.02, 0.01, 0.01)).has_value());
  EXPECT_FALSE(vol.sample(Vec3(-0.001, 0.01, 0.01)).has_value());
}

TEST(Sample, TrilinearOracleOnRandomVolume) {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(-1, 1);
  const auto g = grid(6, 0.02, Vec3(0.1, -0.2, 0.3));
  TsdfVolume vol(g);
  for (std::size_t i = 0; i < vol.voxel_count(); ++i) vol.set(i, u(rng), 1.0);
  std::uniform_real_distribution<double> q(0.0, 5.0);
  for (int n = 0; n < 1000; ++n) {
    const Vec3 gp(q(rng), q(rng), q(rng));
    const int i = int(gp.x()), j = int(gp.y()), k = int(gp.z());
    const double fx = gp.x() - i, fy = gp.y() - j, fz = gp.z() - k;
    const auto t = [&](int a, int b, int c) { return vol.tsdf(std::min(a, 5), std::min(b, 5), std::min(c, 5)); };
    const double c00 = t(i, j, k) * (1 - fx) + t(i + 1, j, k) * fx;
    const double c10 = t(i, j + 1, k) * (1 - fx) + t(i + 1, j + 1, k) * fx;
    const double c01 = t(i, j, k + 1) * (1 - fx) + t(i + 1, j, k + 1) * fx;
    const double c11 = t(i, j + 1, k + 1) * (1 - fx) + t(i + 1, j + 1, k + 1) * fx;
    const double want = (c00 * (1 - fy) + c10 * fy) * (1 - fz) + (c01 * (1 - fy) + c11 * fy) * fz;
    const auto got = vol.sample_grid(gp);
    ASSERT_TRUE(got.has_value());
    EXPECT_NEAR(got->tsdf, want, 1e-12);
  }
}

TEST(Gradient, LinearRampAndConstantField) {
  const auto g = grid(8, 0.01, Vec3::Zero());
  TsdfVolume ramp(g), flat(g);
  for_each_voxel(g, [&](int i, int j, int k, std::size_t idx) {
    ramp.set(idx, 0.1 * i - 0.05 * j + 0.02 * k - 0.3, 1.0);
    flat.set(idx, 0.25, 1.0);
  });
  const Vec3 p(0.033, 0.041, 0.029);
  const auto gr = ramp.gradient(p);
  ASSERT_TRUE(gr.has_value());
  EXPECT_NEAR((*gr - Vec3(10.0, -5.0, 2.0)).norm(), 0.0, 1e-9);
  EXPECT_NEAR(flat.gradient(p)->norm(), 0.0, 1e-12);
  EXPECT_FALSE(ramp.gradient(Vec3(0.001, 0.03, 0.03)).has_value());
}

TEST(Raycast, WallFromIntegratedDepth) {
  const auto k = small_camera(32, 32, 32.0);
  const auto g = grid(40, 0.01, Vec3(-0.2, -0.2, 0.3));
  TsdfVolume vol(g);
  DepthMap depth(small_camera(128, 128, 128.0));
  std::fill(depth.depth.begin(), depth.depth.end(), 0.5);
  integrate_depth(vol, depth, RigidTransform::identity());
  const auto cloud = raycast(vol, RigidTransform::identity(), k);
  ASSERT_GT(cloud.size(), 500u);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    EXPECT_NEAR(cloud.points[i].z(), 0.5, 0.5 * g.voxel_size);
    if (!cloud.is_degenerate(i)) EXPECT_LT(cloud.normals[i].z(), -0.99);
  }
}

TEST(Raycast, SphereWithinHalfAVoxel) {
  const Vec3 c(0, 0, 0.5);
  const double r = 0.08;
  const auto g = grid(64, 0.004, c - Vec3::Constant(0.126));
  const auto vol = analytic_volume(g, [&](const Vec3& p) { return (p - c).norm() - r; });
  const auto cloud = raycast(vol, RigidTransform::identity(), small_camera(48, 48, 96.0));
  ASSERT_GT(cloud.size(), 300u);
  for (const auto& p : cloud.points) EXPECT_LT(std::abs((p - c).norm() - r), 0.5 * g.voxel_size);
}

TEST(Raycast, EmptyVolumeGivesNoPoints) {
  TsdfVolume vol(grid(16, 0.01, Vec3(0, 0, 0.3)));
  EXPECT_EQ(raycast(vol, RigidTransform::identity(), small_camera()).size(), 0u);
}

TEST(Fuse, EmptyGlobalCopiesLive) {
  const auto g = grid(6, 0.01, Vec3::Zero());
  TsdfVolume global(g), live(g);
  live.set(g.linear(2, 3, 4), -0.3, 2.0);
  fuse(global, live);
  EXPECT_EQ(global.tsdf(2, 3, 4), -0.3);
  EXPECT_EQ(global.weight(2, 3, 4), 2.0);
  EXPECT_EQ(global.observed_count(), 1u);
}

TEST(Fuse, EqualWeightsAverage) {
  const auto g = grid(4, 0.01, Vec3::Zero());
  TsdfVolume global(g), live(g);
  global.set(g.linear(1, 1, 1), 0.2, 1.0);
  live.set(g.linear(1, 1, 1), 0.6, 1.0);
  fuse(global, live);
  EXPECT_NEAR(global.tsdf(1, 1, 1), 0.4, 1e-15);
  EXPECT_EQ(global.weight(1, 1, 1), 2.0);
}

TEST(Fuse, RunningAverageOverThreeVolumes) {
  std::mt19937 rng(12);
  std::uniform_real_distribution<double> u(-1, 1);
  std::uniform_int_distribution<int> w(1, 5);
  const auto g = grid(5, 0.01, Vec3::Zero());
  TsdfVolume global(g);
  std::vector<double> num(g.voxel_count(), 0.0), den(g.voxel_count(), 0.0);
  for (int v = 0; v < 3; ++v) {
    TsdfVolume live(g);
    for (std::size_t i = 0; i < live.voxel_count(); ++i) {
      const double t = u(rng), wt = w(rng);
      live.set(i, t, wt);
      num[i] += wt * t;
      den[i] += wt;
    }
    fuse(global, live);
  }
  for (std::size_t i = 0; i < global.voxel_count(); ++i) {
    EXPECT_NEAR(global.tsdf(i), num[i] / den[i], 1e-12);
    EXPECT_EQ(global.weight(i), den[i]);
  }
}

TEST(Fuse, GridMismatchIsRejected) {
  TsdfVolume a(grid(4, 0.01, Vec3::Zero())), b(grid(4, 0.02, Vec3::Zero()));
  EXPECT_THROW(fuse(a, b), Error);
}

TEST(MarchingCubes, ConstantVolumeIsEmpty) {
  const auto g = grid(8, 0.01, Vec3::Zero());
  EXPECT_TRUE(extract_mesh(analytic_volume(g, [](const Vec3&) { return 1.0; })).empty());
  EXPECT_TRUE(extract_mesh(analytic_volume(g, [](const Vec3&) { return -1.0; })).empty());
  EXPECT_TRUE(extract_mesh(TsdfVolume(g)).empty());
}

TEST(MarchingCubes, PlaneVerticesLieOnThePlane) {
  const auto g = grid(10, 0.01, Vec3::Zero());
  const double z0 = 0.0437;
  const auto mesh = extract_mesh(analytic_volume(g, [&](const Vec3& p) { return z0 - p.z(); }));
  ASSERT_FALSE(mesh.empty());
  for (const auto& v : mesh.vertices) EXPECT_NEAR(v.z(), z0, 1e-6);
  // positive side is below the plane, so faces point toward -z
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) EXPECT_LT(mesh.face_normal(t).z(), 0.0);
}

TEST(MarchingCubes, SphereIsWatertightOrientedAndAccurate) {
  const Vec3 c(0.051, 0.048, 0.05);
  const double r = 0.03;
  const auto g = grid(24, 0.005, Vec3(-0.01, -0.01, -0.01));
  const auto mesh = extract_mesh(analytic_volume(g, [&](const Vec3& p) { return (p - c).norm() - r; }));
  ASSERT_FALSE(mesh.empty());
  EXPECT_NO_THROW(validate(mesh));
  for (const auto& v : mesh.vertices) EXPECT_LT(std::abs((v - c).norm() - r), 0.1 * g.voxel_size);

  std::map<std::pair<std::uint32_t, std::uint32_t>, int> directed;
  double volume = 0.0;
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const auto& f = mesh.triangles[t];
    for (int e = 0; e < 3; ++e) ++directed[{f[e], f[(e + 1) % 3]}];
    volume += (mesh.vertices[f[0]] - c).dot((mesh.vertices[f[1]] - c).cross(mesh.vertices[f[2]] - c)) / 6.0;
    const Vec3 centroid = (mesh.vertices[f[0]] + mesh.vertices[f[1]] + mesh.vertices[f[2]]) / 3.0;
    EXPECT_GT(mesh.face_normal(t).dot(centroid - c), 0.0);
  }
  for (const auto& [edge, count] : directed) {
    EXPECT_EQ(count, 1);
    EXPECT_EQ(directed.count({edge.second, edge.first}), 1u);
  }
  EXPECT_NEAR(volume, 4.0 / 3.0 * 3.141592653589793 * r * r * r, 0.03 * volume);
}

TEST(MeshError, SelfAndConcentricSpheres) {
  const auto a = synth::icosphere(Vec3(0, 0, 0.5), 0.1, 4);
  EXPECT_LT(mesh_error(a, a).mean, 1e-15);
  const auto b = synth::icosphere(Vec3(0, 0, 0.5), 0.101, 5);
  const auto e = mesh_error(synth::icosphere(Vec3(0, 0, 0.5), 0.1, 5), b);
  EXPECT_NEAR(e.mean, 0.001, 2e-5);
  for (double d : e.per_vertex) EXPECT_NEAR(d, 0.001, 2e-5);
}

TEST(MeshError, PointToTriangleCases) {
  TriangleMesh tri;
  tri.vertices = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0)};
  tri.triangles = {{0, 1, 2}};
  TriangleMesh probe;
  probe.vertices = {Vec3(0.2, 0.2, 0.3), Vec3(-1, -1, 0), Vec3(1, 1, 0), Vec3(0.5, -2, 0)};
  const auto e = mesh_error(probe, tri);
  EXPECT_NEAR(e.per_vertex[0], 0.3, 1e-15);
  EXPECT_NEAR(e.per_vertex[1], std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(e.per_vertex[2], std::sqrt(0.5), 1e-15);
  EXPECT_NEAR(e.per_vertex[3], 2.0, 1e-15);
  EXPECT_THROW(mesh_error(TriangleMesh{}, tri), Error);
}

TEST(MeshError, BvhAgreesWithExhaustiveSearch) {
  std::mt19937 rng(13);
  const auto mesh = synth::icosphere(Vec3(0.1, 0, 0.3), 0.2, 3);
  const TriangleBvh bvh(mesh);
  for (int n = 0; n < 300; ++n) {
    const Vec3 p = fft::uniform_vec(rng, -0.5, 0.6);
    double best = std::numeric_limits<double>::infinity();
    for (const auto& f : mesh.triangles)
      best = std::min(best, point_triangle_distance(p, mesh.vertices[f[0]], mesh.vertices[f[1]], mesh.vertices[f[2]]));
    EXPECT_EQ(bvh.distance(p), best);
  }
}

TEST(MeshError, HeatmapEndpoints) {
  EXPECT_EQ(error_color(0.0, 10.0), Vec3(0, 0, 1));
  EXPECT_EQ(error_color(10.0, 10.0), Vec3(1, 0, 0));
  EXPECT_EQ(error_color(25.0, 10.0), Vec3(1, 0, 0));
  EXPECT_EQ(error_color(5.0, 10.0), Vec3(0, 1, 0));
}

TEST(Checkpoint, RoundTripAtStoragePrecision) {
  std::mt19937 rng(14);
  std::uniform_real_distribution<double> u(-1, 1);
  const auto g = grid(7, 0.003, Vec3(0.1, 0.2, -0.3));
  TsdfVolume vol(g, 64.0);
  for (std::size_t i = 0; i < vol.voxel_count(); ++i) vol.set(i, u(rng), i % 3 ? double(i % 7) : 0.0);
  const auto path = (fft::scratch_dir("checkpoint") / "v.tsdf").string();
  save_checkpoint(path, vol);
  const auto back = load_checkpoint(path);
  EXPECT_TRUE(back.geometry() == g);
  EXPECT_EQ(back.max_weight(), 64.0);
  for (std::size_t i = 0; i < vol.voxel_count(); ++i) {
    EXPECT_EQ(back.tsdf(i), double(float(vol.tsdf(i))));
    EXPECT_EQ(back.weight(i), vol.weight(i));
  }
  std::ofstream(path, std::ios::binary) << "garbage";
  EXPECT_THROW(load_checkpoint(path), Error);
}

TEST(DepthPng, RoundTripOfQuantisedDepth) {
  auto k = small_camera(17, 9);
  k.depth_scale = 5000.0;
  DepthMap depth(k);
  for (std::size_t i = 0; i < depth.depth.size(); ++i) depth.depth[i] = i % 5 ? double(1000 + 37 * i) / 5000.0 : 0.0;
  const auto path = (fft::scratch_dir("png") / "d.png").string();
  write_depth_png(path, depth);
  const auto back = read_depth_png(path, k);
  ASSERT_EQ(back.width, 17);
  ASSERT_EQ(back.height, 9);
  for (std::size_t i = 0; i < depth.depth.size(); ++i) EXPECT_NEAR(back.depth[i], depth.depth[i], 1e-12);
  EXPECT_THROW(read_depth_png(path + ".missing", k), Error);
}

TEST(DepthPng, SizeMismatchWithIntrinsicsIsRejected) {
  auto k = small_camera(8, 8);
  DepthMap depth(k);
  const auto path = (fft::scratch_dir("png_mismatch") / "d.png").string();
  write_depth_png(path, depth);
  EXPECT_THROW(read_depth_png(path, small_camera(16, 8)), Error);
}
