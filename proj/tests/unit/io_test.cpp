#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "flowfuse/bench/fixtures.hpp"
#include "flowfuse/bench/rescale.hpp"
#include "flowfuse/bench/run.hpp"
#include "test_support.hpp"

using namespace flowfuse;
using namespace flowfuse::bench;
namespace fs = std::filesystem;

namespace {

PointCloud cloud_with_attributes(std::mt19937& rng, std::size_t n) {
  PointCloud c = fft::random_cloud(rng, n);
  for (std::size_t i = 0; i < n; ++i) {
    c.normals.push_back(fft::uniform_vec(rng, -1, 1).normalized());
    c.colors.push_back(Vec3(double(i % 256) / 255.0, 0.5, 1.0));
  }
  return c;
}

void write_text(const fs::path& p, const std::string& s) { std::ofstream(p) << s; }

}  // namespace

TEST(Ply, PointCloudRoundTripBinaryAndAscii) {
  std::mt19937 rng(31);
  const auto cloud = cloud_with_attributes(rng, 50);
  const auto dir = fft::scratch_dir("ply_cloud");
  for (auto fmt : {ply::Format::BinaryLittleEndian, ply::Format::Ascii}) {
    const auto path = (dir / (fmt == ply::Format::Ascii ? "a.ply" : "b.ply")).string();
    write_point_cloud(path, cloud, fmt);
    const auto back = read_point_cloud(path);
    ASSERT_EQ(back.size(), cloud.size());
    ASSERT_TRUE(back.has_normals());
    for (std::size_t i = 0; i < cloud.size(); ++i) {
      EXPECT_EQ(back.points[i], cloud.points[i]);
      // normals are renormalised on read, colors stored as 8-bit channels
      EXPECT_NEAR((back.normals[i] - cloud.normals[i]).norm(), 0.0, 1e-15);
      EXPECT_LE((back.colors[i] - cloud.colors[i]).cwiseAbs().maxCoeff(), 0.5 / 255.0 + 1e-12);
    }
  }
}

TEST(Ply, FlowAndMeshRoundTrip) {
  std::mt19937 rng(32);
  const auto pts = fft::random_cloud(rng, 40);
  const auto flow = fft::random_flow(rng, 40);
  const auto dir = fft::scratch_dir("ply_flow");
  write_flow((dir / "f.ply").string(), pts, flow);
  const auto back = read_flow((dir / "f.ply").string());
  EXPECT_EQ(back.points.points, pts.points);
  EXPECT_EQ(back.flow.vectors, flow.vectors);

  TriangleMesh mesh;
  mesh.vertices = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0, 0, 1)};
  mesh.triangles = {{0, 2, 1}, {0, 1, 3}, {1, 2, 3}, {0, 3, 2}};
  mesh.vertex_scalar = {0.0, 1.5, 2.5, 10.0};
  write_mesh((dir / "m.ply").string(), mesh);
  const auto m = read_mesh((dir / "m.ply").string());
  EXPECT_EQ(m.vertices, mesh.vertices);
  EXPECT_EQ(m.triangles, mesh.triangles);
}

TEST(Ply, ForeignPropertiesAndTypesAreRead) {
  const auto dir = fft::scratch_dir("ply_foreign");
  write_text(dir / "x.ply",
             "ply\nformat ascii 1.0\ncomment made elsewhere\nelement vertex 2\nproperty float x\nproperty float y\n"
             "property float z\nproperty uchar red\nproperty int extra\nelement face 1\n"
             "property list uchar int vertex_indices\nend_header\n0 0 0 255 7\n1 2 3 0 9\n3 0 1 1\n");
  const auto c = read_point_cloud((dir / "x.ply").string());
  ASSERT_EQ(c.size(), 2u);
  EXPECT_EQ(c.points[1], Vec3(1, 2, 3));
  EXPECT_FALSE(c.has_normals());
}

TEST(Ply, MalformedInputIsADataError) {
  const auto dir = fft::scratch_dir("ply_bad");
  const auto expect_data_error = [&](const std::string& text) {
    write_text(dir / "bad.ply", text);
    try {
      read_point_cloud((dir / "bad.ply").string());
      ADD_FAILURE() << "accepted: " << text;
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::Data);
    }
  };
  expect_data_error("not a ply\n");
  expect_data_error("ply\nformat ascii 1.0\nelement vertex 2\nproperty float x\nproperty float y\nproperty float z\n"
                    "end_header\n0 0 0\n");
  expect_data_error("ply\nformat ascii 1.0\nelement vertex 1\nproperty float x\nproperty float y\nend_header\n0 0\n");
  expect_data_error("ply\nformat ascii 1.0\nelement vertex 1\nproperty quaternion x\nend_header\n0\n");
  expect_data_error("ply\nformat ascii 1.0\nelement vertex 1\nproperty float x\nproperty float y\nproperty float z\n"
                    "end_header\n0 nan 0\n");
  EXPECT_THROW(read_point_cloud((dir / "missing.ply").string()), Error);
}

TEST(KeyValue, SectionsCommentsAndTypes) {
  std::istringstream is(
      "top = 1\n# comment\n[volume]\nvoxel_size = 0.003  # trailing\nresolution = 128 64 32\n\n[flags]\non = true\n"
      "off = no\n");
  const auto kv = KeyValueConfig::parse(is);
  EXPECT_EQ(kv.get_int("top"), 1);
  EXPECT_EQ(kv.get_double("volume.voxel_size"), 0.003);
  EXPECT_EQ(kv.get_doubles("volume.resolution"), (std::vector<double>{128, 64, 32}));
  EXPECT_TRUE(kv.get_bool("flags.on", false));
  EXPECT_FALSE(kv.get_bool("flags.off", true));
  EXPECT_EQ(kv.get("missing", "fallback"), "fallback");
  EXPECT_THROW(kv.get("missing"), Error);
  EXPECT_THROW(kv.get_int("volume.voxel_size"), Error);

  std::ostringstream os;
  kv.write(os);
  std::istringstream again(os.str());
  EXPECT_EQ(KeyValueConfig::parse(again).values(), kv.values());

  std::istringstream bad("[open\nkey = 1\n");
  EXPECT_THROW(KeyValueConfig::parse(bad), Error);
  std::istringstream nokey("just words\n");
  EXPECT_THROW(KeyValueConfig::parse(nokey), Error);
}

TEST(SceneConfig, FramePatterns) {
  EXPECT_EQ(format_frame("depth/%06ld.png", 42), "depth/000042.png");
  EXPECT_NO_THROW(check_frame_pattern("f_%ld_100%%.ply"));
  EXPECT_THROW(check_frame_pattern("depth/%06d.png"), Error);
  EXPECT_THROW(check_frame_pattern("depth/%s.png"), Error);
  EXPECT_THROW(check_frame_pattern("depth/000.png"), Error);
  EXPECT_THROW(check_frame_pattern("%ld/%ld.png"), Error);
}

TEST(SceneConfig, LoadsGeneratedConfigAndRejectsBadValues) {
  const auto root = fft::scratch_dir("scene_cfg");
  fs::create_directories(root / "depth");
  std::ofstream(root / "intrinsics.txt") << "fx = 100\nfy = 100\ncx = 49.5\ncy = 49.5\nwidth = 100\nheight = 100\n";
  GridGeometry g;
  g.dims = Vec3i(32, 16, 8);
  g.voxel_size = 0.01;
  g.origin = Vec3(-0.1, -0.2, 0.3);
  const auto text = bench::detail::scene_text(g, 7, "fixed", RigidTransform::identity(), "rigid", "out", "");
  write_text(root / "scene.cfg", text);
  const auto sc = load_scene_config(root / "scene.cfg");
  EXPECT_EQ(sc.frames, 7);
  EXPECT_TRUE(sc.recon.grid == g);
  EXPECT_EQ(sc.recon.tracking, TrackingMode::Fixed);
  EXPECT_EQ(sc.flow_source, FlowSourceKind::RigidIcp);
  EXPECT_EQ(sc.recon.intrinsics.width, 100);
  EXPECT_EQ(sc.recon.intrinsics.depth_scale, 1000.0);
  EXPECT_EQ(sc.output_dir, root / "out");
  EXPECT_EQ(sc.depth_path(3), root / "." / "depth/000003.png");

  const auto expect_reject = [&](const std::string& from, const std::string& to) {
    std::string t = text;
    const auto at = t.find(from);
    ASSERT_NE(at, std::string::npos) << from;
    t.replace(at, from.size(), to);
    write_text(root / "bad.cfg", t);
    EXPECT_THROW(load_scene_config(root / "bad.cfg"), Error) << to;
  };
  expect_reject("frames = 7", "frames = 0");
  expect_reject("voxel_size = 0.01", "voxel_size = -0.01");
  expect_reject("mode = fixed", "mode = wobbly");
  expect_reject("source = rigid", "source = oracle");
  expect_reject("step_alpha = 0.1", "step_alpha = 0");
  expect_reject("root = .", "root = nowhere");
  expect_reject("depth_pattern = depth/%06ld.png", "depth_pattern = depth/%06d.png");
}

TEST(Rescale, UnitFactorsAreTheIdentity) {
  const auto cloud = make_kitti_like_cloud(1, 256);
  auto f = to_ply(cloud);
  rescale_ply(f, Rescale{});
  const auto back = cloud_from_ply(f);
  EXPECT_EQ(back.points, cloud.points);
  for (std::size_t i = 0; i < cloud.size(); ++i) EXPECT_NEAR((back.normals[i] - cloud.normals[i]).norm(), 0.0, 1e-15);
}

TEST(Rescale, RoundTripAndNormalsTransformCovariantly) {
  std::mt19937 rng(33);
  const auto cloud = make_kitti_like_cloud(2, 512);
  const auto flow = fft::random_flow(rng, cloud.size(), 0.05);
  const Rescale fwd{Vec3(25, 25, 30), false}, inv{Vec3(25, 25, 30), true};

  auto f = flow_to_ply(cloud, flow);
  rescale_ply(f, fwd);
  const auto scaled = flow_from_ply(f);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    EXPECT_NEAR((scaled.points.points[i] - cloud.points[i].cwiseProduct(Vec3(25, 25, 30))).norm(), 0.0, 1e-12);
    EXPECT_NEAR((scaled.flow[i] - flow[i].cwiseProduct(Vec3(25, 25, 30))).norm(), 0.0, 1e-12);
  }
  rescale_ply(f, inv);
  const auto back = flow_from_ply(f);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    EXPECT_LE((back.points.points[i] - cloud.points[i]).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_LE((back.flow[i] - flow[i]).cwiseAbs().maxCoeff(), 1e-9);
  }

  // a tangent direction stays orthogonal to the normal under S / S^-T
  auto nf = to_ply(cloud);
  rescale_ply(nf, fwd);
  const auto sn = cloud_from_ply(nf);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Vec3 n = cloud.normals[i];
    const Vec3 t = n.unitOrthogonal();
    EXPECT_NEAR(sn.normals[i].norm(), 1.0, 1e-12);
    EXPECT_NEAR(sn.normals[i].dot(t.cwiseProduct(Vec3(25, 25, 30))), 0.0, 1e-9);
  }
}

TEST(Rescale, KittiLikeFixtureFitsFlyingThingsExtents) {
  auto cloud = make_kitti_like_cloud(3);
  rescale_points(cloud.points, Rescale{Vec3(25, 25, 30), false});
  for (const auto& p : cloud.points) {
    EXPECT_GE(p.x(), -15.0);
    EXPECT_LE(p.x(), 15.0);
    EXPECT_GE(p.y(), -8.0);
    EXPECT_LE(p.y(), 8.0);
    EXPECT_GE(p.z(), 0.0);
    EXPECT_LE(p.z(), 35.0);
  }
}

TEST(Rescale, NonPositiveFactorsAndDirectories) {
  EXPECT_THROW(Rescale({Vec3(1, 0, 1), false}).validate(), Error);
  EXPECT_THROW(Rescale({Vec3(1, -2, 1), false}).validate(), Error);
  const auto dir = fft::scratch_dir("rescale_dir");
  fs::create_directories(dir / "in");
  for (int n = 0; n < 3; ++n) write_point_cloud((dir / "in" / format_frame("%03ld.ply", n)).string(), make_kitti_like_cloud(n, 16));
  write_text(dir / "in" / "notes.txt", "ignored");
  EXPECT_EQ(rescale_path(dir / "in", dir / "out", Rescale{Vec3(2, 2, 2), false}), 3u);
  EXPECT_TRUE(fs::exists(dir / "out" / "002.ply"));
  EXPECT_FALSE(fs::exists(dir / "out" / "notes.txt"));
  fs::create_directories(dir / "empty");
  EXPECT_THROW(rescale_path(dir / "empty", dir / "out2", Rescale{}), Error);
}

TEST(MatchFlow, PairsByScaledPosition) {
  std::mt19937 rng(34);
  const auto live = fft::random_cloud(rng, 30);
  const Vec3 s(25, 25, 30);
  FlowSample file;
  FlowField want = FlowField::zeros(30);
  // stored in reverse order and in the scaled space
  for (std::size_t i = 30; i-- > 0;) {
    file.points.points.push_back(live.points[i].cwiseProduct(s));
    const Vec3 v = fft::uniform_vec(rng, -0.1, 0.1);
    want[i] = v;
    file.flow.vectors.push_back(v.cwiseProduct(s));
  }
  const auto got = match_flow(live, file, s, 1e-6);
  for (std::size_t i = 0; i < 30; ++i) EXPECT_NEAR((got[i] - want[i]).norm(), 0.0, 1e-15);

  auto shifted = file;
  shifted.points.points[4] += Vec3(1e-3, 0, 0);
  EXPECT_THROW(match_flow(live, shifted, s, 1e-6), Error);
  auto short_file = file;
  short_file.points.points.pop_back();
  short_file.flow.vectors.pop_back();
  EXPECT_THROW(match_flow(live, short_file, s, 1e-6), Error);
}
