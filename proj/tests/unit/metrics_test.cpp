#include <gtest/gtest.h>

#include <numeric>
#include <sstream>

#include "flowfuse/metrics.hpp"
#include "test_support.hpp"

using namespace flowfuse;

namespace {

// Straight scalar loop over the documented definitions.
MetricReport metrics_oracle(const FlowField& p, const FlowField& g) {
  MetricReport r;
  r.n_points = p.size();
  double esum = 0, csum = 0;
  std::size_t s = 0, rel = 0, out = 0, nc = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double e = (p[i] - g[i]).norm();
    const double gn = g[i].norm();
    esum += e;
    const bool rel_ok = gn >= 1e-8;
    if (e < 0.05 || (rel_ok && e / gn < 0.05)) ++s;
    if (e < 0.10 || (rel_ok && e / gn < 0.10)) ++rel;
    if (e > 0.3) ++out;
    if (p[i].norm() < 1e-8 || gn < 1e-8) {
      ++r.n_skipped_angle;
      continue;
    }
    csum += p[i].dot(g[i]) / (p[i].norm() * gn);
    ++nc;
  }
  const double n = double(p.size());
  r.epe = esum / n;
  r.acc_strict = double(s) / n;
  r.acc_relaxed = double(rel) / n;
  r.outlier_ratio = double(out) / n;
  if (nc) r.ade_degrees = std::acos(std::clamp(csum / double(nc), -1.0, 1.0)) * 180.0 / 3.14159265358979323846;
  return r;
}

}  // namespace

TEST(Metrics, IdentityIsPerfect) {
  std::mt19937 rng(1);
  auto g = fft::random_flow(rng, 100);
  const auto r = compute_metrics(g, g);
  EXPECT_EQ(r.epe, 0.0);
  EXPECT_EQ(r.acc_strict, 1.0);
  EXPECT_EQ(r.acc_relaxed, 1.0);
  EXPECT_EQ(r.ade_degrees, 0.0);
  EXPECT_EQ(r.outlier_ratio, 0.0);
}

TEST(Metrics, OrthogonalFieldsGiveNinetyDegrees) {
  const FlowField g({Vec3(1, 0, 0), Vec3(0, 2, 0), Vec3(0, 0, 3)});
  const FlowField p({Vec3(0, 1, 0), Vec3(0, 0, 2), Vec3(3, 0, 0)});
  EXPECT_NEAR(compute_metrics(p, g).ade_degrees, 90.0, 1e-9);
}

TEST(Metrics, TwoThresholdCounting) {
  // absolute errors 0.04 and 0.08 on ground-truth vectors of length 0.1
  const FlowField g({Vec3(0.1, 0, 0), Vec3(0, 0.1, 0)});
  const FlowField p({Vec3(0.14, 0, 0), Vec3(0, 0.18, 0)});
  const auto r = compute_metrics(p, g);
  EXPECT_DOUBLE_EQ(r.acc_strict, 0.5);
  EXPECT_DOUBLE_EQ(r.acc_relaxed, 1.0);
}

TEST(Metrics, RelativeBranchCountsLongVectors) {
  // absolute-OR-relative: an error of 0.08 on a vector of length 10 is 0.8%
  const FlowField g({Vec3(10, 0, 0), Vec3(0, 10, 0)});
  const FlowField p({Vec3(10.04, 0, 0), Vec3(0, 10.08, 0)});
  EXPECT_DOUBLE_EQ(compute_metrics(p, g).acc_strict, 1.0);
}

TEST(Metrics, RandomInstanceMatchesScalarOracleBitForBit) {
  std::mt19937 rng(2);
  auto g = fft::random_flow(rng, 256, 0.5), p = fft::random_flow(rng, 256, 0.5);
  g[5] = Vec3::Zero();
  p[9] = Vec3::Zero();
  const auto r = compute_metrics(p, g), o = metrics_oracle(p, g);
  EXPECT_EQ(r.epe, o.epe);
  EXPECT_EQ(r.acc_strict, o.acc_strict);
  EXPECT_EQ(r.acc_relaxed, o.acc_relaxed);
  EXPECT_EQ(r.ade_degrees, o.ade_degrees);
  EXPECT_EQ(r.outlier_ratio, o.outlier_ratio);
  EXPECT_EQ(r.n_skipped_angle, 2u);
}

TEST(Metrics, AdeIsArccosOfMeanCosine) {
  // angles 0 and 90 degrees: mean cos 0.5 -> 60 degrees (mean of angles would be 45)
  const FlowField g({Vec3(1, 0, 0), Vec3(1, 0, 0)});
  const FlowField p({Vec3(2, 0, 0), Vec3(0, 1, 0)});
  EXPECT_NEAR(compute_metrics(p, g).ade_degrees, 60.0, 1e-12);
}

TEST(Metrics, Properties) {
  std::mt19937 rng(3);
  auto g = fft::random_flow(rng, 200, 0.3), p = fft::random_flow(rng, 200, 0.3);
  const auto base = compute_metrics(p, g);
  EXPECT_LE(base.acc_strict, base.acc_relaxed);
  EXPECT_GE(base.ade_degrees, 0.0);
  EXPECT_LE(base.ade_degrees, 180.0);

  FlowField scaled = p;
  std::uniform_real_distribution<double> s(0.2, 5.0);
  for (auto& v : scaled.vectors) v *= s(rng);
  const auto sc = compute_metrics(scaled, g);
  EXPECT_NEAR(sc.ade_degrees, base.ade_degrees, 1e-9);
  EXPECT_NE(sc.epe, base.epe);

  std::vector<std::size_t> perm(200);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  FlowField pp, gp;
  for (auto i : perm) {
    pp.vectors.push_back(p[i]);
    gp.vectors.push_back(g[i]);
  }
  const auto pr = compute_metrics(pp, gp);
  EXPECT_NEAR(pr.epe, base.epe, 1e-15);
  EXPECT_EQ(pr.acc_strict, base.acc_strict);
  EXPECT_NEAR(pr.ade_degrees, base.ade_degrees, 1e-9);

  MetricConfig looser;
  for (double t : {0.01, 0.05, 0.1, 0.2, 0.5}) {
    looser.acc_strict = t;
    looser.acc_relaxed = 2 * t;
    const auto r = compute_metrics(p, g, looser);
    EXPECT_LE(r.acc_strict, r.acc_relaxed);
  }
}

TEST(Metrics, ParallelWithRoundingNoiseIsExactlyZeroAde) {
  FlowField g, p;
  for (int i = 0; i < 1000; ++i) {
    const Vec3 v(0.1 + 1e-3 * i, 0.3 / 7.0, 1.0 / 3.0);
    g.vectors.push_back(v);
    p.vectors.push_back(v * 3.0000000000000004);
  }
  const auto r = compute_metrics(p, g);
  EXPECT_FALSE(std::isnan(r.ade_degrees));
  EXPECT_EQ(r.ade_degrees, 0.0);
}

TEST(Metrics, LengthMismatchThrowsAndReportSerialises) {
  EXPECT_THROW(compute_metrics(FlowField::zeros(2), FlowField::zeros(3)), Error);
  const auto r = compute_metrics(FlowField({Vec3(1, 0, 0)}), FlowField({Vec3(1, 0, 0)}));
  std::ostringstream kv, csv;
  write_key_values(kv, r);
  EXPECT_NE(kv.str().find("epe=0\n"), std::string::npos);
  write_csv_row(csv, r);
  const std::string row = csv.str(), header = csv_header(r);
  EXPECT_EQ(std::count(row.begin(), row.end(), ','), std::count(header.begin(), header.end(), ','));
}
