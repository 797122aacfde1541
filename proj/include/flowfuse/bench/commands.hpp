#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <string>

#include "flowfuse/bench/fixtures.hpp"
#include "flowfuse/bench/grad_check.hpp"
#include "flowfuse/bench/rescale.hpp"
#include "flowfuse/bench/run.hpp"
#include "flowfuse/geom/normals.hpp"
#include "flowfuse/losses.hpp"
#include "flowfuse/metrics.hpp"

namespace flowfuse::bench {

enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitData = 2, kExitNumerical = 3 };

inline int exit_code_for(ErrorKind k) {
  switch (k) {
    case ErrorKind::InvalidArgument: return kExitUsage;
    case ErrorKind::Data: return kExitData;
    case ErrorKind::Numerical: return kExitNumerical;
  }
  return kExitUsage;
}

/// Runs `body`, mapping library errors to exit codes and messages on `err`.
template <class Fn>
int guarded(std::ostream& err, Fn&& body) {
  try {
    return body();
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e.kind());
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }
}

struct MetricsArgs {
  std::string pred, gt;
  MetricConfig config;
  std::string csv;  // optional output
};

inline int cmd_metrics(const MetricsArgs& a, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto pred = read_flow(a.pred);
    const auto gt = read_flow(a.gt);
    require(pred.flow.size() == gt.flow.size(), "prediction and ground truth differ in length", ErrorKind::Data);
    const auto r = compute_metrics(pred.flow, gt.flow, a.config);
    write_key_values(out, r);
    if (!a.csv.empty()) {
      std::ofstream os(a.csv);
      if (!os) fail(ErrorKind::Data, "cannot write " + a.csv);
      os << csv_header(r) << '\n';
      write_csv_row(os, r);
    }
    return int(kExitOk);
  });
}

struct LossArgs {
  std::string source, pred, gt, target;
  LossWeights weights;
  double cosine_eps = kDefaultCosineEps;
  int normal_k = 16;
  bool check_grad = false;
  double fd_step = 1e-6;
  double grad_tolerance = 1e-4;
};

inline int cmd_loss(const LossArgs& a, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const PointCloud source = read_point_cloud(a.source);
    const auto pred = read_flow(a.pred).flow;
    const auto gt = read_flow(a.gt).flow;
    PointCloud target = read_point_cloud(a.target);
    require(pred.size() == source.size() && gt.size() == source.size(),
            "source, prediction and ground truth differ in length", ErrorKind::Data);
    if (!target.has_normals()) target = estimate_normals(target, a.normal_k);
    const NeighborIndex index(target.points);

    const auto r = combined_loss(source, pred, gt, target, index, a.weights, a.cosine_eps);
    const auto prec = out.precision(10);
    out << "l2=" << r.l2 << "\npoint_to_plane=" << r.point_to_plane << "\ncosine=" << r.cosine
        << "\ncombined=" << r.combined << "\nlambda_pp=" << a.weights.lambda_pp
        << "\nlambda_cos=" << a.weights.lambda_cos << '\n';
    if (r.cosine_degenerate) out << "cosine_degenerate=1\n";
    if (!a.check_grad) {
      out.precision(prec);
      return int(kExitOk);
    }

    const double dev_l2 = max_relative_deviation([&](const FlowField& p) { return l2_loss(p, gt).value; }, pred,
                                                 l2_loss(pred, gt).gradient, a.fd_step);
    const double dev_pp = max_relative_deviation(
        [&](const FlowField& p) { return point_to_plane_loss(source, p, target, index).value; }, pred,
        point_to_plane_loss(source, pred, target, index).gradient, a.fd_step);
    const double dev_cos =
        max_relative_deviation([&](const FlowField& p) { return cosine_loss(p, gt, a.cosine_eps).value; }, pred,
                               cosine_loss(pred, gt, a.cosine_eps).gradient, a.fd_step);
    const double dev_all = max_relative_deviation(
        [&](const FlowField& p) { return combined_loss(source, p, gt, target, index, a.weights, a.cosine_eps).combined; },
        pred, r.gradient, a.fd_step);
    const double worst = std::max({dev_l2, dev_pp, dev_cos, dev_all});
    out << "grad_dev_l2=" << dev_l2 << "\ngrad_dev_point_to_plane=" << dev_pp << "\ngrad_dev_cosine=" << dev_cos
        << "\ngrad_dev_combined=" << dev_all << "\ngrad_max_relative_deviation=" << worst
        << "\ngrad_check=" << (worst < a.grad_tolerance ? "pass" : "fail") << '\n';
    out.precision(prec);
    return worst < a.grad_tolerance ? int(kExitOk) : int(kExitNumerical);
  });
}

struct RescaleArgs {
  std::string input, output;
  Rescale rescale;
};

inline int cmd_rescale(const RescaleArgs& a, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    a.rescale.validate();
    require(std::filesystem::exists(a.input), "input '" + a.input + "' does not exist", ErrorKind::Data);
    const auto n = rescale_path(a.input, a.output, a.rescale);
    const Vec3 s = a.rescale.effective();
    const auto prec = out.precision(17);
    out << "files=" << n << "\nfactors=" << s.x() << ' ' << s.y() << ' ' << s.z() << '\n';
    out.precision(prec);
    return int(kExitOk);
  });
}

struct ReconstructArgs {
  std::string config;
  std::string output_dir;  // overrides output.dir when set
  long frames = 0;         // overrides dataset.frames when > 0
};

inline int cmd_reconstruct(const ReconstructArgs& a, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const std::filesystem::path path(a.config);
    require(std::filesystem::is_regular_file(path), "config '" + a.config + "' does not exist");
    auto kv = KeyValueConfig::load(a.config);
    if (!a.output_dir.empty()) kv.set("output.dir", std::filesystem::absolute(a.output_dir).string());
    if (a.frames > 0) kv.set("dataset.frames", std::to_string(a.frames));
    const auto scene = scene_config_from(kv, path.parent_path().empty() ? "." : path.parent_path());
    const auto r = run_reconstruction(scene, &err);
    const auto prec = out.precision(10);
    out << "frames=" << r.rows.size() << "\nprocessed=" << r.processed << "\nskipped=" << r.skipped
        << "\nmesh_vertices=" << r.mesh.vertices.size() << "\nmesh_triangles=" << r.mesh.triangles.size() << '\n';
    if (r.reference_error) out << "mean_error_mm=" << *r.reference_error * 1000.0 << '\n';
    out << "output=" << scene.output_dir.string() << '\n';
    out.precision(prec);
    return int(kExitOk);
  });
}

struct MeshErrorArgs {
  std::string reconstructed, reference, heatmap;
  double ramp_max_mm = 10.0;
};

inline int cmd_mesh_error(const MeshErrorArgs& a, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    require(a.ramp_max_mm > 0.0, "heatmap ramp maximum must be positive");
    auto recon = read_mesh(a.reconstructed);
    const auto ref = read_mesh(a.reference);
    const auto e = mesh_error(recon, ref);
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3f", e.mean * 1000.0);
    out << "mean_error_mm=" << buf << "\nvertices=" << recon.vertices.size() << '\n';
    if (!a.heatmap.empty()) {
      std::vector<Vec3> colors;
      colors.reserve(e.per_vertex.size());
      recon.vertex_scalar.clear();
      for (double d : e.per_vertex) {
        recon.vertex_scalar.push_back(d * 1000.0);
        colors.push_back(error_color(d * 1000.0, a.ramp_max_mm));
      }
      write_mesh(a.heatmap, recon, colors);
    }
    return int(kExitOk);
  });
}

inline int cmd_make_fixtures(const std::string& dir, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto configs = make_fixtures(dir, &out);
    for (const auto& c : configs) out << "scene " << c.string() << '\n';
    return int(kExitOk);
  });
}

}  // namespace flowfuse::bench
