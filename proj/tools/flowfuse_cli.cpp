#include <iostream>

#include <CLI11.hpp>

#include "flowfuse/bench/commands.hpp"
#include "flowfuse/version.hpp"

using namespace flowfuse;
using namespace flowfuse::bench;

int main(int argc, char** argv) {
  CLI::App app{"flowfuse: scene-flow driven TSDF fusion and scene-flow evaluation"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  MetricsArgs metrics;
  auto* m = app.add_subcommand("metrics", "EPE, ACC, ADE and outlier ratio of a predicted flow file");
  m->add_option("pred", metrics.pred, "Predicted flow PLY (x,y,z,fx,fy,fz)")->required();
  m->add_option("gt", metrics.gt, "Ground-truth flow PLY")->required();
  m->add_option("--acc-strict", metrics.config.acc_strict, "Strict ACC threshold, absolute m and relative")
      ->capture_default_str();
  m->add_option("--acc-relaxed", metrics.config.acc_relaxed, "Relaxed ACC threshold")->capture_default_str();
  m->add_option("--outlier", metrics.config.outlier_threshold, "Outlier threshold in m")->capture_default_str();
  m->add_option("--csv", metrics.csv, "Also write the report as CSV");

  LossArgs loss;
  auto* l = app.add_subcommand("loss", "Training losses of a prediction, with optional gradient check");
  l->add_option("source", loss.source, "Source cloud PLY")->required();
  l->add_option("pred", loss.pred, "Predicted flow PLY")->required();
  l->add_option("gt", loss.gt, "Ground-truth flow PLY")->required();
  l->add_option("target", loss.target, "Target cloud PLY; normals are estimated when absent")->required();
  l->add_option("--lambda-pp", loss.weights.lambda_pp, "Point-to-plane weight")->capture_default_str();
  l->add_option("--lambda-cos", loss.weights.lambda_cos, "Cosine weight")->capture_default_str();
  l->add_option("--normal-k", loss.normal_k, "Neighbours for normal estimation")->capture_default_str();
  l->add_flag("--check-grad", loss.check_grad, "Compare analytic gradients with central differences");
  l->add_option("--fd-step", loss.fd_step, "Finite-difference step")->capture_default_str();
  l->add_option("--grad-tol", loss.grad_tolerance, "Maximum accepted relative deviation")->capture_default_str();

  RescaleArgs rescale;
  std::vector<double> factors{1.0, 1.0, 1.0};
  auto* r = app.add_subcommand("rescale", "Per-axis rescaling of a PLY file or a directory of PLY files");
  r->add_option("input", rescale.input, "PLY file or directory")->required();
  r->add_option("output", rescale.output, "Output file or directory")->required();
  r->add_option("--factors", factors, "sx sy sz")->expected(3)->capture_default_str();
  r->add_flag("--inverse", rescale.rescale.inverse, "Apply the reciprocal factors");

  ReconstructArgs recon;
  auto* c = app.add_subcommand("reconstruct", "Run flow-driven fusion over a depth sequence");
  c->add_option("config", recon.config, "Scene config (key = value with [sections])")->required();
  c->add_option("--output", recon.output_dir, "Override output.dir");
  c->add_option("--frames", recon.frames, "Override dataset.frames");

  MeshErrorArgs mesh;
  auto* e = app.add_subcommand("mesh-error", "Mean distance from a reconstructed mesh to a reference mesh");
  e->add_option("reconstructed", mesh.reconstructed, "Reconstructed mesh PLY")->required();
  e->add_option("reference", mesh.reference, "Reference mesh PLY")->required();
  e->add_option("--heatmap", mesh.heatmap, "Write per-vertex error (mm) as quality plus a blue-red color ramp");
  e->add_option("--ramp-max", mesh.ramp_max_mm, "Error in mm mapped to red")->capture_default_str();

  std::string fixture_dir = "fixtures";
  auto* f = app.add_subcommand("make-fixtures", "Generate the synthetic test scenes");
  f->add_option("dir", fixture_dir, "Output directory")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    return app.exit(err) == 0 ? kExitOk : kExitUsage;
  }

  if (m->parsed()) return cmd_metrics(metrics, std::cout, std::cerr);
  if (l->parsed()) return cmd_loss(loss, std::cout, std::cerr);
  if (r->parsed()) {
    rescale.rescale.factors = Vec3(factors[0], factors[1], factors[2]);
    return cmd_rescale(rescale, std::cout, std::cerr);
  }
  if (c->parsed()) return cmd_reconstruct(recon, std::cout, std::cerr);
  if (e->parsed()) return cmd_mesh_error(mesh, std::cout, std::cerr);
  if (f->parsed()) return cmd_make_fixtures(fixture_dir, std::cout, std::cerr);
  return kExitUsage;
}
