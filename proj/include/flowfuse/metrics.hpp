#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <string>

#include "flowfuse/geom/point_cloud.hpp"

namespace flowfuse {

struct MetricConfig {
  double acc_strict = 0.05;   // absolute (m) and relative threshold
  double acc_relaxed = 0.10;
  double outlier_threshold = 0.3;  // m
  double zero_eps = 1e-8;
};

struct MetricReport {
  double epe = 0.0;
  double acc_strict = 0.0;
  double acc_relaxed = 0.0;
  double ade_degrees = 0.0;
  double outlier_ratio = 0.0;
  std::size_t n_points = 0;
  std::size_t n_skipped_angle = 0;
};

/// EPE, two-threshold ACC, ADE and outlier ratio.
///
/// A point is accurate at threshold t when its error is below t in absolute
/// terms OR below t relative to |gt| (the relative test needs |gt| >= eps).
/// ADE is arccos of the mean cosine, not the mean of per-point angles.
inline MetricReport compute_metrics(const FlowField& pred, const FlowField& gt, const MetricConfig& cfg = {}) {
  require_same_length(pred.size(), gt.size(), "compute_metrics");
  require(!pred.empty(), "compute_metrics: empty flow field");

  MetricReport r;
  r.n_points = pred.size();
  double err_sum = 0.0, cos_sum = 0.0;
  std::size_t strict = 0, relaxed = 0, outliers = 0, angled = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double err = (pred[i] - gt[i]).norm();
    const double gt_norm = gt[i].norm();
    const double pred_norm = pred[i].norm();
    err_sum += err;
    const bool rel_ok = gt_norm >= cfg.zero_eps;
    if (err < cfg.acc_strict || (rel_ok && err / gt_norm < cfg.acc_strict)) ++strict;
    if (err < cfg.acc_relaxed || (rel_ok && err / gt_norm < cfg.acc_relaxed)) ++relaxed;
    if (err > cfg.outlier_threshold) ++outliers;
    if (gt_norm < cfg.zero_eps || pred_norm < cfg.zero_eps) {
      ++r.n_skipped_angle;
      continue;
    }
    cos_sum += pred[i].dot(gt[i]) / (pred_norm * gt_norm);
    ++angled;
  }
  const double n = static_cast<double>(pred.size());
  r.epe = err_sum / n;
  r.acc_strict = static_cast<double>(strict) / n;
  r.acc_relaxed = static_cast<double>(relaxed) / n;
  r.outlier_ratio = static_cast<double>(outliers) / n;
  if (angled > 0) {
    const double mean_cos = std::clamp(cos_sum / static_cast<double>(angled), -1.0, 1.0);
    r.ade_degrees = std::acos(mean_cos) * 180.0 / std::numbers::pi;
  }
  return r;
}

/// key=value lines, one field per line.
inline void write_key_values(std::ostream& os, const MetricReport& r) {
  const auto prec = os.precision(10);
  os << "epe=" << r.epe << '\n'
     << "acc_strict=" << r.acc_strict << '\n'
     << "acc_relaxed=" << r.acc_relaxed << '\n'
     << "ade_degrees=" << r.ade_degrees << '\n'
     << "outlier_ratio=" << r.outlier_ratio << '\n'
     << "n_points=" << r.n_points << '\n'
     << "n_skipped_angle=" << r.n_skipped_angle << '\n';
  os.precision(prec);
}

inline std::string csv_header(const MetricReport&) {
  return "epe,acc_strict,acc_relaxed,ade_degrees,outlier_ratio,n_points,n_skipped_angle";
}

inline void write_csv_row(std::ostream& os, const MetricReport& r) {
  const auto prec = os.precision(10);
  os << r.epe << ',' << r.acc_strict << ',' << r.acc_relaxed << ',' << r.ade_degrees << ',' << r.outlier_ratio << ','
     << r.n_points << ',' << r.n_skipped_angle << '\n';
  os.precision(prec);
}

}  // namespace flowfuse
