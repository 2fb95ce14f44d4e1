#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ndf4d/ply.hpp"
#include "ndf4d/types.hpp"

namespace ndf4d {

inline constexpr double kDefaultSurfaceDensity = 1e4;  // points per m^2

/// Distances in centimetres, f_score in percent.
struct ReconReport {
  double completion = 0.0;
  double accuracy = 0.0;
  double chamfer_l1 = 0.0;
  double f_score = 0.0;
  double precision = 0.0;  // percent
  double recall = 0.0;     // percent
  double threshold = 0.0;  // cm
  std::size_t pred_count = 0;
  std::size_t gt_count = 0;
};

/// Mean nearest-neighbour distances between two clouds (metres in, cm out).
/// No distance cap is applied.
ReconReport recon_metrics(std::span<const Point3> pred, std::span<const Point3> gt, double threshold_cm,
                          int workers = 0);

/// Reports at several thresholds, sharing one pair of NN passes.
std::vector<ReconReport> recon_metrics_multi(std::span<const Point3> pred, std::span<const Point3> gt,
                                             std::span<const double> thresholds_cm, int workers = 0);

/// Harmonic mean of precision and recall (fractions), as a percentage.
double f_score_percent(double precision, double recall);

/// Uniform area-weighted samples: round(area * density) points, at least one
/// per non-empty mesh.
std::vector<Point3> sample_mesh_surface(const TriangleMesh& mesh, double density, std::uint64_t seed);

/// Percentages; a class absent from gt leaves its accuracy and AA empty.
struct SegReport {
  std::optional<double> sa;
  std::optional<double> da;
  std::optional<double> aa;
  std::size_t static_total = 0;
  std::size_t static_correct = 0;
  std::size_t dynamic_total = 0;
  std::size_t dynamic_correct = 0;
};

SegReport seg_metrics(std::span<const PointLabel> pred, std::span<const PointLabel> gt);

/// Geometric mean of two percentages.
double associated_accuracy(double sa, double da);

std::string format_recon_report(std::span<const ReconReport> reports, double density);
std::string format_seg_report(const SegReport& report);

}  // namespace ndf4d
