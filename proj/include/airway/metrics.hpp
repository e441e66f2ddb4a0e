#pragma once

#include <string>
#include <vector>

#include "airway/tree.hpp"
#include "airway/volume.hpp"

namespace airway {

struct MetricsReport {
  std::string case_id;
  double dsc = 0.0;
  double precision = 0.0;
  double td = 0.0;
  double bd = 0.0;
};

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;
};

struct AggregateReport {
  MeanStd dsc, precision, td, bd;
  std::size_t n_cases = 0;
};

struct EvaluateOptions {
  double threshold = 0.5;
  bool postprocess = false;
  double theta = 0.8;
  Connectivity connectivity = Connectivity::Vertex26;
};

/// 2TP / (2TP + FP + FN); 1 when both masks are empty.
double dsc(const Volume& pred, const Volume& gt);

/// TP / (TP + FP); with an empty prediction, 1 if gt is empty and 0 otherwise.
double precision(const Volume& pred, const Volume& gt);

/// Physical length attributed to each skeleton voxel: the mean length of its
/// steps to 26-adjacent skeleton voxels (mean spacing for isolated voxels).
std::vector<double> centerline_voxel_lengths(const Volume& skeleton);

/// Fraction of skeleton length lying inside pred.
double tree_detected(const Volume& pred, const Volume& gt_skeleton);

/// Fraction of branches with at least `theta` of their centerline voxels in pred.
double branch_detected(const Volume& pred, const BranchTable& table, double theta = 0.8);

MetricsReport evaluate_case(const Volume& pred_prob, const Volume& gt, const EvaluateOptions& opts = {},
                            const std::string& case_id = "case");

AggregateReport aggregate_reports(const std::vector<MetricsReport>& reports);

/// "0.897±0.034"
std::string format_mean_std(const MeanStd& m);

/// Header "case_id,dsc,precision,td,bd" and one 6-decimal row per report.
std::string reports_to_csv(const std::vector<MetricsReport>& reports);

std::string aggregate_to_json(const AggregateReport& agg, double theta);

/// Human-readable table: one "metric  mean±std" line per metric.
std::string format_summary(const AggregateReport& agg);

}  // namespace airway
