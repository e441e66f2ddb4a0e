#include "airway/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include <json.hpp>

#include "airway/morphology.hpp"

namespace airway {

namespace {

struct Counts {
  double tp = 0, fp = 0, fn = 0;
};

Counts confusion(const Volume& pred, const Volume& gt, const char* what) {
  require_role(pred, Role::Binary, what);
  require_role(gt, Role::Binary, what);
  require_same_shape(pred, gt, what);
  Counts c;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const bool p = pred[i] != 0.0, g = gt[i] != 0.0;
    c.tp += p && g;
    c.fp += p && !g;
    c.fn += !p && g;
  }
  return c;
}

}  // namespace

double dsc(const Volume& pred, const Volume& gt) {
  const Counts c = confusion(pred, gt, "dsc");
  const double denom = 2.0 * c.tp + c.fp + c.fn;
  return denom == 0.0 ? 1.0 : 2.0 * c.tp / denom;
}

double precision(const Volume& pred, const Volume& gt) {
  const Counts c = confusion(pred, gt, "precision");
  if (c.tp + c.fp == 0.0) return c.fn == 0.0 ? 1.0 : 0.0;
  return c.tp / (c.tp + c.fp);
}

std::vector<double> centerline_voxel_lengths(const Volume& skeleton) {
  require_role(skeleton, Role::Binary, "centerline_voxel_lengths");
  const Spacing& s = skeleton.spacing();
  std::vector<double> w(skeleton.size(), 0.0);
  for (std::size_t i = 0; i < skeleton.size(); ++i) {
    if (skeleton[i] == 0.0) continue;
    const Index3 p = skeleton.unflatten(i);
    double sum = 0.0;
    int n = 0;
    for (const auto& o : neighbor_offsets(Connectivity::Vertex26)) {
      const Index3 q{p.z + o.z, p.y + o.y, p.x + o.x};
      if (!skeleton.contains(q) || skeleton.at(q) == 0.0) continue;
      const double dz = static_cast<double>(o.z) * s.z;
      const double dy = static_cast<double>(o.y) * s.y;
      const double dx = static_cast<double>(o.x) * s.x;
      sum += std::sqrt(dz * dz + dy * dy + dx * dx);
      ++n;
    }
    w[i] = n == 0 ? (s.z + s.y + s.x) / 3.0 : sum / n;
  }
  return w;
}

double tree_detected(const Volume& pred, const Volume& gt_skeleton) {
  require_role(pred, Role::Binary, "tree_detected");
  require_same_shape(pred, gt_skeleton, "tree_detected");
  const auto w = centerline_voxel_lengths(gt_skeleton);
  double covered = 0.0, total = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    total += w[i];
    if (pred[i] != 0.0) covered += w[i];
  }
  if (total == 0.0) throw Error(Errc::EmptySkeleton, "ground-truth centerline is empty");
  return covered / total;
}

double branch_detected(const Volume& pred, const BranchTable& table, double theta) {
  require_role(pred, Role::Binary, "branch_detected");
  if (table.empty()) throw Error(Errc::EmptyTable, "branch table has no branches");
  if (pred.shape() != table.shape) throw Error(Errc::ShapeMismatch, "branch_detected: prediction and table shapes differ");
  if (!(theta >= 0.0 && theta <= 1.0)) throw Error(Errc::InvalidArgument, "theta must lie in [0,1]");
  std::size_t detected = 0;
  for (const auto& b : table.branches) {
    std::size_t hit = 0;
    for (const auto& p : b.voxels) hit += pred.at(p) != 0.0;
    if (!b.voxels.empty() && static_cast<double>(hit) >= theta * static_cast<double>(b.voxels.size())) ++detected;
  }
  return static_cast<double>(detected) / static_cast<double>(table.size());
}

MetricsReport evaluate_case(const Volume& pred_prob, const Volume& gt, const EvaluateOptions& opts,
                            const std::string& case_id) {
  require_role(gt, Role::Binary, "evaluate_case");
  require_same_shape(pred_prob, gt, "evaluate_case");

  Volume pred = pred_prob.role() == Role::Binary ? pred_prob : threshold(pred_prob, opts.threshold);
  if (opts.postprocess && pred.count_nonzero() > 0) pred = keep_largest_component(pred, opts.connectivity);

  MetricsReport r;
  r.case_id = case_id;
  r.dsc = dsc(pred, gt);
  r.precision = precision(pred, gt);

  const Volume skeleton = skeletonize(gt);
  if (skeleton.count_nonzero() == 0) throw Error(Errc::EmptySkeleton, "ground truth of " + case_id + " is empty");
  r.td = tree_detected(pred, skeleton);
  const BranchTable table = decompose_branches(build_skeleton_graph(skeleton), gt.spacing());
  r.bd = branch_detected(pred, table, opts.theta);
  return r;
}

AggregateReport aggregate_reports(const std::vector<MetricsReport>& reports) {
  if (reports.empty()) throw Error(Errc::EmptyList, "no reports to aggregate");
  const double n = static_cast<double>(reports.size());
  auto stat = [&](double MetricsReport::*field) {
    double sum = 0.0;
    for (const auto& r : reports) sum += r.*field;
    const double mean = sum / n;
    double ss = 0.0;
    for (const auto& r : reports) ss += (r.*field - mean) * (r.*field - mean);
    return MeanStd{mean, std::sqrt(ss / n)};
  };
  AggregateReport a;
  a.dsc = stat(&MetricsReport::dsc);
  a.precision = stat(&MetricsReport::precision);
  a.td = stat(&MetricsReport::td);
  a.bd = stat(&MetricsReport::bd);
  a.n_cases = reports.size();
  return a;
}

std::string format_mean_std(const MeanStd& m) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3f±%.3f", m.mean, m.std);
  return buf;
}

std::string reports_to_csv(const std::vector<MetricsReport>& reports) {
  std::string out = "case_id,dsc,precision,td,bd\n";
  char buf[160];
  for (const auto& r : reports) {
    std::snprintf(buf, sizeof buf, ",%.6f,%.6f,%.6f,%.6f\n", r.dsc, r.precision, r.td, r.bd);
    out += r.case_id;
    out += buf;
  }
  return out;
}

std::string aggregate_to_json(const AggregateReport& agg, double theta) {
  auto ms = [](const MeanStd& m) { return nlohmann::json{{"mean", m.mean}, {"std", m.std}}; };
  const nlohmann::json doc = {{"dsc", ms(agg.dsc)}, {"precision", ms(agg.precision)}, {"td", ms(agg.td)},
                              {"bd", ms(agg.bd)},   {"n_cases", agg.n_cases},         {"theta", theta}};
  return doc.dump(2) + "\n";
}

std::string format_summary(const AggregateReport& agg) {
  std::ostringstream out;
  out << "cases      " << agg.n_cases << '\n'
      << "DSC        " << format_mean_std(agg.dsc) << '\n'
      << "Precision  " << format_mean_std(agg.precision) << '\n'
      << "TD         " << format_mean_std(agg.td) << '\n'
      << "BD         " << format_mean_std(agg.bd) << '\n';
  return out.str();
}

}  // namespace airway
