#include "airway/nnmath.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <string>

#include "airway/morphology.hpp"

namespace airway {

namespace {

void require_prob(const Volume& v, const char* what) {
  if (v.role() != Role::Probability && v.role() != Role::Binary) {
    throw Error(Errc::RoleMismatch, std::string(what) + ": prediction must be a Probability or Binary volume");
  }
}

void require_labels(const Volume& v, const char* what) {
  if (v.role() != Role::Label && v.role() != Role::Binary) {
    throw Error(Errc::RoleMismatch, std::string(what) + ": ground truth must be a Label or Binary volume");
  }
}

void require_smooth(Smooth s) {
  if (!(s.value > 0.0) || !std::isfinite(s.value)) throw Error(Errc::InvalidArgument, "smooth must be positive");
}

}  // namespace

void LossWeights::validate() const {
  for (double w : {dice, bce, branch, centerline}) {
    if (!std::isfinite(w) || w < 0.0) throw Error(Errc::InvalidArgument, "loss weights must be finite and >= 0");
  }
}

double dice_loss(const Volume& pred, const Volume& gt, Smooth s) {
  require_prob(pred, "dice_loss");
  require_role(gt, Role::Binary, "dice_loss");
  require_same_shape(pred, gt, "dice_loss");
  require_smooth(s);
  double inter = 0.0, sp = 0.0, sg = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    inter += pred[i] * gt[i];
    sp += pred[i];
    sg += gt[i];
  }
  return 1.0 - (2.0 * inter + s.value) / (sp + sg + s.value);
}

double bce_loss(const Volume& pred, const Volume& gt, double eps) {
  require_prob(pred, "bce_loss");
  require_role(gt, Role::Binary, "bce_loss");
  require_same_shape(pred, gt, "bce_loss");
  if (!(eps > 0.0 && eps < 0.5)) throw Error(Errc::InvalidArgument, "bce clamp must lie in (0, 0.5)");
  if (pred.empty()) throw Error(Errc::InvalidArgument, "bce_loss on empty volume");
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double p = std::clamp(pred[i], eps, 1.0 - eps);
    sum += gt[i] != 0.0 ? -std::log(p) : -std::log(1.0 - p);
  }
  return sum / static_cast<double>(pred.size());
}

double branch_loss(const Volume& pred, const Volume& gt_labels, Smooth s, BranchLossMode mode) {
  require_prob(pred, "branch_loss");
  require_labels(gt_labels, "branch_loss");
  require_same_shape(pred, gt_labels, "branch_loss");
  require_smooth(s);

  struct Sums {
    double covered = 0.0;
    double size = 0.0;
  };
  std::map<std::int64_t, Sums> per_branch;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (gt_labels[i] == 0.0) continue;
    auto& b = per_branch[static_cast<std::int64_t>(gt_labels[i])];
    b.covered += pred[i];
    b.size += 1.0;
  }
  if (per_branch.empty()) throw Error(Errc::NoBranches, "ground truth has no labeled branches");

  if (mode == BranchLossMode::Global) {
    double covered = 0.0, size = 0.0;
    for (const auto& [id, b] : per_branch) {
      covered += b.covered;
      size += b.size;
    }
    return 1.0 - (covered + s.value) / (size + s.value);
  }
  double ratio_sum = 0.0;
  for (const auto& [id, b] : per_branch) ratio_sum += (b.covered + s.value) / (b.size + s.value);
  return 1.0 - ratio_sum / static_cast<double>(per_branch.size());
}

double centerline_loss_with_skeleton(const Volume& pred, const Volume& gt_skeleton, double t, Smooth s,
                                     CenterlineVariant variant) {
  require_prob(pred, "centerline_loss");
  require_role(gt_skeleton, Role::Binary, "centerline_loss");
  require_same_shape(pred, gt_skeleton, "centerline_loss");
  require_smooth(s);

  double num = 0.0, den = 0.0;
  if (variant == CenterlineVariant::SkeletonProduct) {
    Volume binary = pred.role() == Role::Binary ? pred : threshold(pred, t);
    const Volume pred_skeleton = skeletonize(binary);
    for (std::size_t i = 0; i < pred.size(); ++i) {
      num += pred_skeleton[i] * gt_skeleton[i];
      den += gt_skeleton[i];
    }
  } else {
    for (std::size_t i = 0; i < pred.size(); ++i) {
      num += pred[i] * gt_skeleton[i];
      den += gt_skeleton[i];
    }
  }
  return 1.0 - (num + s.value) / (den + s.value);
}

double centerline_loss(const Volume& pred, const Volume& gt_labels, double t, Smooth s, CenterlineVariant variant) {
  require_labels(gt_labels, "centerline_loss");
  require_same_shape(pred, gt_labels, "centerline_loss");
  return centerline_loss_with_skeleton(pred, skeletonize(foreground(gt_labels)), t, s, variant);
}

double total_loss(double l_dice, double l_bce, double l_branch, double l_centerline, const LossWeights& w) {
  for (double l : {l_dice, l_bce, l_branch, l_centerline}) {
    if (!std::isfinite(l)) throw Error(Errc::NonFiniteInput, "loss component is not finite");
  }
  w.validate();
  return l_dice * w.dice + l_bce * w.bce + l_branch * w.branch + l_centerline * w.centerline;
}

Volume dropout_mask(const Dims& shape, double p, std::uint64_t seed) {
  if (!(p > 0.0 && p <= 1.0)) throw Error(Errc::InvalidProbability, "retain probability must lie in (0, 1]");
  std::mt19937_64 rng(seed);
  Volume m(shape, Role::Binary);
  for (std::size_t i = 0; i < m.size(); ++i) {
    // 53-bit uniform in [0, 1); independent of the library's distribution code.
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    m[i] = u < p ? 1.0 : 0.0;
  }
  return m;
}

namespace {

Volume scaled_by_mask(const Volume& x, const Volume& m, double p, const char* what) {
  require_role(m, Role::Binary, what);
  require_same_shape(x, m, what);
  if (!std::isfinite(p)) throw Error(Errc::NonFiniteInput, std::string(what) + ": p must be finite");
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = p * m[i] * x[i];
  return Volume(x.shape(), Role::Intensity, x.spacing(), std::move(out));
}

}  // namespace

Volume dropout_forward(const Volume& x, const Volume& m, double p) { return scaled_by_mask(x, m, p, "dropout_forward"); }

Volume dropout_backward(const Volume& g, const Volume& m, double p) {
  return scaled_by_mask(g, m, p, "dropout_backward");
}

std::int64_t receptive_field(std::span<const std::int64_t> dilations) {
  std::int64_t rf = 1;
  for (auto d : dilations) {
    if (d <= 0) throw Error(Errc::NonPositiveDilation, "dilation " + std::to_string(d));
    rf += 2 * d;
  }
  return rf;
}

}  // namespace airway
