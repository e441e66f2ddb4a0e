#pragma once

#include <cstdint>
#include <span>

#include "airway/volume.hpp"

namespace airway {

/// Weights of the combined objective: Dice, BCE, branch, centerline.
struct LossWeights {
  double dice = 0.2;
  double bce = 0.2;
  double branch = 0.3;
  double centerline = 0.3;

  void validate() const;
};

/// Additive stabilizer in loss ratios.
struct Smooth {
  double value = 1e-6;
};

enum class BranchLossMode { PerBranchMean, Global };
enum class CenterlineVariant { SkeletonProduct, CenterlineRecall };

/// 1 - (2*sum(p*g) + s) / (sum(p) + sum(g) + s).
double dice_loss(const Volume& pred, const Volume& gt, Smooth s = {});

/// Mean binary cross entropy with predictions clamped to [eps, 1-eps].
double bce_loss(const Volume& pred, const Volume& gt, double eps = 1e-7);

/// Branch-level recall loss over a branch-labeled ground truth.
///
/// Each label id is turned into its own indicator G_b. PerBranchMean averages
/// the per-branch ratios (sum(p*G_b) + s) / (sum(G_b) + s) over the ids that
/// occur; Global pools numerator and denominator over all branches first.
double branch_loss(const Volume& pred, const Volume& gt_labels, Smooth s = {},
                   BranchLossMode mode = BranchLossMode::PerBranchMean);

/// Centerline recall loss against the skeleton of the labeled ground truth.
double centerline_loss(const Volume& pred, const Volume& gt_labels, double t = 0.5, Smooth s = {},
                       CenterlineVariant variant = CenterlineVariant::SkeletonProduct);

/// Same as centerline_loss but with a precomputed ground-truth skeleton.
double centerline_loss_with_skeleton(const Volume& pred, const Volume& gt_skeleton, double t, Smooth s,
                                     CenterlineVariant variant);

double total_loss(double l_dice, double l_bce, double l_branch, double l_centerline, const LossWeights& w = {});

/// i.i.d. Bernoulli(p) keep-mask drawn from a mt19937_64 seeded with `seed`.
Volume dropout_mask(const Dims& shape, double p, std::uint64_t seed);

/// H = p * m * x.
Volume dropout_forward(const Volume& x, const Volume& m, double p);

/// g' = p * m * g.
Volume dropout_backward(const Volume& g, const Volume& m, double p);

/// Receptive field of stacked 3-tap dilated convolutions: 1 + 2 * sum(d).
std::int64_t receptive_field(std::span<const std::int64_t> dilations);

}  // namespace airway
