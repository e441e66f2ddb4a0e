#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "airway/volume.hpp"

namespace airway {

/// Ordered outputs of repeated stochastic inference on one input.
struct PredictionStack {
  std::vector<Volume> preds;

  std::size_t n_drop() const noexcept { return preds.size(); }
  void validate() const;
};

struct UncertaintySummary {
  Volume mean;
  Volume variance;
  Volume out;  ///< predictions / n_drop; identical to `mean`
};

/// A stochastic model pass: receives the input and a per-pass seed.
using Predictor = std::function<Volume(const Volume& input, std::uint64_t seed)>;

/// Seed handed to the predictor on pass `iteration`.
std::uint64_t pass_seed(std::uint64_t seed, std::size_t iteration) noexcept;

PredictionStack run_mc(const Predictor& predictor, const Volume& input, std::size_t n_drop, std::uint64_t seed);

/// Per-voxel mean and population variance. Member values are sorted before
/// accumulation, so the result is bit-identical under any stack order.
UncertaintySummary aggregate(const PredictionStack& stack);

/// 1 where variance > tau.
Volume uncertainty_mask(const UncertaintySummary& summary, double tau);

}  // namespace airway
