#include "airway/uncertainty.hpp"

#include <algorithm>
#include <string>

#include "airway/parallel.hpp"

namespace airway {

void PredictionStack::validate() const {
  if (preds.empty()) throw Error(Errc::EmptyStack, "prediction stack is empty");
  for (const auto& p : preds) {
    if (p.role() != Role::Probability && p.role() != Role::Binary) {
      throw Error(Errc::RoleMismatch, "stack members must be Probability volumes");
    }
    require_same_shape(preds.front(), p, "prediction stack");
  }
}

std::uint64_t pass_seed(std::uint64_t seed, std::size_t iteration) noexcept {
  // splitmix64 over (seed, iteration)
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (static_cast<std::uint64_t>(iteration) + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

PredictionStack run_mc(const Predictor& predictor, const Volume& input, std::size_t n_drop, std::uint64_t seed) {
  if (n_drop == 0) throw Error(Errc::InvalidArgument, "n_drop must be >= 1");
  PredictionStack stack;
  stack.preds.reserve(n_drop);
  for (std::size_t n = 0; n < n_drop; ++n) {
    try {
      Volume pred = predictor(input, pass_seed(seed, n));
      if (pred.shape() != input.shape()) throw Error(Errc::ShapeMismatch, "prediction shape differs from input");
      if (pred.role() != Role::Probability) pred.set_role(Role::Probability);
      stack.preds.push_back(std::move(pred));
    } catch (const std::exception& e) {
      throw Error(Errc::PredictorFailure, "pass " + std::to_string(n) + ": " + e.what());
    }
  }
  return stack;
}

UncertaintySummary aggregate(const PredictionStack& stack) {
  stack.validate();
  const Volume& first = stack.preds.front();
  const std::size_t n = stack.n_drop();
  std::vector<double> mean(first.size()), var(first.size());

  parallel_for(first.size(), [&](std::size_t begin, std::size_t end) {
    std::vector<double> values(n);
    for (std::size_t i = begin; i < end; ++i) {
      for (std::size_t k = 0; k < n; ++k) values[k] = stack.preds[k][i];
      std::sort(values.begin(), values.end());
      // Welford: equal members leave m exactly at their value and m2 at 0.
      double m = 0.0, m2 = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        const double delta = values[k] - m;
        m += delta / static_cast<double>(k + 1);
        m2 += delta * (values[k] - m);
      }
      mean[i] = std::clamp(m, 0.0, 1.0);
      var[i] = m2 / static_cast<double>(n);
    }
  });

  UncertaintySummary s;
  s.mean = Volume(first.shape(), Role::Probability, first.spacing(), std::move(mean));
  s.variance = Volume(first.shape(), Role::Intensity, first.spacing(), std::move(var));
  s.out = s.mean;
  return s;
}

Volume uncertainty_mask(const UncertaintySummary& summary, double tau) {
  if (!(tau >= 0.0)) throw Error(Errc::InvalidArgument, "tau must be >= 0");
  Volume out(summary.variance.shape(), Role::Binary, summary.variance.spacing());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = summary.variance[i] > tau ? 1.0 : 0.0;
  return out;
}

}  // namespace airway
