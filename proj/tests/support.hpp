#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <initializer_list>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "airway/volume.hpp"

namespace support {

using namespace airway;

inline double uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline std::int64_t uniform_int(std::mt19937_64& rng, std::int64_t lo, std::int64_t hi) {
  return lo + static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(hi - lo + 1));
}

inline Dims random_dims(std::mt19937_64& rng, std::int64_t max_extent) {
  return {uniform_int(rng, 1, max_extent), uniform_int(rng, 1, max_extent), uniform_int(rng, 1, max_extent)};
}

inline Volume random_mask(const Dims& d, double density, std::mt19937_64& rng) {
  Volume v(d, Role::Binary);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = uniform(rng) < density ? 1.0 : 0.0;
  return v;
}

inline Volume random_probability(const Dims& d, std::mt19937_64& rng) {
  Volume v(d, Role::Probability);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = uniform(rng);
  return v;
}

inline Volume mask_of(const Dims& d, std::initializer_list<Index3> points) {
  Volume v(d, Role::Binary);
  for (const auto& p : points) v.at(p) = 1.0;
  return v;
}

inline Volume mask_of(const Dims& d, const std::vector<Index3>& points) {
  Volume v(d, Role::Binary);
  for (const auto& p : points) v.at(p) = 1.0;
  return v;
}

// Neighborhood offsets built from the L1 radius, independent of the library tables.
inline std::vector<Index3> offsets_by_l1(int max_l1) {
  std::vector<Index3> out;
  for (int dz = -1; dz <= 1; ++dz)
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx) {
        const int l1 = std::abs(dz) + std::abs(dy) + std::abs(dx);
        if (l1 > 0 && l1 <= max_l1) out.push_back({dz, dy, dx});
      }
  return out;
}

inline int l1_for(Connectivity c) { return c == Connectivity::Face6 ? 1 : c == Connectivity::Edge18 ? 2 : 3; }

// Naive stack flood fill; components numbered in order of their first voxel.
inline std::vector<int> flood_fill(const Volume& mask, Connectivity conn, int* count = nullptr) {
  const auto offs = offsets_by_l1(l1_for(conn));
  std::vector<int> label(mask.size(), 0);
  int next = 0;
  for (std::size_t s = 0; s < mask.size(); ++s) {
    if (mask[s] == 0.0 || label[s] != 0) continue;
    ++next;
    std::vector<std::size_t> stack{s};
    label[s] = next;
    while (!stack.empty()) {
      const Index3 p = mask.unflatten(stack.back());
      stack.pop_back();
      for (const auto& o : offs) {
        const Index3 q{p.z + o.z, p.y + o.y, p.x + o.x};
        if (!mask.contains(q)) continue;
        const auto j = mask.flatten(q);
        if (mask[j] != 0.0 && label[j] == 0) {
          label[j] = next;
          stack.push_back(j);
        }
      }
    }
  }
  if (count) *count = next;
  return label;
}

// Per-branch recall computed voxel by voxel for every candidate id.
inline double oracle_branch_loss(const Volume& pred, const Volume& labels, double s, bool per_branch) {
  double max_id = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) max_id = std::max(max_id, labels[i]);
  double ratio_sum = 0.0, num_all = 0.0, den_all = 0.0;
  int present = 0;
  for (int b = 1; b <= static_cast<int>(max_id); ++b) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      const double g = labels[i] == b ? 1.0 : 0.0;
      num += pred[i] * g;
      den += g;
    }
    if (den == 0.0) continue;
    ++present;
    ratio_sum += (num + s) / (den + s);
    num_all += num;
    den_all += den;
  }
  return per_branch ? 1.0 - ratio_sum / present : 1.0 - (num_all + s) / (den_all + s);
}

inline double oracle_recall(const Volume& weights, const Volume& skeleton, double s) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < skeleton.size(); ++i) {
    num += weights[i] * skeleton[i];
    den += skeleton[i];
  }
  return 1.0 - (num + s) / (den + s);
}

inline std::filesystem::path fresh_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("airway_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace support
