#include "airway/morphology.hpp"

#include <numeric>
#include <string>

namespace airway {

namespace {

class DisjointSet {
 public:
  std::uint32_t make() {
    parent_.push_back(static_cast<std::uint32_t>(parent_.size()));
    return parent_.back();
  }
  std::uint32_t root(std::uint32_t n) {
    while (parent_[n] != n) {
      parent_[n] = parent_[parent_[n]];
      n = parent_[n];
    }
    return n;
  }
  void unite(std::uint32_t a, std::uint32_t b) {
    a = root(a);
    b = root(b);
    if (a == b) return;
    if (a < b) parent_[b] = a;
    else parent_[a] = b;
  }

 private:
  std::vector<std::uint32_t> parent_;
};

}  // namespace

ComponentLabeling connected_components(const Volume& mask, Connectivity conn) {
  require_role(mask, Role::Binary, "connected_components");
  const Dims& d = mask.shape();

  // Neighbors already visited in raster order.
  std::vector<Index3> back;
  for (const auto& o : neighbor_offsets(conn)) {
    if (o.z < 0 || (o.z == 0 && (o.y < 0 || (o.y == 0 && o.x < 0)))) back.push_back(o);
  }

  constexpr std::uint32_t kNone = 0xffffffffu;
  std::vector<std::uint32_t> provisional(mask.size(), kNone);
  DisjointSet sets;

  for (std::int64_t z = 0; z < d.z; ++z)
    for (std::int64_t y = 0; y < d.y; ++y)
      for (std::int64_t x = 0; x < d.x; ++x) {
        const std::size_t i = mask.flatten({z, y, x});
        if (mask[i] == 0.0) continue;
        std::uint32_t label = kNone;
        for (const auto& o : back) {
          const Index3 q{z + o.z, y + o.y, x + o.x};
          if (!mask.contains(q)) continue;
          const std::uint32_t nl = provisional[mask.flatten(q)];
          if (nl == kNone) continue;
          if (label == kNone) label = nl;
          else sets.unite(label, nl);
        }
        provisional[i] = label == kNone ? sets.make() : label;
      }

  ComponentLabeling out;
  out.labels = Volume(d, Role::Label, mask.spacing());
  std::vector<std::uint32_t> final_id;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (provisional[i] == kNone) continue;
    const std::uint32_t r = sets.root(provisional[i]);
    if (r >= final_id.size()) final_id.resize(r + 1, 0);
    if (final_id[r] == 0) {
      final_id[r] = static_cast<std::uint32_t>(++out.count);
      out.volumes.push_back(0);
    }
    out.labels[i] = final_id[r];
    ++out.volumes[final_id[r] - 1];
  }
  return out;
}

std::vector<std::size_t> component_volumes(const ComponentLabeling& labeling) {
  std::vector<std::size_t> vols(labeling.count, 0);
  for (double v : labeling.labels.data()) {
    if (v != 0.0) ++vols[static_cast<std::size_t>(v) - 1];
  }
  return vols;
}

Volume keep_largest_component(const Volume& mask, Connectivity conn) {
  const ComponentLabeling cc = connected_components(mask, conn);
  if (cc.count == 0) throw Error(Errc::EmptyMask, "no foreground voxels to keep");
  std::size_t best = 0;
  for (std::size_t i = 1; i < cc.volumes.size(); ++i) {
    if (cc.volumes[i] > cc.volumes[best]) best = i;
  }
  const double keep = static_cast<double>(best + 1);
  Volume out(mask.shape(), Role::Binary, mask.spacing());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = cc.labels[i] == keep ? 1.0 : 0.0;
  return out;
}

Volume binary_erosion(const Volume& mask, Connectivity conn) {
  require_role(mask, Role::Binary, "binary_erosion");
  const Dims& d = mask.shape();
  const auto offsets = neighbor_offsets(conn);
  Volume out(d, Role::Binary, mask.spacing());
  for (std::int64_t z = 0; z < d.z; ++z)
    for (std::int64_t y = 0; y < d.y; ++y)
      for (std::int64_t x = 0; x < d.x; ++x) {
        const std::size_t i = mask.flatten({z, y, x});
        if (mask[i] == 0.0) continue;
        bool keep = true;
        for (const auto& o : offsets) {
          const Index3 q{z + o.z, y + o.y, x + o.x};
          if (!mask.contains(q) || mask.at(q) == 0.0) {
            keep = false;
            break;
          }
        }
        out[i] = keep ? 1.0 : 0.0;
      }
  return out;
}

}  // namespace airway
