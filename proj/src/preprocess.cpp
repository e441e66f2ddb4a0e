#include "airway/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace airway {

Volume zscore_normalize(const Volume& v) {
  if (v.empty()) throw Error(Errc::InvalidArgument, "zscore_normalize on empty volume");
  const double n = static_cast<double>(v.size());
  double sum = 0.0;
  for (double x : v.data()) sum += x;
  const double mean = sum / n;
  double ss = 0.0;
  for (double x : v.data()) ss += (x - mean) * (x - mean);
  const double sd = std::sqrt(ss / n);

  Volume out(v.shape(), Role::Intensity, v.spacing());
  if (sd == 0.0) return out;
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = (v[i] - mean) / sd;
  return out;
}

namespace {

std::vector<std::int64_t> axis_origins(std::int64_t full, std::int64_t patch, std::int64_t stride) {
  const std::int64_t padded = std::max(full, patch);
  std::vector<std::int64_t> out;
  for (std::int64_t o = 0;; o += stride) {
    if (o + patch >= padded) {
      const std::int64_t last = padded - patch;
      if (out.empty() || out.back() != last) out.push_back(last);
      break;
    }
    out.push_back(o);
  }
  return out;
}

void require_positive(const Dims& d, const char* what) {
  if (d.z < 1 || d.y < 1 || d.x < 1) throw Error(Errc::InvalidArgument, std::string(what) + " components must be >= 1");
}

}  // namespace

PatchGrid plan_patches(const Dims& full_shape, const Dims& patch_shape, const Dims& stride) {
  require_positive(full_shape, "volume shape");
  require_positive(patch_shape, "patch shape");
  require_positive(stride, "stride");

  PatchGrid g;
  g.patch_shape = patch_shape;
  g.stride = stride;
  g.full_shape = full_shape;
  g.padded_shape = Dims{std::max(full_shape.z, patch_shape.z), std::max(full_shape.y, patch_shape.y),
                        std::max(full_shape.x, patch_shape.x)};
  const auto oz = axis_origins(full_shape.z, patch_shape.z, stride.z);
  const auto oy = axis_origins(full_shape.y, patch_shape.y, stride.y);
  const auto ox = axis_origins(full_shape.x, patch_shape.x, stride.x);
  g.origins.reserve(oz.size() * oy.size() * ox.size());
  for (auto z : oz)
    for (auto y : oy)
      for (auto x : ox) g.origins.push_back({z, y, x});
  return g;
}

double default_pad_value(const Volume& v) {
  if (v.role() != Role::Intensity || v.empty()) return 0.0;
  return *std::min_element(v.data().begin(), v.data().end());
}

std::vector<Volume> extract_patches(const Volume& v, const PatchGrid& grid) {
  if (v.shape() != grid.full_shape) throw Error(Errc::ShapeMismatch, "patch grid was planned for another shape");
  const double pad = grid.pad_value.value_or(default_pad_value(v));
  const Dims& ps = grid.patch_shape;

  std::vector<Volume> patches;
  patches.reserve(grid.origins.size());
  for (const auto& o : grid.origins) {
    Volume p(ps, Role::Intensity, v.spacing(), 0.0);
    for (std::int64_t z = 0; z < ps.z; ++z)
      for (std::int64_t y = 0; y < ps.y; ++y)
        for (std::int64_t x = 0; x < ps.x; ++x) {
          const Index3 src{o.z + z, o.y + y, o.x + x};
          p.at({z, y, x}) = v.contains(src) ? v.at(src) : pad;
        }
    p.set_role(v.role());
    patches.push_back(std::move(p));
  }
  return patches;
}

Volume reassemble(const std::vector<Volume>& patches, const PatchGrid& grid) {
  if (patches.size() != grid.origins.size()) {
    throw Error(Errc::ShapeMismatch, "expected " + std::to_string(grid.origins.size()) + " patches, got " +
                                         std::to_string(patches.size()));
  }
  if (patches.empty()) throw Error(Errc::ShapeMismatch, "patch grid has no origins");
  for (const auto& p : patches) {
    if (p.shape() != grid.patch_shape) throw Error(Errc::ShapeMismatch, "patch shape differs from grid");
  }

  const Dims& fs = grid.full_shape;
  const Dims& ps = grid.patch_shape;
  std::vector<double> mean(fs.count(), 0.0);
  std::vector<std::uint32_t> hits(fs.count(), 0);
  Volume out(fs, Role::Intensity, patches.front().spacing());

  for (std::size_t k = 0; k < patches.size(); ++k) {
    const Index3& o = grid.origins[k];
    const Volume& p = patches[k];
    const std::int64_t zend = std::min(ps.z, fs.z - o.z);
    const std::int64_t yend = std::min(ps.y, fs.y - o.y);
    const std::int64_t xend = std::min(ps.x, fs.x - o.x);
    for (std::int64_t z = 0; z < zend; ++z)
      for (std::int64_t y = 0; y < yend; ++y)
        for (std::int64_t x = 0; x < xend; ++x) {
          const std::size_t i = out.flatten({o.z + z, o.y + y, o.x + x});
          const double value = p.at({z, y, x});
          const auto n = ++hits[i];
          mean[i] += (value - mean[i]) / static_cast<double>(n);
        }
  }
  for (std::size_t i = 0; i < mean.size(); ++i) {
    if (hits[i] == 0) throw Error(Errc::ShapeMismatch, "patch grid does not cover the volume");
    out[i] = mean[i];
  }
  // Averaging may leave the Binary/Label domain; fall back to the nearest valid role.
  const Role role = patches.front().role();
  try {
    out.set_role(role);
  } catch (const Error&) {
    out.set_role(role == Role::Binary ? Role::Probability : Role::Intensity);
  }
  return out;
}

Axis parse_axis(char c) {
  switch (c) {
    case 'z': case 'Z': return Axis::Z;
    case 'y': case 'Y': return Axis::Y;
    case 'x': case 'X': return Axis::X;
    default: throw Error(Errc::InvalidArgument, std::string("unknown axis '") + c + "'");
  }
}

Volume flip(const Volume& v, Axis axis) {
  Volume out = v;
  const Dims& d = v.shape();
  for (std::int64_t z = 0; z < d.z; ++z)
    for (std::int64_t y = 0; y < d.y; ++y)
      for (std::int64_t x = 0; x < d.x; ++x) {
        Index3 src{z, y, x};
        switch (axis) {
          case Axis::Z: src.z = d.z - 1 - z; break;
          case Axis::Y: src.y = d.y - 1 - y; break;
          case Axis::X: src.x = d.x - 1 - x; break;
        }
        out.at({z, y, x}) = v.at(src);
      }
  return out;
}

Volume rotate90(const Volume& v, Axis axis, int k) {
  const Dims& d = v.shape();
  const bool square = axis == Axis::Z ? d.y == d.x : axis == Axis::Y ? d.z == d.x : d.z == d.y;
  if (!square) throw Error(Errc::NonSquarePlane, "rotation plane is not square");
  k = ((k % 4) + 4) % 4;
  Volume out = v;
  for (int turn = 0; turn < k; ++turn) {
    const Volume in = out;
    for (std::int64_t z = 0; z < d.z; ++z)
      for (std::int64_t y = 0; y < d.y; ++y)
        for (std::int64_t x = 0; x < d.x; ++x) {
          // One quarter turn (a, b) -> (b, n-1-a) within the rotation plane.
          Index3 src{z, y, x};
          switch (axis) {
            case Axis::Z: src = {z, x, d.y - 1 - y}; break;
            case Axis::Y: src = {x, y, d.z - 1 - z}; break;
            case Axis::X: src = {y, d.z - 1 - z, x}; break;
          }
          out.at({z, y, x}) = in.at(src);
        }
  }
  return out;
}

Volume scale_values(const Volume& v, double factor) {
  if (!std::isfinite(factor)) throw Error(Errc::NonFiniteInput, "scale factor must be finite");
  std::vector<double> data(v.data().begin(), v.data().end());
  for (double& x : data) x *= factor;
  Volume out(v.shape(), Role::Intensity, v.spacing(), std::move(data));
  try {
    out.set_role(v.role());
  } catch (const Error&) {
    // scaled values left the role's domain; keep them as intensities
  }
  return out;
}

}  // namespace airway
