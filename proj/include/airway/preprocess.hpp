#pragma once

#include <optional>
#include <vector>

#include "airway/volume.hpp"

namespace airway {

/// Default training patch extent along (z, y, x).
inline constexpr Dims kDefaultPatch{128, 96, 144};

/// Sliding-window tiling of a volume into equally sized patches.
///
/// Axes shorter than the patch are padded up to the patch length. Origins sit
/// on the stride lattice, except the last one per axis which is clamped so
/// that its patch ends exactly on the padded boundary.
struct PatchGrid {
  Dims patch_shape;
  Dims stride;
  Dims full_shape;
  Dims padded_shape;
  std::vector<Index3> origins;
  /// Value used outside the source volume. Unset means "derive from the
  /// volume": minimum for Intensity, 0 otherwise.
  std::optional<double> pad_value;
};

/// Population z-score. Constant input maps to all zeros.
Volume zscore_normalize(const Volume& v);

PatchGrid plan_patches(const Dims& full_shape, const Dims& patch_shape, const Dims& stride);
inline PatchGrid plan_patches(const Dims& full_shape, const Dims& patch_shape) {
  return plan_patches(full_shape, patch_shape, patch_shape);
}

double default_pad_value(const Volume& v);

std::vector<Volume> extract_patches(const Volume& v, const PatchGrid& grid);

/// Inverse of extract_patches. Overlapping voxels take the mean of their
/// contributions, accumulated in origin order with a running mean, so equal
/// contributions reproduce the value bit-exactly.
Volume reassemble(const std::vector<Volume>& patches, const PatchGrid& grid);

enum class Axis { Z, Y, X };

Axis parse_axis(char c);

Volume flip(const Volume& v, Axis axis);

/// Rotates by k quarter turns in the plane orthogonal to `axis`. The two
/// in-plane extents must be equal.
Volume rotate90(const Volume& v, Axis axis, int k);

Volume scale_values(const Volume& v, double factor);

}  // namespace airway
