#pragma once

#include <cstdint>
#include <vector>

#include "airway/volume.hpp"

namespace airway {

struct ComponentLabeling {
  Volume labels;  ///< Label role, ids 1..count, 0 background
  std::size_t count = 0;
  std::vector<std::size_t> volumes;  ///< volumes[i] = voxel count of label i+1
};

/// Components are numbered in order of their smallest linear index.
ComponentLabeling connected_components(const Volume& mask, Connectivity conn = Connectivity::Vertex26);

std::vector<std::size_t> component_volumes(const ComponentLabeling& labeling);

/// Keeps the component with the most voxels; ties go to the lowest label id.
/// Throws EmptyMask when there is no foreground.
Volume keep_largest_component(const Volume& mask, Connectivity conn = Connectivity::Vertex26);

/// Voxels outside the volume count as background.
Volume binary_erosion(const Volume& mask, Connectivity conn = Connectivity::Face6);

/// True when removing the center of a 3x3x3 neighborhood preserves topology
/// under (26, 6) connectivity. Bit i of `neighborhood` is voxel
/// (i / 9 - 1, (i / 3) % 3 - 1, i % 3 - 1); bit 13 (the center) is ignored.
bool is_simple_point(std::uint32_t neighborhood) noexcept;

/// Iterative topology-preserving thinning to a one-voxel-wide curve skeleton.
/// Endpoints (exactly one 26-neighbor) are never removed.
Volume skeletonize(const Volume& mask);

}  // namespace airway
