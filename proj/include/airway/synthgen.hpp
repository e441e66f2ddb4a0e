#pragma once

#include <cstdint>
#include <string>
#include <variant>

#include "airway/tree.hpp"
#include "airway/volume.hpp"

namespace airway {

/// Parameters of a synthetic branching tube tree. The root enters at the
/// low-z face, centered in y and x, and runs toward +z.
struct TreeSpec {
  int depth = 2;
  int children_per_branch = 2;
  double root_length_vox = 30.0;
  double length_decay = 0.75;
  double root_radius_vox = 3.0;
  double radius_decay = 0.85;
  double branch_angle_deg = 35.0;
  std::uint64_t seed = 0;
  Dims volume_shape{128, 128, 128};
  Spacing spacing{};
  /// Minimum surface gap between tubes that do not share an endpoint.
  double min_separation_vox = 4.0;

  void validate() const;
};

TreeSpec tree_spec_from_json(const std::string& text);
std::string tree_spec_to_json(const TreeSpec& spec);

struct SyntheticTree {
  Volume mask;
  Volume centerline;
  BranchTable table;
  /// Segment endpoints per branch, in voxel coordinates.
  std::vector<std::pair<Index3, Index3>> axes;
  std::vector<double> radii;
};

/// Throws DoesNotFit when a tube leaves the volume or two non-adjacent tubes
/// come closer than min_separation_vox.
SyntheticTree generate_tree(const TreeSpec& spec);

/// Voxels within `radius` of the segment ab.
Volume generate_tube(const Index3& a, const Index3& b, double radius, const Dims& shape, const Spacing& spacing = {});

/// Euclidean distance (voxel units) from p to the segment ab.
double point_segment_distance(const Index3& p, const Index3& a, const Index3& b);

/// 26-connected digital line from a to b, both endpoints included.
std::vector<Index3> digital_line(const Index3& a, const Index3& b);

struct DropBranch {
  int id = 0;
  BranchTable table;  ///< defines branch ownership through label_branches
};
struct AddNoiseComponent {
  std::size_t size = 0;
  std::uint64_t seed = 0;
};
struct ErodeOnce {};

using PerturbOp = std::variant<DropBranch, AddNoiseComponent, ErodeOnce>;

Volume perturb(const Volume& mask, const PerturbOp& op);

}  // namespace airway
