#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "airway/volume.hpp"

namespace airway {

/// Vertex26 adjacency graph over the foreground voxels of a skeleton.
struct SkeletonGraph {
  Dims shape;
  Spacing spacing;
  std::vector<std::size_t> nodes;               ///< linear voxel indices, ascending
  std::vector<std::vector<std::uint32_t>> adj;  ///< node -> neighbor nodes, ascending
  std::vector<std::uint32_t> degree;

  std::size_t size() const noexcept { return nodes.size(); }
  Index3 coord(std::uint32_t node) const noexcept;
};

struct Branch {
  int id = 0;
  std::optional<int> parent;
  std::vector<int> children;
  std::vector<Index3> voxels;  ///< ordered from the proximal end
  double length_mm = 0.0;
  int generation = 0;

  std::size_t length_vox() const noexcept { return voxels.size(); }
};

/// Parent-child decomposition of a skeleton. Branch ids are 1..size() and
/// branches[i].id == i + 1.
struct BranchTable {
  Dims shape;
  Spacing spacing;
  std::vector<Branch> branches;

  std::size_t size() const noexcept { return branches.size(); }
  bool empty() const noexcept { return branches.empty(); }
  const Branch& branch(int id) const;
};

struct RootPolicy {
  enum class Kind { MinZ, MaxZ, Explicit };
  Kind kind = Kind::MinZ;
  Index3 voxel{};

  static RootPolicy min_z() { return {Kind::MinZ, {}}; }
  static RootPolicy max_z() { return {Kind::MaxZ, {}}; }
  static RootPolicy explicit_voxel(Index3 v) { return {Kind::Explicit, v}; }
};

/// Parses "min-z", "max-z" or "z,y,x".
RootPolicy parse_root_policy(const std::string& text);

struct TreeStats {
  std::size_t branch_count = 0;
  double total_length_mm = 0.0;
  int max_generation = 0;
};

SkeletonGraph build_skeleton_graph(const Volume& skeleton);

/// Opt-in loop repair: while some component contains a loop, removes the
/// loop edge with the highest edge betweenness (ties: lowest voxel pair).
/// Junction clusters are contracted first, as in decompose_branches.
SkeletonGraph break_cycles(SkeletonGraph g);

/// Splits each connected skeleton component into maximal unbranched paths.
///
/// Voxels with three or more skeleton neighbors that touch each other form a
/// single junction; junction voxels belong to the branch arriving from the
/// root side, so children start one voxel distal. Components with loops
/// raise CyclicSkeleton.
BranchTable decompose_branches(const SkeletonGraph& g, const Spacing& spacing,
                               const RootPolicy& root = RootPolicy::min_z());

/// Labels every foreground voxel with the id of the branch owning its
/// nearest centerline voxel (physical distance; ties go to the smaller id).
Volume label_branches(const Volume& mask, const BranchTable& table);

TreeStats tree_stats(const BranchTable& table);

/// Sum of physical step lengths between consecutive voxels.
double path_length_mm(const std::vector<Index3>& voxels, const Spacing& spacing);

/// JSON text in the {"branches":[...]} schema.
std::string branch_table_to_json(const BranchTable& table);
BranchTable branch_table_from_json(const std::string& text);

inline constexpr int kTableFormatVersion = 1;

}  // namespace airway
