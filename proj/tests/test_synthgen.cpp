#include <doctest.h>

#include "airway/metrics.hpp"
#include "airway/morphology.hpp"
#include "airway/synthgen.hpp"
#include "support.hpp"

using namespace airway;

namespace {

Errc code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an airway::Error");
  return Errc::IoFailure;
}

TreeSpec small_spec(int depth) {
  TreeSpec s;
  s.depth = depth;
  s.root_length_vox = 20;
  s.length_decay = 0.8;
  s.root_radius_vox = 3;
  s.radius_decay = 0.8;
  s.volume_shape = {80, 80, 80};
  s.min_separation_vox = 2;
  return s;
}

}  // namespace

TEST_CASE("generate_tube") {
  const Volume dot = generate_tube({2, 2, 2}, {2, 2, 2}, 0.0, {5, 5, 5});
  CHECK(dot.count_nonzero() == 1);
  CHECK(dot.at({2, 2, 2}) == 1.0);

  const Index3 a{1, 3, 5}, b{9, 7, 2};
  const Volume tube = generate_tube(a, b, 2.0, {12, 12, 12});
  for (std::size_t i = 0; i < tube.size(); ++i)
    REQUIRE(tube[i] == (point_segment_distance(tube.unflatten(i), a, b) <= 2.0 ? 1.0 : 0.0));

  const Volume straight = generate_tube({2, 6, 6}, {9, 6, 6}, 2.0, {12, 13, 13});
  for (std::int64_t z = 2; z <= 9; ++z)
    for (std::int64_t y = 0; y < 13; ++y)
      for (std::int64_t x = 0; x < 13; ++x)
        CHECK(straight.at({z, y, x}) == ((y - 6) * (y - 6) + (x - 6) * (x - 6) <= 4 ? 1.0 : 0.0));

  CHECK(generate_tube({0, 0, 0}, {1, 1, 1}, 10.0, {4, 4, 4}).count_nonzero() == 64);
  CHECK(code_of([] { generate_tube({0, 0, 0}, {4, 0, 0}, 1.0, {4, 4, 4}); }) == Errc::OutOfBounds);
  CHECK(code_of([] { generate_tube({0, 0, 0}, {1, 0, 0}, -1.0, {4, 4, 4}); }) == Errc::InvalidArgument);
}

TEST_CASE("digital lines are 26-connected and include both ends") {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 200; ++trial) {
    const Index3 a{support::uniform_int(rng, 0, 20), support::uniform_int(rng, 0, 20), support::uniform_int(rng, 0, 20)};
    const Index3 b{support::uniform_int(rng, 0, 20), support::uniform_int(rng, 0, 20), support::uniform_int(rng, 0, 20)};
    const auto line = digital_line(a, b);
    CHECK(line.front() == a);
    CHECK(line.back() == b);
    for (std::size_t k = 1; k < line.size(); ++k) {
      const Index3 &p = line[k - 1], &q = line[k];
      CHECK(std::max({std::abs(p.z - q.z), std::abs(p.y - q.y), std::abs(p.x - q.x)}) == 1);
    }
    for (const auto& p : line) CHECK(point_segment_distance(p, a, b) <= std::sqrt(3.0) / 2.0 + 1e-9);
  }
}

TEST_CASE("generate_tree structure") {
  const SyntheticTree zero = generate_tree(small_spec(0));
  CHECK(zero.table.size() == 1);
  CHECK(zero.axes.front().first.y == zero.axes.front().second.y);
  CHECK(zero.axes.front().first.x == zero.axes.front().second.x);

  for (int depth = 0; depth <= 3; ++depth) {
    const SyntheticTree t = generate_tree(small_spec(depth));
    CHECK(t.table.size() == (std::size_t{1} << (depth + 1)) - 1);
    CHECK(t.table.branches.back().generation == depth);
    std::size_t voxels = 0;
    for (const auto& b : t.table.branches) {
      voxels += b.voxels.size();
      for (const auto& p : b.voxels) {
        CHECK(t.centerline.at(p) == 1.0);
        CHECK(t.mask.at(p) == 1.0);
      }
      if (b.parent) CHECK(t.table.branch(*b.parent).generation + 1 == b.generation);
    }
    CHECK(voxels == t.centerline.count_nonzero());
    for (std::size_t i = 0; i < t.mask.size(); ++i)
      if (t.centerline[i] != 0.0) CHECK(t.mask[i] == 1.0);
  }

  TreeSpec three = small_spec(1);
  three.children_per_branch = 3;
  CHECK(generate_tree(three).table.size() == 4);
}

TEST_CASE("generate_tree is deterministic and seed dependent") {
  TreeSpec s = small_spec(2);
  const SyntheticTree a = generate_tree(s), b = generate_tree(s);
  CHECK(a.mask == b.mask);
  CHECK(a.centerline == b.centerline);
  CHECK(branch_table_to_json(a.table) == branch_table_to_json(b.table));
  s.seed = 99;
  CHECK(generate_tree(s).mask != a.mask);
}

TEST_CASE("generate_tree errors") {
  TreeSpec big = small_spec(1);
  big.volume_shape = {24, 24, 24};
  CHECK(code_of([&] { generate_tree(big); }) == Errc::DoesNotFit);

  TreeSpec crowded = small_spec(3);
  crowded.branch_angle_deg = 10;
  crowded.min_separation_vox = 8;
  CHECK(code_of([&] { generate_tree(crowded); }) == Errc::DoesNotFit);

  // radius 2 leaves at a wide fork: the rasterized crotch closes a tunnel
  TreeSpec tunnel;
  tunnel.depth = 4;
  tunnel.seed = 1;
  tunnel.root_length_vox = 30;
  tunnel.length_decay = 0.8;
  tunnel.radius_decay = 0.9;
  tunnel.root_radius_vox = 2.0 / std::pow(0.9, 4);
  CHECK(code_of([&] { generate_tree(tunnel); }) == Errc::DoesNotFit);

  TreeSpec thin = small_spec(4);
  thin.root_radius_vox = 2;
  CHECK(code_of([&] { generate_tree(thin); }) == Errc::InvalidArgument);
  TreeSpec wide = small_spec(1);
  wide.branch_angle_deg = 90;
  CHECK(code_of([&] { generate_tree(wide); }) == Errc::InvalidArgument);
}

TEST_CASE("tree spec JSON") {
  TreeSpec s = small_spec(2);
  s.seed = 12345;
  s.spacing = {0.5, 0.6, 0.7};
  const TreeSpec back = tree_spec_from_json(tree_spec_to_json(s));
  CHECK(tree_spec_to_json(back) == tree_spec_to_json(s));
  CHECK(back.volume_shape == s.volume_shape);
  CHECK(back.spacing == s.spacing);
  CHECK(tree_spec_from_json("{}").depth == TreeSpec{}.depth);
  CHECK(code_of([] { tree_spec_from_json("{\"depth\": \"two\"}"); }) == Errc::ParseError);
  CHECK(code_of([] { tree_spec_from_json("{\"depth\": -1}"); }) == Errc::InvalidArgument);
}

TEST_CASE("perturb: drop a branch") {
  const SyntheticTree t = generate_tree(small_spec(1));
  const Volume sk = skeletonize(t.mask);
  const BranchTable table = decompose_branches(build_skeleton_graph(sk), {});
  REQUIRE(table.size() == 3);
  const Volume dropped = perturb(t.mask, DropBranch{3, table});
  const Volume labels = label_branches(t.mask, table);
  for (std::size_t i = 0; i < t.mask.size(); ++i) CHECK(dropped[i] == (labels[i] == 3.0 ? 0.0 : t.mask[i]));
  CHECK(std::abs(branch_detected(dropped, table, 0.8) - 2.0 / 3.0) <= 1e-12);
  CHECK(code_of([&] { perturb(t.mask, DropBranch{4, table}); }) == Errc::UnknownBranch);
  CHECK(code_of([&] { perturb(t.mask, DropBranch{0, table}); }) == Errc::UnknownBranch);
}

TEST_CASE("perturb: noise blob is removed by largest-component pruning") {
  const SyntheticTree t = generate_tree(small_spec(2));
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const std::size_t size = 10 + seed * 20;
    const Volume noisy = perturb(t.mask, AddNoiseComponent{size, seed});
    CHECK(noisy.count_nonzero() == t.mask.count_nonzero() + size);
    const auto cc = connected_components(noisy, Connectivity::Vertex26);
    CHECK(cc.count == 2);
    const auto face = connected_components(noisy, Connectivity::Face6);
    CHECK(std::count(face.volumes.begin(), face.volumes.end(), size) >= 1);
    CHECK(keep_largest_component(noisy) == t.mask);
  }
  CHECK(perturb(t.mask, AddNoiseComponent{25, 7}) == perturb(t.mask, AddNoiseComponent{25, 7}));
  CHECK(code_of([&] { perturb(t.mask, AddNoiseComponent{0, 1}); }) == Errc::InvalidArgument);
  const Volume full({3, 3, 3}, Role::Binary, {}, 1.0);
  CHECK(code_of([&] { perturb(full, AddNoiseComponent{1, 1}); }) == Errc::DoesNotFit);
}

TEST_CASE("perturb: erode once") {
  const Volume thin = generate_tube({2, 5, 5}, {12, 5, 5}, 1.0, {15, 11, 11});
  const Volume eroded = perturb(thin, ErodeOnce{});
  CHECK(eroded == binary_erosion(thin, Connectivity::Face6));
  CHECK(eroded.count_nonzero() <= 11);
  CHECK_THROWS_AS(perturb(Volume({2, 2, 2}, Role::Label), ErodeOnce{}), Error);
}
