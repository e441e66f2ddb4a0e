#include <doctest.h>

#include <set>

#include <json.hpp>

#include "airway/morphology.hpp"
#include "airway/parallel.hpp"
#include "airway/synthgen.hpp"
#include "airway/tree.hpp"
#include "support.hpp"

using namespace airway;

namespace {

// Three 4-voxel arms meeting at (5,5,5): one along -z and two along the
// (+z,+y) and (+z,-y) diagonals, so no two arms touch except at the center.
std::vector<Index3> y_arm(int which) {
  std::vector<Index3> arm;
  for (std::int64_t k = 1; k <= 4; ++k) {
    if (which == 0) arm.push_back({5 - k, 5, 5});
    if (which == 1) arm.push_back({5 + k, 5 + k, 5});
    if (which == 2) arm.push_back({5 + k, 5 - k, 5});
  }
  return arm;
}

Volume y_skeleton() {
  std::vector<Index3> pts{{5, 5, 5}};
  for (int a = 0; a < 3; ++a)
    for (const auto& p : y_arm(a)) pts.push_back(p);
  return support::mask_of({11, 11, 11}, pts);
}

Volume line_skeleton(std::int64_t n) {
  std::vector<Index3> pts;
  for (std::int64_t x = 0; x < n; ++x) pts.push_back({1, 1, x});
  return support::mask_of({3, 3, n}, pts);
}

Errc code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an airway::Error");
  return Errc::IoFailure;
}

void check_table_invariants(const BranchTable& t, const Volume& skeleton) {
  std::set<std::size_t> covered;
  std::size_t total = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const Branch& b = t.branches[i];
    CHECK(b.id == static_cast<int>(i) + 1);
    if (b.parent) {
      CHECK(b.generation == t.branch(*b.parent).generation + 1);
      const auto& kids = t.branch(*b.parent).children;
      CHECK(std::find(kids.begin(), kids.end(), b.id) != kids.end());
    } else {
      CHECK(b.generation == 0);
    }
    for (const auto& p : b.voxels) covered.insert(skeleton.flatten(p));
    total += b.voxels.size();
    CHECK(b.length_mm == doctest::Approx(path_length_mm(b.voxels, t.spacing)));
    // consecutive voxels of a branch are 26-adjacent
    for (std::size_t k = 1; k < b.voxels.size(); ++k) {
      const Index3 &p = b.voxels[k - 1], &q = b.voxels[k];
      CHECK(std::max({std::abs(p.z - q.z), std::abs(p.y - q.y), std::abs(p.x - q.x)}) == 1);
    }
  }
  CHECK(total == covered.size());
  CHECK(covered.size() == skeleton.count_nonzero());
  for (auto i : covered) CHECK(skeleton[i] == 1.0);
}

// Branch count from graph counts: every branch ends distally at a junction
// cluster or at a non-root endpoint.
std::size_t expected_branches(const SkeletonGraph& g) {
  Volume junction(g.shape, Role::Binary);
  std::size_t endpoints = 0;
  for (std::uint32_t n = 0; n < g.size(); ++n) {
    if (g.degree[n] >= 3) junction[g.nodes[n]] = 1.0;
    endpoints += g.degree[n] == 1;
  }
  int clusters = 0;
  support::flood_fill(junction, Connectivity::Vertex26, &clusters);
  return endpoints - 1 + static_cast<std::size_t>(clusters);
}

std::vector<int> brute_labels(const Volume& mask, const BranchTable& t) {
  std::vector<int> out(mask.size(), 0);
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask[i] == 0.0) continue;
    const Index3 q = mask.unflatten(i);
    double best = 1e300;
    for (const auto& b : t.branches)
      for (const auto& p : b.voxels) {
        const double dz = (q.z - p.z) * t.spacing.z, dy = (q.y - p.y) * t.spacing.y, dx = (q.x - p.x) * t.spacing.x;
        const double d = dz * dz + dy * dy + dx * dx;
        if (d < best || (d == best && b.id < out[i])) {
          best = d;
          out[i] = b.id;
        }
      }
  }
  return out;
}

}  // namespace

TEST_CASE("skeleton graph degrees") {
  const SkeletonGraph line = build_skeleton_graph(line_skeleton(5));
  CHECK(line.size() == 5);
  CHECK(std::count(line.degree.begin(), line.degree.end(), 1u) == 2);
  CHECK(std::count(line.degree.begin(), line.degree.end(), 2u) == 3);

  const SkeletonGraph one = build_skeleton_graph(support::mask_of({3, 3, 3}, {{1, 1, 1}}));
  CHECK(one.size() == 1);
  CHECK(one.degree[0] == 0);

  const SkeletonGraph y = build_skeleton_graph(y_skeleton());
  CHECK(y.size() == 13);
  CHECK(std::count(y.degree.begin(), y.degree.end(), 3u) == 1);
  CHECK(std::count(y.degree.begin(), y.degree.end(), 1u) == 3);

  for (std::uint32_t n = 0; n < y.size(); ++n)
    for (auto m : y.adj[n]) {
      CHECK(m != n);
      CHECK(std::find(y.adj[m].begin(), y.adj[m].end(), n) != y.adj[m].end());
    }
  CHECK_THROWS_AS(build_skeleton_graph(Volume({2, 2, 2}, Role::Label)), Error);
}

TEST_CASE("decompose a straight path") {
  const Volume sk = line_skeleton(10);
  const BranchTable t = decompose_branches(build_skeleton_graph(sk), {});
  REQUIRE(t.size() == 1);
  CHECK_FALSE(t.branches[0].parent.has_value());
  CHECK(t.branches[0].generation == 0);
  CHECK(t.branches[0].length_vox() == 10);
  CHECK(t.branches[0].voxels.front() == Index3{1, 1, 0});
  CHECK(tree_stats(t).total_length_mm == doctest::Approx(9.0));
  check_table_invariants(t, sk);

  const BranchTable aniso = decompose_branches(build_skeleton_graph(sk), {1.0, 1.0, 0.5});
  CHECK(aniso.branches[0].length_mm == doctest::Approx(4.5));
}

TEST_CASE("decompose a Y") {
  const Volume sk = y_skeleton();
  const SkeletonGraph g = build_skeleton_graph(sk);
  const BranchTable t = decompose_branches(g, {});
  REQUIRE(t.size() == 3);
  CHECK(t.branches[0].voxels.front() == Index3{1, 5, 5});
  CHECK(t.branches[0].children == std::vector<int>{2, 3});
  CHECK(t.branches[0].length_vox() == 5);  // arm plus the junction voxel
  CHECK(t.branches[1].generation == 1);
  CHECK(t.branches[2].generation == 1);
  CHECK(t.branches[1].voxels.front() == Index3{6, 4, 5});
  CHECK(t.branches[2].voxels.front() == Index3{6, 6, 5});
  check_table_invariants(t, sk);

  const TreeStats st = tree_stats(t);
  CHECK(st.branch_count == 3);
  CHECK(st.max_generation == 1);
  CHECK(st.total_length_mm == doctest::Approx(4.0 + 6.0 * std::sqrt(2.0)));

  const BranchTable e = decompose_branches(g, {}, RootPolicy::explicit_voxel({9, 9, 5}));
  CHECK(e.branches[0].voxels.front() == Index3{9, 9, 5});
  CHECK(e.branches[0].voxels.back() == Index3{5, 5, 5});
  check_table_invariants(e, sk);

  const BranchTable mx = decompose_branches(g, {}, RootPolicy::max_z());
  CHECK(mx.branches[0].voxels.front().z == 9);
  CHECK(code_of([&] { decompose_branches(g, {}, RootPolicy::explicit_voxel({0, 0, 0})); }) == Errc::InvalidArgument);
}

TEST_CASE("adjacent junction voxels form one branch point") {
  // a plus sign in one plane: the center and its four face neighbors all have degree >= 3
  std::vector<Index3> pts;
  for (std::int64_t k = -3; k <= 3; ++k) {
    pts.push_back({4, 4 + k, 4});
    if (k != 0) pts.push_back({4, 4, 4 + k});
  }
  const Volume sk = support::mask_of({9, 9, 9}, pts);
  const SkeletonGraph g = build_skeleton_graph(sk);
  const BranchTable t = decompose_branches(g, {});
  CHECK(t.size() == 4);
  CHECK(t.size() == expected_branches(g));
  check_table_invariants(t, sk);
}

TEST_CASE("loops and empty graphs are reported") {
  std::vector<Index3> ring;
  for (std::int64_t k = 0; k < 4; ++k) {
    ring.push_back({2, 1, 1 + k});
    ring.push_back({2, 6, 1 + k});
  }
  for (std::int64_t k = 2; k < 6; ++k) {
    ring.push_back({2, k, 0});
    ring.push_back({2, k, 5});
  }
  const Volume ring_sk = support::mask_of({6, 8, 10}, ring);
  const SkeletonGraph rg = build_skeleton_graph(ring_sk);
  CHECK(code_of([&] { decompose_branches(rg, {}); }) == Errc::CyclicSkeleton);
  CHECK(code_of([] { decompose_branches(SkeletonGraph{}, {}); }) == Errc::EmptyGraph);
  const SkeletonGraph opened = break_cycles(rg);
  std::size_t removed = 0;
  for (std::uint32_t n = 0; n < rg.size(); ++n) removed += rg.adj[n].size() - opened.adj[n].size();
  CHECK(removed == 2);  // one undirected edge
  const BranchTable path = decompose_branches(opened, {});
  CHECK(path.size() == 1);
  CHECK(path.branches[0].length_vox() == rg.size());

  // a loop with tails; the tail joints create small junction clusters
  std::vector<Index3> tailed = ring;
  for (std::int64_t k = 6; k < 10; ++k) tailed.push_back({2, 3, k});
  tailed.push_back({3, 0, 0});
  tailed.push_back({4, 0, 0});
  const SkeletonGraph g = build_skeleton_graph(support::mask_of({6, 8, 10}, tailed));
  CHECK(code_of([&] { decompose_branches(g, {}); }) == Errc::CyclicSkeleton);
  const BranchTable t = decompose_branches(break_cycles(g), {});
  CHECK(t.size() >= 3);
  std::size_t voxels = 0;
  for (const auto& b : t.branches) voxels += b.voxels.size();
  CHECK(voxels == g.size());

  const SkeletonGraph tree = build_skeleton_graph(y_skeleton());
  const SkeletonGraph same = break_cycles(tree);
  CHECK(same.adj == tree.adj);
}

TEST_CASE("branch count matches graph counts on synthetic trees") {
  for (int depth = 0; depth <= 2; ++depth)
    for (int children = 1; children <= 3; ++children) {
      TreeSpec s;
      s.depth = depth;
      s.children_per_branch = children;
      s.root_length_vox = 24;
      s.root_radius_vox = 3.2;
      s.radius_decay = 0.85;
      s.branch_angle_deg = 40;
      s.volume_shape = {96, 96, 96};
      s.min_separation_vox = 3;
      SyntheticTree tree;
      try {
        tree = generate_tree(s);
      } catch (const Error& e) {
        CHECK(e.code() == Errc::DoesNotFit);
        continue;
      }
      const Volume sk = skeletonize(tree.mask);
      const SkeletonGraph g = build_skeleton_graph(sk);
      const BranchTable t = decompose_branches(g, {});
      CHECK(t.size() == expected_branches(g));
      // a single child continues its parent without a branch point
      CHECK(t.size() == (children == 1 ? 1 : tree.table.size()));
      check_table_invariants(t, sk);
    }
}

TEST_CASE("label_branches agrees with brute-force nearest centerline") {
  std::mt19937_64 rng(2024);
  int checked = 0;
  for (int trial = 0; trial < 3000 && checked < 120; ++trial) {
    const Dims d = support::random_dims(rng, 16);
    Volume mask = support::random_mask(d, 0.05 + 0.25 * support::uniform(rng), rng);
    mask.set_spacing({0.5 + support::uniform(rng), 0.5 + support::uniform(rng), 0.5 + support::uniform(rng)});
    if (mask.count_nonzero() == 0) continue;
    BranchTable t;
    try {
      t = decompose_branches(build_skeleton_graph(skeletonize(mask)), mask.spacing());
    } catch (const Error& e) {
      CHECK(e.code() == Errc::CyclicSkeleton);
      continue;
    }
    for (unsigned threads : {1u, 4u}) {
      set_num_threads(threads);
      const Volume lab = label_branches(mask, t);
      const auto oracle = brute_labels(mask, t);
      for (std::size_t i = 0; i < mask.size(); ++i) REQUIRE(lab[i] == oracle[i]);
    }
    ++checked;
  }
  set_num_threads(1);
  CHECK(checked >= 100);
}

TEST_CASE("label_branches on tubes") {
  const Volume tube = generate_tube({2, 5, 5}, {12, 5, 5}, 2.0, {15, 11, 11});
  const BranchTable t = decompose_branches(build_skeleton_graph(skeletonize(tube)), {});
  REQUIRE(t.size() == 1);
  const Volume lab = label_branches(tube, t);
  CHECK(lab.role() == Role::Label);
  for (std::size_t i = 0; i < tube.size(); ++i) CHECK(lab[i] == tube[i]);

  // Y tube in a 16^3 volume, checked against brute force
  Volume y = generate_tube({1, 8, 8}, {6, 8, 8}, 1.5, {16, 16, 16});
  for (const auto& tip : {Index3{13, 14, 8}, Index3{13, 2, 8}}) {
    const Volume arm = generate_tube({6, 8, 8}, tip, 1.5, {16, 16, 16});
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = std::max(y[i], arm[i]);
  }
  const BranchTable yt = decompose_branches(build_skeleton_graph(skeletonize(y)), {});
  REQUIRE(yt.size() == 3);
  const Volume yl = label_branches(y, yt);
  const auto oracle = brute_labels(y, yt);
  std::vector<std::size_t> sizes(4, 0);
  for (std::size_t i = 0; i < y.size(); ++i) {
    CHECK(yl[i] == oracle[i]);
    sizes[static_cast<std::size_t>(yl[i])] += y[i] != 0.0;
  }
  for (int b = 1; b <= 3; ++b) {
    CHECK(sizes[static_cast<std::size_t>(b)] > 0);
    for (const auto& p : yt.branch(b).voxels) CHECK(yl.at(p) == b);
  }
}

TEST_CASE("label_branches tie rule and errors") {
  const Volume mask({1, 1, 5}, Role::Binary, {}, 1.0);
  BranchTable t;
  t.shape = mask.shape();
  t.branches = {Branch{1, std::nullopt, {2, 3}, {{0, 0, 0}}, 0.0, 0}, Branch{2, 1, {}, {{0, 0, 1}}, 0.0, 1},
                Branch{3, 1, {}, {{0, 0, 3}}, 0.0, 1}};
  const Volume lab = label_branches(mask, t);
  CHECK(lab.at({0, 0, 2}) == 2.0);
  CHECK(lab.at({0, 0, 4}) == 3.0);

  CHECK(code_of([&] { label_branches(mask, BranchTable{mask.shape(), {}, {}}); }) == Errc::EmptyTable);
  CHECK(code_of([&] { label_branches(Volume({1, 1, 6}, Role::Binary, {}, 1.0), t); }) == Errc::ShapeMismatch);
  Volume holed = mask;
  holed.at({0, 0, 3}) = 0.0;
  CHECK(code_of([&] { label_branches(holed, t); }) == Errc::InvalidArgument);
  CHECK(code_of([] { tree_stats(BranchTable{}); }) == Errc::EmptyTable);
  CHECK(code_of([&] { t.branch(4); }) == Errc::UnknownBranch);
}

TEST_CASE("branch table JSON") {
  const BranchTable t = decompose_branches(build_skeleton_graph(y_skeleton()), {0.5, 0.7, 0.9});
  const std::string text = branch_table_to_json(t);
  const auto doc = nlohmann::json::parse(text);
  const auto& b1 = doc.at("branches").at(0);
  for (const char* key : {"id", "parent", "children", "generation", "length_mm", "voxels"}) CHECK(b1.contains(key));
  CHECK(b1.at("parent").is_null());
  CHECK(doc.at("branches").at(1).at("parent") == 1);

  const BranchTable back = branch_table_from_json(text);
  REQUIRE(back.size() == t.size());
  CHECK(back.shape == t.shape);
  CHECK(back.spacing == t.spacing);
  for (std::size_t i = 0; i < t.size(); ++i) {
    CHECK(back.branches[i].voxels == t.branches[i].voxels);
    CHECK(back.branches[i].children == t.branches[i].children);
    CHECK(back.branches[i].parent == t.branches[i].parent);
    CHECK(back.branches[i].length_mm == t.branches[i].length_mm);
  }
  CHECK(branch_table_to_json(back) == text);
  CHECK(code_of([] { branch_table_from_json("{\"branches\": [{\"id\": 2}]}"); }) == Errc::ParseError);
  CHECK(code_of([] { branch_table_from_json("not json"); }) == Errc::ParseError);
}

TEST_CASE("root policy parsing") {
  CHECK(parse_root_policy("min-z").kind == RootPolicy::Kind::MinZ);
  CHECK(parse_root_policy("max-z").kind == RootPolicy::Kind::MaxZ);
  const RootPolicy e = parse_root_policy("3,4,5");
  CHECK(e.kind == RootPolicy::Kind::Explicit);
  CHECK(e.voxel == Index3{3, 4, 5});
  CHECK(code_of([] { parse_root_policy("3,4"); }) == Errc::InvalidArgument);
  CHECK(code_of([] { parse_root_policy("top"); }) == Errc::InvalidArgument);
}
