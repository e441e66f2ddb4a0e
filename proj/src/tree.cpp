#include "airway/tree.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <map>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "airway/parallel.hpp"

namespace airway {

using json = nlohmann::json;

Index3 SkeletonGraph::coord(std::uint32_t node) const noexcept {
  const auto i = nodes[node];
  const auto nx = static_cast<std::size_t>(shape.x);
  const auto ny = static_cast<std::size_t>(shape.y);
  return {static_cast<std::int64_t>(i / (nx * ny)), static_cast<std::int64_t>((i / nx) % ny),
          static_cast<std::int64_t>(i % nx)};
}

const Branch& BranchTable::branch(int id) const {
  if (id < 1 || static_cast<std::size_t>(id) > branches.size()) {
    throw Error(Errc::UnknownBranch, "branch id " + std::to_string(id));
  }
  return branches[static_cast<std::size_t>(id - 1)];
}

RootPolicy parse_root_policy(const std::string& text) {
  if (text == "min-z") return RootPolicy::min_z();
  if (text == "max-z") return RootPolicy::max_z();
  std::istringstream in(text);
  Index3 p;
  char c1 = 0, c2 = 0;
  if (in >> p.z >> c1 >> p.y >> c2 >> p.x && c1 == ',' && c2 == ',' && in.peek() == EOF) {
    return RootPolicy::explicit_voxel(p);
  }
  throw Error(Errc::InvalidArgument, "root must be min-z, max-z or z,y,x; got '" + text + "'");
}

SkeletonGraph build_skeleton_graph(const Volume& skeleton) {
  require_role(skeleton, Role::Binary, "build_skeleton_graph");
  SkeletonGraph g;
  g.shape = skeleton.shape();
  g.spacing = skeleton.spacing();

  std::unordered_map<std::size_t, std::uint32_t> node_of;
  for (std::size_t i = 0; i < skeleton.size(); ++i) {
    if (skeleton[i] != 0.0) {
      node_of.emplace(i, static_cast<std::uint32_t>(g.nodes.size()));
      g.nodes.push_back(i);
    }
  }
  g.adj.resize(g.nodes.size());
  g.degree.resize(g.nodes.size());
  for (std::uint32_t n = 0; n < g.nodes.size(); ++n) {
    const Index3 p = g.coord(n);
    for (const auto& o : neighbor_offsets(Connectivity::Vertex26)) {
      const Index3 q{p.z + o.z, p.y + o.y, p.x + o.x};
      if (!skeleton.contains(q)) continue;
      const auto it = node_of.find(skeleton.flatten(q));
      if (it != node_of.end()) g.adj[n].push_back(it->second);
    }
    std::sort(g.adj[n].begin(), g.adj[n].end());
    g.degree[n] = static_cast<std::uint32_t>(g.adj[n].size());
  }
  return g;
}

double path_length_mm(const std::vector<Index3>& voxels, const Spacing& s) {
  double len = 0.0;
  for (std::size_t i = 1; i < voxels.size(); ++i) {
    const double dz = static_cast<double>(voxels[i].z - voxels[i - 1].z) * s.z;
    const double dy = static_cast<double>(voxels[i].y - voxels[i - 1].y) * s.y;
    const double dx = static_cast<double>(voxels[i].x - voxels[i - 1].x) * s.x;
    len += std::sqrt(dz * dz + dy * dy + dx * dx);
  }
  return len;
}

namespace {

constexpr std::uint32_t kUnset = std::numeric_limits<std::uint32_t>::max();

// Junction clusters contracted to single vertices. Every other skeleton voxel
// is its own super-vertex.
struct Contracted {
  std::vector<std::uint32_t> super_of;                 // node -> super-vertex
  std::vector<std::vector<std::uint32_t>> members;     // super-vertex -> nodes, ascending
  std::vector<std::vector<std::uint32_t>> adj;         // with multiplicity
  std::vector<std::uint32_t> component;                // super-vertex -> component id
  std::vector<std::uint32_t> component_edges;
  std::vector<std::uint32_t> component_vertices;
};

Contracted contract(const SkeletonGraph& g) {
  Contracted c;
  const auto n = static_cast<std::uint32_t>(g.size());
  c.super_of.assign(n, kUnset);
  for (std::uint32_t v = 0; v < n; ++v) {
    if (c.super_of[v] != kUnset) continue;
    const auto id = static_cast<std::uint32_t>(c.members.size());
    c.members.emplace_back();
    c.super_of[v] = id;
    if (g.degree[v] < 3) {
      c.members[id].push_back(v);
      continue;
    }
    std::vector<std::uint32_t> stack{v};
    while (!stack.empty()) {
      const auto u = stack.back();
      stack.pop_back();
      c.members[id].push_back(u);
      for (auto w : g.adj[u]) {
        if (g.degree[w] >= 3 && c.super_of[w] == kUnset) {
          c.super_of[w] = id;
          stack.push_back(w);
        }
      }
    }
    std::sort(c.members[id].begin(), c.members[id].end());
  }

  c.adj.resize(c.members.size());
  for (std::uint32_t u = 0; u < n; ++u) {
    for (auto w : g.adj[u]) {
      if (u < w && c.super_of[u] != c.super_of[w]) {
        c.adj[c.super_of[u]].push_back(c.super_of[w]);
        c.adj[c.super_of[w]].push_back(c.super_of[u]);
      }
    }
  }
  for (auto& a : c.adj) std::sort(a.begin(), a.end());

  c.component.assign(c.members.size(), kUnset);
  for (std::uint32_t s = 0; s < c.members.size(); ++s) {
    if (c.component[s] != kUnset) continue;
    const auto comp = static_cast<std::uint32_t>(c.component_edges.size());
    std::uint32_t verts = 0, half_edges = 0;
    std::vector<std::uint32_t> stack{s};
    c.component[s] = comp;
    while (!stack.empty()) {
      const auto u = stack.back();
      stack.pop_back();
      ++verts;
      half_edges += static_cast<std::uint32_t>(c.adj[u].size());
      for (auto w : c.adj[u]) {
        if (c.component[w] == kUnset) {
          c.component[w] = comp;
          stack.push_back(w);
        }
      }
    }
    c.component_vertices.push_back(verts);
    c.component_edges.push_back(half_edges / 2);
  }
  return c;
}

std::uint32_t pick_root(const SkeletonGraph& g, const Contracted& c, std::uint32_t comp, const RootPolicy& policy,
                        std::optional<std::uint32_t> explicit_node) {
  if (explicit_node && c.component[c.super_of[*explicit_node]] == comp) return *explicit_node;
  std::optional<std::uint32_t> best;
  std::optional<std::uint32_t> fallback;
  for (std::uint32_t v = 0; v < g.size(); ++v) {
    if (c.component[c.super_of[v]] != comp) continue;
    if (!fallback) fallback = v;
    if (g.degree[v] != 1) continue;
    if (!best) {
      best = v;
    } else if (policy.kind == RootPolicy::Kind::MaxZ && g.coord(v).z > g.coord(*best).z) {
      best = v;
    }
  }
  return best.value_or(*fallback);
}

// Orders a junction cluster's voxels by BFS from `entry`.
std::vector<std::uint32_t> cluster_order(const SkeletonGraph& g, const Contracted& c, std::uint32_t sv,
                                         std::uint32_t entry) {
  const auto& mem = c.members[sv];
  if (mem.size() == 1) return mem;
  std::vector<std::uint32_t> order{entry};
  std::vector<bool> seen(mem.size(), false);
  auto slot = [&](std::uint32_t v) {
    return static_cast<std::size_t>(std::lower_bound(mem.begin(), mem.end(), v) - mem.begin());
  };
  seen[slot(entry)] = true;
  for (std::size_t k = 0; k < order.size(); ++k) {
    for (auto w : g.adj[order[k]]) {
      if (c.super_of[w] == sv && !seen[slot(w)]) {
        seen[slot(w)] = true;
        order.push_back(w);
      }
    }
  }
  return order;
}

std::uint32_t entry_voxel(const SkeletonGraph& g, const Contracted& c, std::uint32_t sv, std::uint32_t from_sv) {
  for (auto v : c.members[sv]) {
    for (auto w : g.adj[v]) {
      if (c.super_of[w] == from_sv) return v;
    }
  }
  return c.members[sv].front();
}

}  // namespace

SkeletonGraph break_cycles(SkeletonGraph g) {
  while (true) {
    const Contracted c = contract(g);
    std::optional<std::uint32_t> loop_comp;
    for (std::uint32_t k = 0; k < c.component_edges.size(); ++k) {
      if (c.component_edges[k] + 1 != c.component_vertices[k]) {
        loop_comp = k;
        break;
      }
    }
    if (!loop_comp) return g;

    struct Edge {
      std::uint32_t su, sv, u, w;  // super-vertices and the voxel nodes behind them
    };
    std::vector<Edge> edges;
    std::vector<std::uint32_t> verts;
    for (std::uint32_t s = 0; s < c.members.size(); ++s)
      if (c.component[s] == *loop_comp) verts.push_back(s);
    for (auto s : verts)
      for (auto u : c.members[s])
        for (auto w : g.adj[u])
          if (u < w && c.super_of[w] != s) edges.push_back({s, c.super_of[w], u, w});

    const auto nv = c.members.size();
    auto reachable_without = [&](std::size_t skip) {
      std::vector<std::vector<std::uint32_t>> adj(nv);
      for (std::size_t e = 0; e < edges.size(); ++e) {
        if (e == skip) continue;
        adj[edges[e].su].push_back(edges[e].sv);
        adj[edges[e].sv].push_back(edges[e].su);
      }
      std::vector<bool> seen(nv, false);
      std::vector<std::uint32_t> stack{edges[skip].su};
      seen[edges[skip].su] = true;
      while (!stack.empty()) {
        const auto x = stack.back();
        stack.pop_back();
        for (auto y : adj[x])
          if (!seen[y]) {
            seen[y] = true;
            stack.push_back(y);
          }
      }
      return static_cast<bool>(seen[edges[skip].sv]);
    };

    // Brandes edge betweenness on the simple contracted graph.
    std::vector<std::vector<std::uint32_t>> simple(nv);
    for (const auto& e : edges) {
      simple[e.su].push_back(e.sv);
      simple[e.sv].push_back(e.su);
    }
    for (auto& a : simple) {
      std::sort(a.begin(), a.end());
      a.erase(std::unique(a.begin(), a.end()), a.end());
    }
    std::map<std::pair<std::uint32_t, std::uint32_t>, double> betweenness;
    for (auto s : verts) {
      std::vector<double> sigma(nv, 0.0), delta(nv, 0.0);
      std::vector<int> dist(nv, -1);
      std::vector<std::vector<std::uint32_t>> preds(nv);
      std::vector<std::uint32_t> order;
      std::deque<std::uint32_t> q{s};
      sigma[s] = 1.0;
      dist[s] = 0;
      while (!q.empty()) {
        const auto v = q.front();
        q.pop_front();
        order.push_back(v);
        for (auto w : simple[v]) {
          if (dist[w] < 0) {
            dist[w] = dist[v] + 1;
            q.push_back(w);
          }
          if (dist[w] == dist[v] + 1) {
            sigma[w] += sigma[v];
            preds[w].push_back(v);
          }
        }
      }
      for (auto it = order.rbegin(); it != order.rend(); ++it) {
        const auto w = *it;
        for (auto v : preds[w]) {
          const double share = sigma[v] / sigma[w] * (1.0 + delta[w]);
          betweenness[{std::min(v, w), std::max(v, w)}] += share;
          delta[v] += share;
        }
      }
    }

    std::optional<std::size_t> best;
    double best_score = -1.0;
    for (std::size_t e = 0; e < edges.size(); ++e) {
      if (!reachable_without(e)) continue;  // bridge: not on any loop
      const double score = betweenness[{std::min(edges[e].su, edges[e].sv), std::max(edges[e].su, edges[e].sv)}];
      if (score > best_score) {
        best_score = score;
        best = e;
      }
    }
    // Reaching here with no candidate means the loop lives inside one junction
    // cluster; nothing at branch level can be cut.
    if (!best) throw Error(Errc::CyclicSkeleton, "loop cannot be broken at branch level");
    const Edge& cut = edges[*best];
    auto drop = [&](std::uint32_t from, std::uint32_t to) {
      auto& a = g.adj[from];
      a.erase(std::find(a.begin(), a.end(), to));
      g.degree[from] = static_cast<std::uint32_t>(a.size());
    };
    drop(cut.u, cut.w);
    drop(cut.w, cut.u);
  }
}

BranchTable decompose_branches(const SkeletonGraph& g, const Spacing& spacing, const RootPolicy& root) {
  if (g.size() == 0) throw Error(Errc::EmptyGraph, "skeleton has no voxels");
  BranchTable table;
  table.shape = g.shape;
  table.spacing = spacing;

  const Contracted c = contract(g);
  for (std::size_t k = 0; k < c.component_edges.size(); ++k) {
    if (c.component_edges[k] + 1 != c.component_vertices[k]) {
      throw Error(Errc::CyclicSkeleton, "skeleton component " + std::to_string(k + 1) + " contains a loop");
    }
  }

  std::optional<std::uint32_t> explicit_node;
  if (root.kind == RootPolicy::Kind::Explicit) {
    const Index3& p = root.voxel;
    const bool inside = p.z >= 0 && p.y >= 0 && p.x >= 0 && p.z < g.shape.z && p.y < g.shape.y && p.x < g.shape.x;
    const std::size_t lin = inside ? static_cast<std::size_t>((p.z * g.shape.y + p.y) * g.shape.x + p.x) : 0;
    const auto it = std::lower_bound(g.nodes.begin(), g.nodes.end(), lin);
    if (!inside || it == g.nodes.end() || *it != lin) {
      throw Error(Errc::InvalidArgument, "explicit root voxel is not on the skeleton");
    }
    explicit_node = static_cast<std::uint32_t>(it - g.nodes.begin());
  }

  struct Pending {
    std::uint32_t start;  // super-vertex
    std::uint32_t from;   // super-vertex, kUnset for a root
    std::uint32_t entry;  // node inside `start`
    std::optional<int> parent;
  };

  const auto n_comp = static_cast<std::uint32_t>(c.component_edges.size());
  for (std::uint32_t comp = 0; comp < n_comp; ++comp) {
    const std::uint32_t root_node = pick_root(g, c, comp, root, explicit_node);
    std::deque<Pending> queue{{c.super_of[root_node], kUnset, root_node, std::nullopt}};

    while (!queue.empty()) {
      const Pending job = queue.front();
      queue.pop_front();

      Branch b;
      b.id = static_cast<int>(table.branches.size()) + 1;
      b.parent = job.parent;
      b.generation = job.parent ? table.branches[static_cast<std::size_t>(*job.parent - 1)].generation + 1 : 0;

      std::uint32_t cur = job.start, prev = job.from, entry = job.entry;
      while (true) {
        for (auto v : cluster_order(g, c, cur, entry)) b.voxels.push_back(g.coord(v));
        std::vector<std::uint32_t> next;
        for (auto w : c.adj[cur])
          if (w != prev) next.push_back(w);
        if (next.size() == 1) {
          prev = cur;
          cur = next.front();
          entry = entry_voxel(g, c, cur, prev);
          continue;
        }
        for (auto w : next) queue.push_back({w, cur, entry_voxel(g, c, w, cur), b.id});
        break;
      }
      b.length_mm = path_length_mm(b.voxels, spacing);
      if (b.parent) table.branches[static_cast<std::size_t>(*b.parent - 1)].children.push_back(b.id);
      table.branches.push_back(std::move(b));
    }
  }
  return table;
}

namespace {

struct CenterPoint {
  Index3 p;
  int branch;
};

// Uniform bucket grid over centerline voxels for exact nearest-neighbor search.
class CenterlineIndex {
 public:
  CenterlineIndex(const BranchTable& table, const Dims& shape) : spacing_(table.spacing) {
    cells_ = Dims{(shape.z + kCell - 1) / kCell, (shape.y + kCell - 1) / kCell, (shape.x + kCell - 1) / kCell};
    buckets_.resize(cells_.count());
    for (const auto& b : table.branches)
      for (const auto& p : b.voxels) buckets_[cell_index(p.z / kCell, p.y / kCell, p.x / kCell)].push_back({p, b.id});
    min_spacing_ = std::min({spacing_.z, spacing_.y, spacing_.x});
  }

  int nearest(const Index3& q) const {
    const std::int64_t cz = q.z / kCell, cy = q.y / kCell, cx = q.x / kCell;
    const std::int64_t max_ring = std::max({cells_.z, cells_.y, cells_.x});
    double best = std::numeric_limits<double>::infinity();
    int best_id = 0;
    for (std::int64_t r = 0; r <= max_ring; ++r) {
      for (std::int64_t z = cz - r; z <= cz + r; ++z) {
        if (z < 0 || z >= cells_.z) continue;
        for (std::int64_t y = cy - r; y <= cy + r; ++y) {
          if (y < 0 || y >= cells_.y) continue;
          const bool shell = std::abs(z - cz) == r || std::abs(y - cy) == r;
          for (std::int64_t x = cx - r; x <= cx + r; x += (shell ? 1 : 2 * r)) {
            if (x >= 0 && x < cells_.x) {
              for (const auto& c : buckets_[cell_index(z, y, x)]) {
                const double d = squared_distance(q, c.p, spacing_);
                if (d < best || (d == best && c.branch < best_id)) {
                  best = d;
                  best_id = c.branch;
                }
              }
            }
            if (r == 0) break;
          }
        }
      }
      // Anything in ring r+1 or beyond is at least (r*kCell + 1) voxels away along some axis.
      const double bound = static_cast<double>(r * kCell + 1) * min_spacing_;
      if (best_id != 0 && best < bound * bound) break;
    }
    return best_id;
  }

  static double squared_distance(const Index3& a, const Index3& b, const Spacing& s) {
    const double dz = static_cast<double>(a.z - b.z) * s.z;
    const double dy = static_cast<double>(a.y - b.y) * s.y;
    const double dx = static_cast<double>(a.x - b.x) * s.x;
    return dz * dz + dy * dy + dx * dx;
  }

 private:
  static constexpr std::int64_t kCell = 8;

  std::size_t cell_index(std::int64_t z, std::int64_t y, std::int64_t x) const {
    return static_cast<std::size_t>((z * cells_.y + y) * cells_.x + x);
  }

  Spacing spacing_;
  Dims cells_;
  double min_spacing_ = 1.0;
  std::vector<std::vector<CenterPoint>> buckets_;
};

}  // namespace

Volume label_branches(const Volume& mask, const BranchTable& table) {
  require_role(mask, Role::Binary, "label_branches");
  if (table.empty()) throw Error(Errc::EmptyTable, "branch table has no branches");
  if (mask.shape() != table.shape) throw Error(Errc::ShapeMismatch, "label_branches: mask and table shapes differ");
  for (const auto& b : table.branches)
    for (const auto& p : b.voxels)
      if (!mask.contains(p) || mask.at(p) == 0.0) {
        throw Error(Errc::InvalidArgument, "centerline voxel of branch " + std::to_string(b.id) + " lies outside the mask");
      }

  const CenterlineIndex index(table, mask.shape());
  Volume out(mask.shape(), Role::Label, mask.spacing());
  parallel_for(mask.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      if (mask[i] != 0.0) out[i] = index.nearest(mask.unflatten(i));
    }
  });
  return out;
}

TreeStats tree_stats(const BranchTable& table) {
  if (table.empty()) throw Error(Errc::EmptyTable, "tree_stats on empty table");
  TreeStats s;
  s.branch_count = table.size();
  for (const auto& b : table.branches) {
    s.total_length_mm += b.length_mm;
    s.max_generation = std::max(s.max_generation, b.generation);
  }
  return s;
}

std::string branch_table_to_json(const BranchTable& table) {
  json branches = json::array();
  for (const auto& b : table.branches) {
    json voxels = json::array();
    for (const auto& p : b.voxels) voxels.push_back({p.z, p.y, p.x});
    branches.push_back({{"id", b.id},
                        {"parent", b.parent ? json(*b.parent) : json(nullptr)},
                        {"children", b.children},
                        {"generation", b.generation},
                        {"length_mm", b.length_mm},
                        {"voxels", std::move(voxels)}});
  }
  json doc = {{"format_version", kTableFormatVersion},
              {"shape", {table.shape.z, table.shape.y, table.shape.x}},
              {"spacing", {table.spacing.z, table.spacing.y, table.spacing.x}},
              {"branches", std::move(branches)}};
  return doc.dump(2) + "\n";
}

BranchTable branch_table_from_json(const std::string& text) {
  BranchTable t;
  try {
    const json doc = json::parse(text);
    if (doc.contains("shape")) {
      const auto& s = doc.at("shape");
      t.shape = Dims{s.at(0).get<std::int64_t>(), s.at(1).get<std::int64_t>(), s.at(2).get<std::int64_t>()};
    }
    if (doc.contains("spacing")) {
      const auto& s = doc.at("spacing");
      t.spacing = Spacing{s.at(0).get<double>(), s.at(1).get<double>(), s.at(2).get<double>()};
    }
    for (const auto& jb : doc.at("branches")) {
      Branch b;
      b.id = jb.at("id").get<int>();
      if (!jb.at("parent").is_null()) b.parent = jb.at("parent").get<int>();
      b.children = jb.at("children").get<std::vector<int>>();
      b.generation = jb.at("generation").get<int>();
      b.length_mm = jb.at("length_mm").get<double>();
      for (const auto& p : jb.at("voxels")) b.voxels.push_back({p.at(0).get<std::int64_t>(), p.at(1).get<std::int64_t>(),
                                                                p.at(2).get<std::int64_t>()});
      if (b.id != static_cast<int>(t.branches.size()) + 1) {
        throw Error(Errc::ParseError, "branch ids must be consecutive from 1");
      }
      t.branches.push_back(std::move(b));
    }
  } catch (const json::exception& e) {
    throw Error(Errc::ParseError, std::string("branch table JSON: ") + e.what());
  }
  return t;
}

}  // namespace airway
