#include "airway/synthgen.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <random>

#include <json.hpp>

#include "airway/morphology.hpp"

namespace airway {

using json = nlohmann::json;

namespace {

using Vec3 = std::array<double, 3>;

Vec3 to_vec(const Index3& p) {
  return {static_cast<double>(p.z), static_cast<double>(p.y), static_cast<double>(p.x)};
}
Vec3 sub(const Vec3& a, const Vec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
Vec3 add(const Vec3& a, const Vec3& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }
Vec3 mul(const Vec3& a, double s) { return {a[0] * s, a[1] * s, a[2] * s}; }
double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}
double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }
Vec3 normalized(const Vec3& a) { return mul(a, 1.0 / norm(a)); }

Index3 round_point(const Vec3& v) {
  return {std::llround(v[0]), std::llround(v[1]), std::llround(v[2])};
}

// Closest distance between segments p1q1 and p2q2.
double segment_distance(const Vec3& p1, const Vec3& q1, const Vec3& p2, const Vec3& q2) {
  const Vec3 d1 = sub(q1, p1), d2 = sub(q2, p2), r = sub(p1, p2);
  const double a = dot(d1, d1), e = dot(d2, d2), f = dot(d2, r);
  double s = 0.0, t = 0.0;
  if (a <= 1e-12 && e <= 1e-12) return norm(r);
  if (a <= 1e-12) {
    t = std::clamp(f / e, 0.0, 1.0);
  } else {
    const double c = dot(d1, r);
    if (e <= 1e-12) {
      s = std::clamp(-c / a, 0.0, 1.0);
    } else {
      const double b = dot(d1, d2);
      const double denom = a * e - b * b;
      s = denom > 1e-12 ? std::clamp((b * f - c * e) / denom, 0.0, 1.0) : 0.0;
      t = (b * s + f) / e;
      if (t < 0.0) {
        t = 0.0;
        s = std::clamp(-c / a, 0.0, 1.0);
      } else if (t > 1.0) {
        t = 1.0;
        s = std::clamp((b - c) / a, 0.0, 1.0);
      }
    }
  }
  return norm(sub(add(p1, mul(d1, s)), add(p2, mul(d2, t))));
}

// Uniform double in [0, 1) from the top 53 bits.
double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

struct Segment {
  Index3 a, b;
  double radius;
  int parent;  // index into segments, -1 for the root
  int generation;
  double azimuth;
};

void rasterize_capsule(Volume& v, const Index3& a, const Index3& b, double radius) {
  const double r = radius;
  const auto lo = [&](std::int64_t p, std::int64_t q) { return static_cast<std::int64_t>(std::floor(std::min(p, q) - r)); };
  const auto hi = [&](std::int64_t p, std::int64_t q) { return static_cast<std::int64_t>(std::ceil(std::max(p, q) + r)); };
  const Dims& d = v.shape();
  for (std::int64_t z = std::max<std::int64_t>(0, lo(a.z, b.z)); z <= std::min(d.z - 1, hi(a.z, b.z)); ++z)
    for (std::int64_t y = std::max<std::int64_t>(0, lo(a.y, b.y)); y <= std::min(d.y - 1, hi(a.y, b.y)); ++y)
      for (std::int64_t x = std::max<std::int64_t>(0, lo(a.x, b.x)); x <= std::min(d.x - 1, hi(a.x, b.x)); ++x)
        if (point_segment_distance({z, y, x}, a, b) <= r) v.at({z, y, x}) = 1.0;
}

// Euler characteristic of the union of closed unit cubes, one per foreground
// voxel: V - E + F - C over the cubical complex.
std::int64_t euler_characteristic(const Volume& v) {
  const Dims& d = v.shape();
  auto fg = [&](std::int64_t z, std::int64_t y, std::int64_t x) {
    return z >= 0 && y >= 0 && x >= 0 && z < d.z && y < d.y && x < d.x && v.at({z, y, x}) != 0.0;
  };
  // any voxel in the box [z0,z1] x [y0,y1] x [x0,x1]
  auto any = [&](std::int64_t z0, std::int64_t z1, std::int64_t y0, std::int64_t y1, std::int64_t x0, std::int64_t x1) {
    for (std::int64_t z = z0; z <= z1; ++z)
      for (std::int64_t y = y0; y <= y1; ++y)
        for (std::int64_t x = x0; x <= x1; ++x)
          if (fg(z, y, x)) return true;
    return false;
  };
  Index3 lo{d.z, d.y, d.x}, hi{-1, -1, -1};
  for (std::size_t i = 0; i < v.size(); ++i)
    if (v[i] != 0.0) {
      const Index3 p = v.unflatten(i);
      lo = {std::min(lo.z, p.z), std::min(lo.y, p.y), std::min(lo.x, p.x)};
      hi = {std::max(hi.z, p.z), std::max(hi.y, p.y), std::max(hi.x, p.x)};
    }
  std::int64_t chi = 0;
  for (std::int64_t z = lo.z; z <= hi.z + 1; ++z)
    for (std::int64_t y = lo.y; y <= hi.y + 1; ++y)
      for (std::int64_t x = lo.x; x <= hi.x + 1; ++x) {
        if (!any(z - 1, z, y - 1, y, x - 1, x)) continue;
        chi += 1;
        chi -= any(z - 1, z, y - 1, y, x, x) + any(z - 1, z, y, y, x - 1, x) + any(z, z, y - 1, y, x - 1, x);
        chi += any(z - 1, z, y, y, x, x) + any(z, z, y - 1, y, x, x) + any(z, z, y, y, x - 1, x);
        chi -= fg(z, y, x);
      }
  return chi;
}

// One 26-component, no enclosed cavity and no tunnel.
bool is_solid_tree(const Volume& mask) {
  if (connected_components(mask, Connectivity::Vertex26).count != 1) return false;
  const Dims& d = mask.shape();
  Volume outside({d.z + 2, d.y + 2, d.x + 2}, Role::Binary, {}, 1.0);
  for (std::int64_t z = 0; z < d.z; ++z)
    for (std::int64_t y = 0; y < d.y; ++y)
      for (std::int64_t x = 0; x < d.x; ++x)
        if (mask.at({z, y, x}) != 0.0) outside.at({z + 1, y + 1, x + 1}) = 0.0;
  if (connected_components(outside, Connectivity::Face6).count != 1) return false;
  return euler_characteristic(mask) == 1;
}

}  // namespace

void TreeSpec::validate() const {
  auto bad = [](const char* msg) { throw Error(Errc::InvalidArgument, std::string("tree spec: ") + msg); };
  if (depth < 0) bad("depth must be >= 0");
  if (children_per_branch < 1) bad("children_per_branch must be >= 1");
  if (!(root_length_vox > 0.0)) bad("root_length_vox must be > 0");
  if (!(length_decay > 0.0)) bad("length_decay must be > 0");
  if (!(radius_decay > 0.0)) bad("radius_decay must be > 0");
  if (!(root_radius_vox * std::pow(radius_decay, depth) >= 1.0)) bad("radius at maximum depth must be >= 1 voxel");
  if (!(branch_angle_deg >= 0.0 && branch_angle_deg < 90.0)) bad("branch_angle_deg must lie in [0, 90)");
  if (volume_shape.z < 1 || volume_shape.y < 1 || volume_shape.x < 1) bad("volume_shape must be positive");
  if (!(min_separation_vox >= 0.0)) bad("min_separation_vox must be >= 0");
}

TreeSpec tree_spec_from_json(const std::string& text) {
  TreeSpec s;
  try {
    const json j = json::parse(text);
    s.depth = j.value("depth", s.depth);
    s.children_per_branch = j.value("children_per_branch", s.children_per_branch);
    s.root_length_vox = j.value("root_length_vox", s.root_length_vox);
    s.length_decay = j.value("length_decay", s.length_decay);
    s.root_radius_vox = j.value("root_radius_vox", s.root_radius_vox);
    s.radius_decay = j.value("radius_decay", s.radius_decay);
    s.branch_angle_deg = j.value("branch_angle_deg", s.branch_angle_deg);
    s.seed = j.value("seed", s.seed);
    s.min_separation_vox = j.value("min_separation_vox", s.min_separation_vox);
    if (j.contains("volume_shape")) {
      const auto& v = j.at("volume_shape");
      s.volume_shape = {v.at(0).get<std::int64_t>(), v.at(1).get<std::int64_t>(), v.at(2).get<std::int64_t>()};
    }
    if (j.contains("spacing")) {
      const auto& v = j.at("spacing");
      s.spacing = {v.at(0).get<double>(), v.at(1).get<double>(), v.at(2).get<double>()};
    }
  } catch (const json::exception& e) {
    throw Error(Errc::ParseError, std::string("tree spec JSON: ") + e.what());
  }
  s.validate();
  return s;
}

std::string tree_spec_to_json(const TreeSpec& s) {
  const json j = {{"depth", s.depth},
                  {"children_per_branch", s.children_per_branch},
                  {"root_length_vox", s.root_length_vox},
                  {"length_decay", s.length_decay},
                  {"root_radius_vox", s.root_radius_vox},
                  {"radius_decay", s.radius_decay},
                  {"branch_angle_deg", s.branch_angle_deg},
                  {"seed", s.seed},
                  {"volume_shape", {s.volume_shape.z, s.volume_shape.y, s.volume_shape.x}},
                  {"spacing", {s.spacing.z, s.spacing.y, s.spacing.x}},
                  {"min_separation_vox", s.min_separation_vox}};
  return j.dump(2) + "\n";
}

double point_segment_distance(const Index3& p, const Index3& a, const Index3& b) {
  const Vec3 pv = to_vec(p), av = to_vec(a), ab = sub(to_vec(b), av);
  const double len2 = dot(ab, ab);
  const double t = len2 == 0.0 ? 0.0 : std::clamp(dot(sub(pv, av), ab) / len2, 0.0, 1.0);
  return norm(sub(pv, add(av, mul(ab, t))));
}

std::vector<Index3> digital_line(const Index3& a, const Index3& b) {
  const std::int64_t dz = b.z - a.z, dy = b.y - a.y, dx = b.x - a.x;
  const std::int64_t n = std::max({std::abs(dz), std::abs(dy), std::abs(dx)});
  std::vector<Index3> out;
  out.reserve(static_cast<std::size_t>(n) + 1);
  for (std::int64_t i = 0; i <= n; ++i) {
    const double t = n == 0 ? 0.0 : static_cast<double>(i) / static_cast<double>(n);
    out.push_back({a.z + std::llround(t * static_cast<double>(dz)), a.y + std::llround(t * static_cast<double>(dy)),
                   a.x + std::llround(t * static_cast<double>(dx))});
  }
  return out;
}

Volume generate_tube(const Index3& a, const Index3& b, double radius, const Dims& shape, const Spacing& spacing) {
  Volume v(shape, Role::Binary, spacing);
  if (!v.contains(a) || !v.contains(b)) throw Error(Errc::OutOfBounds, "tube endpoint outside the volume");
  if (!(radius >= 0.0)) throw Error(Errc::InvalidArgument, "tube radius must be >= 0");
  rasterize_capsule(v, a, b, radius);
  return v;
}

SyntheticTree generate_tree(const TreeSpec& spec) {
  spec.validate();
  const Dims& shape = spec.volume_shape;
  std::mt19937_64 rng(spec.seed);
  const double angle = spec.branch_angle_deg * std::numbers::pi / 180.0;
  const double jitter = 15.0 * std::numbers::pi / 180.0;

  std::vector<Segment> segs;
  const auto margin = static_cast<std::int64_t>(std::ceil(spec.root_radius_vox)) + 1;
  const Index3 root_start{margin, shape.y / 2, shape.x / 2};
  const Vec3 root_dir{1.0, 0.0, 0.0};
  segs.push_back({root_start, round_point(add(to_vec(root_start), mul(root_dir, spec.root_length_vox))),
                  spec.root_radius_vox, -1, 0, uniform01(rng) * 2.0 * std::numbers::pi});

  // Breadth-first growth keeps ids in generation order.
  for (std::size_t k = 0; k < segs.size(); ++k) {
    const Segment parent = segs[k];
    if (parent.generation >= spec.depth) continue;
    const Vec3 axis = normalized(sub(to_vec(parent.b), to_vec(parent.a)));
    // Orthonormal frame around the parent axis.
    const Vec3 helper = std::abs(axis[0]) < 0.9 ? Vec3{1.0, 0.0, 0.0} : Vec3{0.0, 1.0, 0.0};
    const Vec3 u = normalized(cross(axis, helper));
    const Vec3 v = cross(axis, u);
    const int g = parent.generation + 1;
    const double length = spec.root_length_vox * std::pow(spec.length_decay, g);
    const double radius = spec.root_radius_vox * std::pow(spec.radius_decay, g);
    const double phase = parent.azimuth + std::numbers::pi / 2.0 + (uniform01(rng) * 2.0 - 1.0) * jitter;
    for (int c = 0; c < spec.children_per_branch; ++c) {
      const double phi = phase + 2.0 * std::numbers::pi * c / spec.children_per_branch;
      const double tilt = spec.children_per_branch == 1 ? 0.0 : angle;
      const Vec3 dir = add(mul(axis, std::cos(tilt)),
                           mul(add(mul(u, std::cos(phi)), mul(v, std::sin(phi))), std::sin(tilt)));
      // Endpoints are rounded to the voxel lattice, so each axis is exactly representable.
      const Index3 end = round_point(add(to_vec(parent.b), mul(dir, length)));
      segs.push_back({parent.b, end, radius, static_cast<int>(k), g, phi});
    }
  }

  for (const auto& s : segs) {
    for (const Index3& p : {s.a, s.b}) {
      const std::array<std::pair<std::int64_t, std::int64_t>, 3> axes{
          {{p.z, shape.z}, {p.y, shape.y}, {p.x, shape.x}}};
      for (const auto& [c, n] : axes) {
        if (static_cast<double>(c) - s.radius < 1.0 || static_cast<double>(c) + s.radius > static_cast<double>(n - 2)) {
          throw Error(Errc::DoesNotFit, "tree leaves the volume; enlarge volume_shape or shorten branches");
        }
      }
    }
  }
  for (std::size_t i = 0; i < segs.size(); ++i) {
    for (std::size_t j = i + 1; j < segs.size(); ++j) {
      const bool touching = segs[i].a == segs[j].a || segs[i].a == segs[j].b || segs[i].b == segs[j].a ||
                            segs[i].b == segs[j].b;
      if (touching) continue;
      const double gap = segment_distance(to_vec(segs[i].a), to_vec(segs[i].b), to_vec(segs[j].a), to_vec(segs[j].b)) -
                         segs[i].radius - segs[j].radius;
      if (gap < spec.min_separation_vox) {
        throw Error(Errc::DoesNotFit, "branches " + std::to_string(i + 1) + " and " + std::to_string(j + 1) +
                                          " are closer than the minimum separation");
      }
    }
  }

  SyntheticTree out;
  out.mask = Volume(shape, Role::Binary, spec.spacing);
  out.centerline = Volume(shape, Role::Binary, spec.spacing);
  out.table.shape = shape;
  out.table.spacing = spec.spacing;
  for (std::size_t k = 0; k < segs.size(); ++k) {
    const Segment& s = segs[k];
    rasterize_capsule(out.mask, s.a, s.b, s.radius);
    std::vector<Index3> line = digital_line(s.a, s.b);
    // The shared start voxel belongs to the parent branch.
    if (s.parent >= 0) line.erase(line.begin());
    for (const auto& p : line) out.centerline.at(p) = 1.0;

    Branch b;
    b.id = static_cast<int>(k) + 1;
    if (s.parent >= 0) {
      b.parent = s.parent + 1;
      out.table.branches[static_cast<std::size_t>(s.parent)].children.push_back(b.id);
    }
    b.generation = s.generation;
    b.voxels = std::move(line);
    b.length_mm = path_length_mm(b.voxels, spec.spacing);
    out.table.branches.push_back(std::move(b));
    out.axes.emplace_back(s.a, s.b);
    out.radii.push_back(s.radius);
  }
  if (!is_solid_tree(out.mask)) {
    throw Error(Errc::DoesNotFit, "rasterized branches enclose a tunnel or cavity; increase radii or branch angle");
  }
  return out;
}

Volume perturb(const Volume& mask, const PerturbOp& op) {
  require_role(mask, Role::Binary, "perturb");
  if (const auto* drop = std::get_if<DropBranch>(&op)) {
    if (drop->id < 1 || static_cast<std::size_t>(drop->id) > drop->table.size()) {
      throw Error(Errc::UnknownBranch, "branch id " + std::to_string(drop->id));
    }
    const Volume labels = label_branches(mask, drop->table);
    Volume out = mask;
    for (std::size_t i = 0; i < out.size(); ++i)
      if (labels[i] == drop->id) out[i] = 0.0;
    return out;
  }
  if (std::holds_alternative<ErodeOnce>(op)) return binary_erosion(mask, Connectivity::Face6);

  const auto& noise = std::get<AddNoiseComponent>(op);
  if (noise.size == 0) throw Error(Errc::InvalidArgument, "noise component size must be >= 1");
  // Voxels at Chebyshev distance >= 2 from the mask can join a blob that stays
  // 26-disjoint from it.
  std::vector<std::uint8_t> allowed(mask.size(), 1);
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask[i] == 0.0) continue;
    const Index3 p = mask.unflatten(i);
    allowed[i] = 0;
    for (const auto& o : neighbor_offsets(Connectivity::Vertex26)) {
      const Index3 q{p.z + o.z, p.y + o.y, p.x + o.x};
      if (mask.contains(q)) allowed[mask.flatten(q)] = 0;
    }
  }
  std::mt19937_64 rng(noise.seed);
  std::vector<std::size_t> free;
  for (std::size_t i = 0; i < allowed.size(); ++i)
    if (allowed[i]) free.push_back(i);
  if (free.size() < noise.size) throw Error(Errc::DoesNotFit, "no room for the noise component");

  Volume out = mask;
  for (int attempt = 0; attempt < 64; ++attempt) {
    std::vector<std::size_t> blob{free[static_cast<std::size_t>(uniform01(rng) * static_cast<double>(free.size()))]};
    std::vector<std::uint8_t> in_blob(mask.size(), 0);
    in_blob[blob.front()] = 1;
    std::vector<std::size_t> frontier;
    auto push_neighbors = [&](std::size_t i) {
      for (std::size_t n : neighbors(mask, mask.unflatten(i), Connectivity::Face6))
        if (allowed[n] && !in_blob[n]) frontier.push_back(n);
    };
    push_neighbors(blob.front());
    while (blob.size() < noise.size && !frontier.empty()) {
      const std::size_t pick = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(frontier.size()));
      const std::size_t n = frontier[pick];
      frontier[pick] = frontier.back();
      frontier.pop_back();
      if (in_blob[n]) continue;
      in_blob[n] = 1;
      blob.push_back(n);
      push_neighbors(n);
    }
    if (blob.size() == noise.size) {
      for (std::size_t i : blob) out[i] = 1.0;
      return out;
    }
  }
  throw Error(Errc::DoesNotFit, "could not grow a noise component of the requested size");
}

}  // namespace airway
