// Directional sequential thinning. Each pass visits the six face directions;
// within a direction, border voxels that are simple and not curve endpoints
// are collected, then removed one at a time with only the simple-point test
// repeated against the current image. Sequential re-checking is what keeps
// the component and cavity structure intact. The endpoint test is not
// repeated: a cap voxel whose neighbors were removed earlier in the same
// sweep would otherwise survive as a spurious tip.

#include <array>
#include <bit>
#include <cstdint>

#include "airway/morphology.hpp"

namespace airway {

namespace {

constexpr int kCenter = 13;

constexpr int pos(int dz, int dy, int dx) { return (dz + 1) * 9 + (dy + 1) * 3 + (dx + 1); }

struct NeighborhoodTables {
  std::array<std::uint32_t, 27> adj26{};
  std::array<std::uint32_t, 27> adj6{};
  std::uint32_t n26 = 0;
  std::uint32_t n18 = 0;
  std::uint32_t faces = 0;
};

constexpr NeighborhoodTables make_tables() {
  NeighborhoodTables t;
  for (int a = 0; a < 27; ++a) {
    const int az = a / 9 - 1, ay = (a / 3) % 3 - 1, ax = a % 3 - 1;
    const int manhattan = (az != 0) + (ay != 0) + (ax != 0);
    if (a != kCenter) t.n26 |= 1u << a;
    if (manhattan == 1 || manhattan == 2) t.n18 |= 1u << a;
    if (manhattan == 1) t.faces |= 1u << a;
    for (int b = 0; b < 27; ++b) {
      if (a == b) continue;
      const int bz = b / 9 - 1, by = (b / 3) % 3 - 1, bx = b % 3 - 1;
      const int dz = az > bz ? az - bz : bz - az;
      const int dy = ay > by ? ay - by : by - ay;
      const int dx = ax > bx ? ax - bx : bx - ax;
      if (dz <= 1 && dy <= 1 && dx <= 1) t.adj26[a] |= 1u << b;
      if (dz + dy + dx == 1) t.adj6[a] |= 1u << b;
    }
  }
  return t;
}

constexpr NeighborhoodTables kTables = make_tables();

std::uint32_t grow(std::uint32_t seed, std::uint32_t set, const std::array<std::uint32_t, 27>& adj) {
  std::uint32_t comp = seed;
  std::uint32_t frontier = seed;
  while (frontier != 0) {
    std::uint32_t next = 0;
    for (std::uint32_t f = frontier; f != 0; f &= f - 1) next |= adj[std::countr_zero(f)];
    next &= set & ~comp;
    comp |= next;
    frontier = next;
  }
  return comp;
}

}  // namespace

bool is_simple_point(std::uint32_t nb) noexcept {
  // Foreground: exactly one 26-component among the 26 neighbors.
  const std::uint32_t fg = nb & kTables.n26;
  if (fg == 0) return false;
  if (grow(fg & -fg, fg, kTables.adj26) != fg) return false;

  // Background: exactly one 6-component within N18 that touches a face neighbor.
  const std::uint32_t bg = ~nb & kTables.n18;
  std::uint32_t touching = bg & kTables.faces;
  if (touching == 0) return false;
  const std::uint32_t comp = grow(touching & -touching, bg, kTables.adj6);
  return (touching & ~comp) == 0;
}

Volume skeletonize(const Volume& mask) {
  require_role(mask, Role::Binary, "skeletonize");
  const Dims& d = mask.shape();
  // One voxel of background padding on every side removes bounds checks.
  const std::int64_t pz = d.z + 2, py = d.y + 2, px = d.x + 2;
  const std::int64_t sy = px, sz = px * py;
  std::vector<std::uint8_t> img(static_cast<std::size_t>(pz * py * px), 0);
  std::vector<std::int64_t> fg;

  auto padded = [&](std::int64_t z, std::int64_t y, std::int64_t x) { return (z + 1) * sz + (y + 1) * sy + (x + 1); };
  for (std::int64_t z = 0; z < d.z; ++z)
    for (std::int64_t y = 0; y < d.y; ++y)
      for (std::int64_t x = 0; x < d.x; ++x)
        if (mask.at({z, y, x}) != 0.0) {
          const auto i = padded(z, y, x);
          img[static_cast<std::size_t>(i)] = 1;
          fg.push_back(i);
        }

  std::array<std::int64_t, 27> delta{};
  for (int a = 0; a < 27; ++a) delta[a] = (a / 9 - 1) * sz + ((a / 3) % 3 - 1) * sy + (a % 3 - 1);

  auto neighborhood = [&](std::int64_t i) {
    std::uint32_t nb = 0;
    for (int a = 0; a < 27; ++a) nb |= static_cast<std::uint32_t>(img[static_cast<std::size_t>(i + delta[a])]) << a;
    return nb;
  };
  auto removable = [&](std::int64_t i) {
    const std::uint32_t nb = neighborhood(i);
    if (std::popcount(nb & kTables.n26) <= 1) return false;  // endpoint or isolated
    return is_simple_point(nb);
  };

  const std::array<int, 6> directions{pos(0, 0, -1), pos(0, 0, 1), pos(0, -1, 0),
                                      pos(0, 1, 0),  pos(-1, 0, 0), pos(1, 0, 0)};
  std::vector<std::int64_t> candidates;
  bool changed = true;
  while (changed) {
    changed = false;
    for (int dir : directions) {
      candidates.clear();
      for (std::int64_t i : fg) {
        if (img[static_cast<std::size_t>(i)] && !img[static_cast<std::size_t>(i + delta[dir])] && removable(i)) {
          candidates.push_back(i);
        }
      }
      for (std::int64_t i : candidates) {
        if (is_simple_point(neighborhood(i))) {
          img[static_cast<std::size_t>(i)] = 0;
          changed = true;
        }
      }
    }
    std::erase_if(fg, [&](std::int64_t i) { return img[static_cast<std::size_t>(i)] == 0; });
  }

  Volume out(d, Role::Binary, mask.spacing());
  for (std::int64_t i : fg) {
    const std::int64_t z = i / sz - 1, y = (i / sy) % py - 1, x = i % px - 1;
    out.at({z, y, x}) = 1.0;
  }
  return out;
}

}  // namespace airway
