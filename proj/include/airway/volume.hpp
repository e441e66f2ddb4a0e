#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "airway/error.hpp"

namespace airway {

/// Voxel counts along (z, y, x).
struct Dims {
  std::int64_t z = 0;
  std::int64_t y = 0;
  std::int64_t x = 0;

  std::size_t count() const noexcept {
    return static_cast<std::size_t>(z) * static_cast<std::size_t>(y) * static_cast<std::size_t>(x);
  }
  bool operator==(const Dims&) const = default;
};

/// Millimeters per voxel along (z, y, x).
struct Spacing {
  double z = 1.0;
  double y = 1.0;
  double x = 1.0;

  bool operator==(const Spacing&) const = default;
};

struct Index3 {
  std::int64_t z = 0;
  std::int64_t y = 0;
  std::int64_t x = 0;

  bool operator==(const Index3&) const = default;
};

enum class Role { Intensity, Probability, Binary, Label };

std::string_view role_name(Role role) noexcept;
Role parse_role(std::string_view name);

enum class Connectivity { Face6, Edge18, Vertex26 };

/// Offsets (dz, dy, dx) of the neighborhood, in a fixed z-major order.
std::span<const Index3> neighbor_offsets(Connectivity conn) noexcept;

/// Maps 6, 18 or 26 to a Connectivity; anything else is InvalidArgument.
Connectivity connectivity_from_int(int n);

/// Dense 3D scalar grid stored z-major: index = (z * ny + y) * nx + x.
///
/// The role constrains the value domain (see check_invariants). Data is kept
/// in double precision regardless of the on-disk element type.
class Volume {
 public:
  Volume() = default;
  Volume(Dims shape, Role role, Spacing spacing = {}, double fill = 0.0);
  /// Takes ownership of `data`; throws SizeMismatch or RoleMismatch on invalid content.
  Volume(Dims shape, Role role, Spacing spacing, std::vector<double> data);

  const Dims& shape() const noexcept { return shape_; }
  const Spacing& spacing() const noexcept { return spacing_; }
  Role role() const noexcept { return role_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  std::span<const double> data() const noexcept { return data_; }
  std::span<double> data() noexcept { return data_; }

  double operator[](std::size_t i) const noexcept { return data_[i]; }
  double& operator[](std::size_t i) noexcept { return data_[i]; }

  double at(const Index3& p) const { return data_[flatten(p)]; }
  double& at(const Index3& p) { return data_[flatten(p)]; }

  bool contains(const Index3& p) const noexcept {
    return p.z >= 0 && p.y >= 0 && p.x >= 0 && p.z < shape_.z && p.y < shape_.y && p.x < shape_.x;
  }
  std::size_t flatten(const Index3& p) const noexcept {
    return (static_cast<std::size_t>(p.z) * static_cast<std::size_t>(shape_.y) +
            static_cast<std::size_t>(p.y)) *
               static_cast<std::size_t>(shape_.x) +
           static_cast<std::size_t>(p.x);
  }
  Index3 unflatten(std::size_t i) const noexcept {
    const auto nx = static_cast<std::size_t>(shape_.x);
    const auto ny = static_cast<std::size_t>(shape_.y);
    return {static_cast<std::int64_t>(i / (nx * ny)), static_cast<std::int64_t>((i / nx) % ny),
            static_cast<std::int64_t>(i % nx)};
  }

  /// Changes the role tag after validating the data against it.
  void set_role(Role role);
  void set_spacing(const Spacing& spacing);

  /// Throws RoleMismatch if a value violates the role's domain.
  void check_invariants() const;

  std::size_t count_nonzero() const noexcept;

  bool operator==(const Volume& other) const = default;

 private:
  Dims shape_;
  Spacing spacing_;
  Role role_ = Role::Intensity;
  std::vector<double> data_;
};

void require_role(const Volume& v, Role role, std::string_view what);
void require_same_shape(const Volume& a, const Volume& b, std::string_view what);

/// In-bounds neighbors of `p` under `conn`, as linear indices in offset order.
std::vector<std::size_t> neighbors(const Volume& v, const Index3& p, Connectivity conn);

/// Binary volume with 1 where v >= t (inclusive).
Volume threshold(const Volume& v, double t);

/// Binary volume with 1 wherever v != 0.
Volume foreground(const Volume& v);

}  // namespace airway
