#include "airway/volume.hpp"

#include <cmath>
#include <string>

namespace airway {

std::string_view errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::IoFailure: return "IoFailure";
    case Errc::MissingHeaderKey: return "MissingHeaderKey";
    case Errc::UnsupportedElementType: return "UnsupportedElementType";
    case Errc::SizeMismatch: return "SizeMismatch";
    case Errc::ParseError: return "ParseError";
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::IndexOutOfBounds: return "IndexOutOfBounds";
    case Errc::RoleMismatch: return "RoleMismatch";
    case Errc::ShapeMismatch: return "ShapeMismatch";
    case Errc::NonSquarePlane: return "NonSquarePlane";
    case Errc::NonFiniteInput: return "NonFiniteInput";
    case Errc::InvalidProbability: return "InvalidProbability";
    case Errc::NonPositiveDilation: return "NonPositiveDilation";
    case Errc::OutOfBounds: return "OutOfBounds";
    case Errc::EmptyMask: return "EmptyMask";
    case Errc::EmptyGraph: return "EmptyGraph";
    case Errc::EmptyTable: return "EmptyTable";
    case Errc::EmptySkeleton: return "EmptySkeleton";
    case Errc::EmptyStack: return "EmptyStack";
    case Errc::EmptyList: return "EmptyList";
    case Errc::NoBranches: return "NoBranches";
    case Errc::CyclicSkeleton: return "CyclicSkeleton";
    case Errc::DoesNotFit: return "DoesNotFit";
    case Errc::UnknownBranch: return "UnknownBranch";
    case Errc::PredictorFailure: return "PredictorFailure";
  }
  return "Unknown";
}

std::string_view role_name(Role role) noexcept {
  switch (role) {
    case Role::Intensity: return "Intensity";
    case Role::Probability: return "Probability";
    case Role::Binary: return "Binary";
    case Role::Label: return "Label";
  }
  return "Intensity";
}

Role parse_role(std::string_view name) {
  if (name == "Intensity" || name == "intensity") return Role::Intensity;
  if (name == "Probability" || name == "probability") return Role::Probability;
  if (name == "Binary" || name == "binary") return Role::Binary;
  if (name == "Label" || name == "label") return Role::Label;
  throw Error(Errc::InvalidArgument, "unknown volume role '" + std::string(name) + "'");
}

namespace {

template <int N>
constexpr std::array<Index3, N> make_offsets(int max_manhattan) {
  std::array<Index3, N> out{};
  int k = 0;
  for (int dz = -1; dz <= 1; ++dz)
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx) {
        const int m = (dz != 0) + (dy != 0) + (dx != 0);
        if (m == 0 || m > max_manhattan) continue;
        out[k++] = Index3{dz, dy, dx};
      }
  return out;
}

constexpr auto kFace6 = make_offsets<6>(1);
constexpr auto kEdge18 = make_offsets<18>(2);
constexpr auto kVertex26 = make_offsets<26>(3);

bool valid_for_role(double v, Role role) {
  switch (role) {
    case Role::Intensity: return std::isfinite(v);
    case Role::Probability: return v >= 0.0 && v <= 1.0;
    case Role::Binary: return v == 0.0 || v == 1.0;
    case Role::Label: return v >= 0.0 && std::isfinite(v) && std::floor(v) == v;
  }
  return false;
}

void check_spacing(const Spacing& s) {
  if (!(s.z > 0.0 && s.y > 0.0 && s.x > 0.0) || !std::isfinite(s.z) || !std::isfinite(s.y) ||
      !std::isfinite(s.x)) {
    throw Error(Errc::InvalidArgument, "voxel spacing must be finite and positive");
  }
}

void check_dims(const Dims& d) {
  if (d.z < 0 || d.y < 0 || d.x < 0) throw Error(Errc::InvalidArgument, "negative volume dimension");
}

}  // namespace

std::span<const Index3> neighbor_offsets(Connectivity conn) noexcept {
  switch (conn) {
    case Connectivity::Face6: return kFace6;
    case Connectivity::Edge18: return kEdge18;
    case Connectivity::Vertex26: return kVertex26;
  }
  return kVertex26;
}

Connectivity connectivity_from_int(int n) {
  switch (n) {
    case 6: return Connectivity::Face6;
    case 18: return Connectivity::Edge18;
    case 26: return Connectivity::Vertex26;
    default: throw Error(Errc::InvalidArgument, "connectivity must be 6, 18 or 26, got " + std::to_string(n));
  }
}

Volume::Volume(Dims shape, Role role, Spacing spacing, double fill)
    : shape_(shape), spacing_(spacing), role_(role) {
  check_dims(shape);
  check_spacing(spacing);
  if (!valid_for_role(fill, role)) {
    throw Error(Errc::RoleMismatch, "fill value invalid for role " + std::string(role_name(role)));
  }
  data_.assign(shape.count(), fill);
}

Volume::Volume(Dims shape, Role role, Spacing spacing, std::vector<double> data)
    : shape_(shape), spacing_(spacing), role_(role), data_(std::move(data)) {
  check_dims(shape);
  check_spacing(spacing);
  if (data_.size() != shape.count()) {
    throw Error(Errc::SizeMismatch, "data length " + std::to_string(data_.size()) + " != " +
                                        std::to_string(shape.count()) + " voxels");
  }
  check_invariants();
}

void Volume::set_role(Role role) {
  const Role old = role_;
  role_ = role;
  try {
    check_invariants();
  } catch (...) {
    role_ = old;
    throw;
  }
}

void Volume::set_spacing(const Spacing& spacing) {
  check_spacing(spacing);
  spacing_ = spacing;
}

void Volume::check_invariants() const {
  for (std::size_t i = 0; i < data_.size(); ++i) {
    if (!valid_for_role(data_[i], role_)) {
      throw Error(Errc::RoleMismatch, "value " + std::to_string(data_[i]) + " at index " + std::to_string(i) +
                                          " is invalid for role " + std::string(role_name(role_)));
    }
  }
}

std::size_t Volume::count_nonzero() const noexcept {
  std::size_t n = 0;
  for (double v : data_) n += (v != 0.0);
  return n;
}

void require_role(const Volume& v, Role role, std::string_view what) {
  if (v.role() != role) {
    throw Error(Errc::RoleMismatch, std::string(what) + ": expected " + std::string(role_name(role)) +
                                        " volume, got " + std::string(role_name(v.role())));
  }
}

void require_same_shape(const Volume& a, const Volume& b, std::string_view what) {
  if (a.shape() != b.shape()) {
    auto fmt = [](const Dims& d) {
      return "(" + std::to_string(d.z) + "," + std::to_string(d.y) + "," + std::to_string(d.x) + ")";
    };
    throw Error(Errc::ShapeMismatch, std::string(what) + ": " + fmt(a.shape()) + " vs " + fmt(b.shape()));
  }
}

std::vector<std::size_t> neighbors(const Volume& v, const Index3& p, Connectivity conn) {
  if (!v.contains(p)) {
    throw Error(Errc::IndexOutOfBounds, "voxel (" + std::to_string(p.z) + "," + std::to_string(p.y) + "," +
                                            std::to_string(p.x) + ") outside volume");
  }
  std::vector<std::size_t> out;
  for (const auto& o : neighbor_offsets(conn)) {
    const Index3 q{p.z + o.z, p.y + o.y, p.x + o.x};
    if (v.contains(q)) out.push_back(v.flatten(q));
  }
  return out;
}

Volume threshold(const Volume& v, double t) {
  require_role(v, Role::Probability, "threshold");
  if (!(t >= 0.0 && t <= 1.0)) throw Error(Errc::InvalidArgument, "threshold must lie in [0,1]");
  Volume out(v.shape(), Role::Binary, v.spacing());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] >= t ? 1.0 : 0.0;
  return out;
}

Volume foreground(const Volume& v) {
  Volume out(v.shape(), Role::Binary, v.spacing());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] != 0.0 ? 1.0 : 0.0;
  return out;
}

}  // namespace airway
