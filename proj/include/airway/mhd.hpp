#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "airway/volume.hpp"

namespace airway {

enum class ElementType { UChar, Short, Float, UInt };

std::string_view element_type_name(ElementType t) noexcept;
ElementType element_type_for(Role role) noexcept;

/// Parsed MetaImage header. Keys we do not interpret are kept in `extra`
/// in file order.
struct MetaHeader {
  Dims dims;
  Spacing spacing;
  ElementType element_type = ElementType::UChar;
  std::string data_file;
  std::optional<Role> role;
  std::vector<std::pair<std::string, std::string>> extra;
};

MetaHeader read_mhd_header(const std::filesystem::path& path);

/// Loads a .mhd/.raw pair. The role comes from `role_hint` when given, then
/// from the header's VolumeRole key, then from the element type and values.
Volume load_volume(const std::filesystem::path& path, std::optional<Role> role_hint = std::nullopt);

/// Writes `<stem>.mhd` and `<stem>.raw` next to each other. Intensity and
/// Probability volumes are stored as MET_FLOAT, so a roundtrip is exact for
/// float-representable values.
void save_volume(const Volume& v, const std::filesystem::path& path);

}  // namespace airway
