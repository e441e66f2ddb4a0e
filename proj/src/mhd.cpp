#include "airway/mhd.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

namespace airway {

static_assert(std::endian::native == std::endian::little, "raw payloads are read and written little-endian");

namespace fs = std::filesystem;

std::string_view element_type_name(ElementType t) noexcept {
  switch (t) {
    case ElementType::UChar: return "MET_UCHAR";
    case ElementType::Short: return "MET_SHORT";
    case ElementType::Float: return "MET_FLOAT";
    case ElementType::UInt: return "MET_UINT";
  }
  return "MET_UCHAR";
}

ElementType element_type_for(Role role) noexcept {
  switch (role) {
    case Role::Binary: return ElementType::UChar;
    case Role::Label: return ElementType::UInt;
    case Role::Intensity:
    case Role::Probability: return ElementType::Float;
  }
  return ElementType::Float;
}

namespace {

std::size_t element_size(ElementType t) {
  switch (t) {
    case ElementType::UChar: return 1;
    case ElementType::Short: return 2;
    case ElementType::Float: return 4;
    case ElementType::UInt: return 4;
  }
  return 1;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

template <typename T, std::size_t N>
std::array<T, N> parse_numbers(const std::string& key, const std::string& value) {
  std::istringstream in(value);
  std::array<T, N> out{};
  for (std::size_t i = 0; i < N; ++i) {
    if (!(in >> out[i])) throw Error(Errc::ParseError, "expected " + std::to_string(N) + " values for " + key);
  }
  std::string rest;
  if (in >> rest) throw Error(Errc::ParseError, "too many values for " + key);
  return out;
}

ElementType parse_element_type(const std::string& s) {
  if (s == "MET_UCHAR") return ElementType::UChar;
  if (s == "MET_SHORT") return ElementType::Short;
  if (s == "MET_FLOAT") return ElementType::Float;
  if (s == "MET_UINT") return ElementType::UInt;
  throw Error(Errc::UnsupportedElementType, "element type '" + s + "'");
}

Role infer_role(ElementType t, const std::vector<double>& data) {
  switch (t) {
    case ElementType::UChar:
      for (double v : data)
        if (v != 0.0 && v != 1.0) return Role::Label;
      return Role::Binary;
    case ElementType::UInt: return Role::Label;
    case ElementType::Short: return Role::Intensity;
    case ElementType::Float:
      for (double v : data)
        if (!(v >= 0.0 && v <= 1.0)) return Role::Intensity;
      return Role::Probability;
  }
  return Role::Intensity;
}

template <typename T>
T read_le(const char* p) {
  T v;
  std::memcpy(&v, p, sizeof(T));
  return v;
}

template <typename T>
void write_le(std::string& buf, std::size_t i, T v) {
  std::memcpy(buf.data() + i * sizeof(T), &v, sizeof(T));
}

}  // namespace

MetaHeader read_mhd_header(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::IoFailure, "cannot open header " + path.string());

  std::map<std::string, std::string> known;
  MetaHeader h;
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      if (!trim(line).empty()) throw Error(Errc::ParseError, "malformed header line '" + line + "'");
      continue;
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key == "NDims" || key == "DimSize" || key == "ElementType" || key == "ElementSpacing" ||
        key == "ElementDataFile" || key == "VolumeRole") {
      known[key] = value;
    } else {
      h.extra.emplace_back(key, value);
    }
  }

  auto require = [&](const char* key) -> const std::string& {
    const auto it = known.find(key);
    if (it == known.end()) throw Error(Errc::MissingHeaderKey, std::string(key) + " in " + path.string());
    return it->second;
  };

  if (parse_numbers<int, 1>("NDims", require("NDims"))[0] != 3) {
    throw Error(Errc::ParseError, "NDims must be 3 in " + path.string());
  }
  const auto dims = parse_numbers<std::int64_t, 3>("DimSize", require("DimSize"));
  h.dims = Dims{dims[2], dims[1], dims[0]};
  if (h.dims.z <= 0 || h.dims.y <= 0 || h.dims.x <= 0) throw Error(Errc::ParseError, "DimSize must be positive");
  h.element_type = parse_element_type(require("ElementType"));
  const auto sp = parse_numbers<double, 3>("ElementSpacing", require("ElementSpacing"));
  h.spacing = Spacing{sp[2], sp[1], sp[0]};
  h.data_file = require("ElementDataFile");
  if (const auto it = known.find("VolumeRole"); it != known.end()) h.role = parse_role(it->second);
  return h;
}

Volume load_volume(const fs::path& path, std::optional<Role> role_hint) {
  const MetaHeader h = read_mhd_header(path);
  const fs::path raw_path = path.parent_path() / h.data_file;

  std::ifstream raw(raw_path, std::ios::binary);
  if (!raw) throw Error(Errc::IoFailure, "cannot open payload " + raw_path.string());
  std::string bytes((std::istreambuf_iterator<char>(raw)), std::istreambuf_iterator<char>());

  const std::size_t n = h.dims.count();
  const std::size_t esize = element_size(h.element_type);
  if (bytes.size() != n * esize) {
    throw Error(Errc::SizeMismatch, raw_path.string() + " holds " + std::to_string(bytes.size()) +
                                        " bytes, header declares " + std::to_string(n * esize));
  }

  // Disk order is x-fastest, which is exactly the in-memory z-major order.
  std::vector<double> data(n);
  const char* p = bytes.data();
  for (std::size_t i = 0; i < n; ++i, p += esize) {
    switch (h.element_type) {
      case ElementType::UChar: data[i] = static_cast<unsigned char>(*p); break;
      case ElementType::Short: data[i] = read_le<std::int16_t>(p); break;
      case ElementType::Float: data[i] = read_le<float>(p); break;
      case ElementType::UInt: data[i] = read_le<std::uint32_t>(p); break;
    }
  }

  Role role = role_hint.value_or(h.role.value_or(infer_role(h.element_type, data)));
  return Volume(h.dims, role, h.spacing, std::move(data));
}

void save_volume(const Volume& v, const fs::path& path) {
  v.check_invariants();
  const ElementType et = element_type_for(v.role());
  const std::size_t n = v.size();
  std::string buf(n * element_size(et), '\0');
  for (std::size_t i = 0; i < n; ++i) {
    const double x = v[i];
    switch (et) {
      case ElementType::UChar: buf[i] = static_cast<char>(static_cast<unsigned char>(x)); break;
      case ElementType::Short: write_le(buf, i, static_cast<std::int16_t>(x)); break;
      case ElementType::Float: write_le(buf, i, static_cast<float>(x)); break;
      case ElementType::UInt:
        if (x > static_cast<double>(std::numeric_limits<std::uint32_t>::max())) {
          throw Error(Errc::InvalidArgument, "label value exceeds MET_UINT range");
        }
        write_le(buf, i, static_cast<std::uint32_t>(x));
        break;
    }
  }

  fs::path header = path;
  if (header.extension() != ".mhd") header += ".mhd";
  fs::path raw_path = header;
  raw_path.replace_extension(".raw");

  std::ostringstream hs;
  hs.precision(17);
  hs << "ObjectType = Image\n"
     << "NDims = 3\n"
     << "BinaryData = True\n"
     << "BinaryDataByteOrderMSB = False\n"
     << "DimSize = " << v.shape().x << ' ' << v.shape().y << ' ' << v.shape().z << '\n'
     << "ElementSpacing = " << v.spacing().x << ' ' << v.spacing().y << ' ' << v.spacing().z << '\n'
     << "ElementType = " << element_type_name(et) << '\n'
     << "VolumeRole = " << role_name(v.role()) << '\n'
     << "ElementDataFile = " << raw_path.filename().string() << '\n';

  {
    std::ofstream out(raw_path, std::ios::binary | std::ios::trunc);
    if (!out || !out.write(buf.data(), static_cast<std::streamsize>(buf.size()))) {
      throw Error(Errc::IoFailure, "cannot write " + raw_path.string());
    }
  }
  std::ofstream out(header, std::ios::trunc);
  const std::string text = hs.str();
  if (!out || !out.write(text.data(), static_cast<std::streamsize>(text.size()))) {
    throw Error(Errc::IoFailure, "cannot write " + header.string());
  }
}

}  // namespace airway
