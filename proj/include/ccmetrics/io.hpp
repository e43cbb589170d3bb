#pragma once

// MASK3D binary container.
//
//   "CCM1"                      4 bytes magic
//   u32 h, u32 w, u32 d         little-endian
//   f32 sx, f32 sy, f32 sz      little-endian IEEE-754
//   u8 dtype                    0 = binary u8 payload, 1 = u32 labels
//   payload                     h*w*d values, (a,b,c) row-major, c fastest
//
// Binary payloads are one byte per voxel and must be 0 or 1. Label payloads
// are little-endian u32.

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <string>
#include <variant>
#include <vector>

#include "ccmetrics/error.hpp"
#include "ccmetrics/volume.hpp"

namespace ccm::io {

inline constexpr std::array<char, 4> kMagic{'C', 'C', 'M', '1'};

enum class DType : std::uint8_t { binary = 0, labels = 1 };

namespace detail {

inline void put_u32(std::ostream& os, std::uint32_t v) {
  const std::array<char, 4> b{static_cast<char>(v & 0xFF), static_cast<char>((v >> 8) & 0xFF),
                              static_cast<char>((v >> 16) & 0xFF),
                              static_cast<char>((v >> 24) & 0xFF)};
  os.write(b.data(), 4);
}

inline std::uint32_t get_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

inline void put_f32(std::ostream& os, double v) {
  put_u32(os, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
}

inline std::uint32_t checked_u32(std::size_t v) {
  if (v > std::numeric_limits<std::uint32_t>::max()) throw FormatError("dimension exceeds u32");
  return static_cast<std::uint32_t>(v);
}

inline void write_header(std::ostream& os, const Dims& dims, const Spacing& sp, DType dtype) {
  os.write(kMagic.data(), 4);
  put_u32(os, checked_u32(dims.h));
  put_u32(os, checked_u32(dims.w));
  put_u32(os, checked_u32(dims.d));
  put_f32(os, sp.x);
  put_f32(os, sp.y);
  put_f32(os, sp.z);
  const char flag = static_cast<char>(dtype);
  os.write(&flag, 1);
}

inline void read_exact(std::istream& is, void* dst, std::size_t n, const char* what) {
  is.read(static_cast<char*>(dst), static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(is.gcount()) != n) throw FormatError(std::string("truncated ") + what);
}

}  // namespace detail

/// Spacing is stored as f32; values written and read back compare equal only
/// when they are exactly representable in single precision.
inline void write(std::ostream& os, const Mask3D& mask) {
  detail::write_header(os, mask.dims(), mask.spacing(), DType::binary);
  os.write(reinterpret_cast<const char*>(mask.values().data()),
           static_cast<std::streamsize>(mask.size()));
}

inline void write(std::ostream& os, const LabelVolume& labels) {
  detail::write_header(os, labels.dims(), labels.spacing(), DType::labels);
  std::vector<unsigned char> buf(labels.size() * 4);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto v = labels[i];
    buf[4 * i] = static_cast<unsigned char>(v & 0xFF);
    buf[4 * i + 1] = static_cast<unsigned char>((v >> 8) & 0xFF);
    buf[4 * i + 2] = static_cast<unsigned char>((v >> 16) & 0xFF);
    buf[4 * i + 3] = static_cast<unsigned char>((v >> 24) & 0xFF);
  }
  os.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
}

using AnyVolume = std::variant<Mask3D, LabelVolume>;

inline AnyVolume read(std::istream& is) {
  std::array<unsigned char, 4 + 12 + 12 + 1> hdr{};
  detail::read_exact(is, hdr.data(), hdr.size(), "header");
  if (std::memcmp(hdr.data(), kMagic.data(), 4) != 0) throw FormatError("bad magic");
  const Dims dims{detail::get_u32(&hdr[4]), detail::get_u32(&hdr[8]), detail::get_u32(&hdr[12])};
  const Spacing sp{std::bit_cast<float>(detail::get_u32(&hdr[16])),
                   std::bit_cast<float>(detail::get_u32(&hdr[20])),
                   std::bit_cast<float>(detail::get_u32(&hdr[24]))};
  try {
    validate_grid(dims, sp);
  } catch (const std::invalid_argument& e) {
    throw FormatError(e.what());
  }
  const auto flag = hdr[28];
  const std::size_t n = dims.voxels();

  AnyVolume out;
  if (flag == static_cast<unsigned char>(DType::binary)) {
    std::vector<std::uint8_t> voxels(n);
    detail::read_exact(is, voxels.data(), n, "binary payload");
    for (auto v : voxels)
      if (v > 1) throw FormatError("binary payload contains a value other than 0/1");
    out = Mask3D(dims, sp, std::move(voxels));
  } else if (flag == static_cast<unsigned char>(DType::labels)) {
    std::vector<unsigned char> raw(n * 4);
    detail::read_exact(is, raw.data(), raw.size(), "label payload");
    std::vector<std::uint32_t> labels(n);
    for (std::size_t i = 0; i < n; ++i) labels[i] = detail::get_u32(&raw[4 * i]);
    out = LabelVolume(dims, sp, std::move(labels));
  } else {
    throw FormatError("unknown dtype flag " + std::to_string(flag));
  }
  if (is.peek() != std::char_traits<char>::eof()) throw FormatError("trailing bytes after payload");
  return out;
}

inline AnyVolume read_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw InputError("cannot open " + path);
  return read(is);
}

inline Mask3D read_mask_file(const std::string& path) {
  auto v = read_file(path);
  if (auto* m = std::get_if<Mask3D>(&v)) return std::move(*m);
  throw FormatError(path + ": expected binary mask (dtype 0), found label volume");
}

inline LabelVolume read_labels_file(const std::string& path) {
  auto v = read_file(path);
  if (auto* l = std::get_if<LabelVolume>(&v)) return std::move(*l);
  throw FormatError(path + ": expected label volume (dtype 1), found binary mask");
}

template <typename V>
void write_file(const std::string& path, const V& vol) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  write(os, vol);
  if (!os) throw std::runtime_error("write failed: " + path);
}

}  // namespace ccm::io
