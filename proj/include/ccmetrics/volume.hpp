#pragma once

// Dense 3D volumes on a voxel grid with physical spacing, plus the binary
// morphology used by the degradation simulator.
//
// Layout is row-major over (a, b, c) with c fastest, matching the MASK3D
// on-disk order. Physical coordinate of voxel (a, b, c) is
// (a * sx, b * sy, c * sz).

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ccmetrics/error.hpp"

namespace ccm {

struct Dims {
  std::size_t h = 1;
  std::size_t w = 1;
  std::size_t d = 1;

  std::size_t voxels() const { return h * w * d; }
  friend bool operator==(const Dims&, const Dims&) = default;
};

struct Spacing {
  double x = 1.0;
  double y = 1.0;
  double z = 1.0;

  double max() const { return std::max({x, y, z}); }
  double voxel_volume() const { return x * y * z; }
  friend bool operator==(const Spacing&, const Spacing&) = default;
};

/// Signed voxel index; signed so that offsets and out-of-range probes are
/// representable.
struct Index3 {
  std::ptrdiff_t a = 0;
  std::ptrdiff_t b = 0;
  std::ptrdiff_t c = 0;

  friend bool operator==(const Index3&, const Index3&) = default;
  friend auto operator<=>(const Index3&, const Index3&) = default;
  Index3 operator+(const Index3& o) const { return {a + o.a, b + o.b, c + o.c}; }
  Index3 operator-(const Index3& o) const { return {a - o.a, b - o.b, c - o.c}; }
};

/// Inclusive index box.
struct Box {
  Index3 lo;
  Index3 hi;

  std::ptrdiff_t extent_a() const { return hi.a - lo.a + 1; }
  std::ptrdiff_t extent_b() const { return hi.b - lo.b + 1; }
  std::ptrdiff_t extent_c() const { return hi.c - lo.c + 1; }
  Dims dims() const {
    return {static_cast<std::size_t>(extent_a()), static_cast<std::size_t>(extent_b()),
            static_cast<std::size_t>(extent_c())};
  }
  bool contains(const Index3& i) const {
    return i.a >= lo.a && i.a <= hi.a && i.b >= lo.b && i.b <= hi.b && i.c >= lo.c && i.c <= hi.c;
  }
  void include(const Index3& i) {
    lo = {std::min(lo.a, i.a), std::min(lo.b, i.b), std::min(lo.c, i.c)};
    hi = {std::max(hi.a, i.a), std::max(hi.b, i.b), std::max(hi.c, i.c)};
  }
  Box grown(std::ptrdiff_t margin) const {
    return {{lo.a - margin, lo.b - margin, lo.c - margin}, {hi.a + margin, hi.b + margin, hi.c + margin}};
  }
  friend bool operator==(const Box&, const Box&) = default;
};

inline Box full_box(const Dims& dims) {
  return {{0, 0, 0},
          {static_cast<std::ptrdiff_t>(dims.h) - 1, static_cast<std::ptrdiff_t>(dims.w) - 1,
           static_cast<std::ptrdiff_t>(dims.d) - 1}};
}

inline Box intersect(const Box& x, const Box& y) {
  return {{std::max(x.lo.a, y.lo.a), std::max(x.lo.b, y.lo.b), std::max(x.lo.c, y.lo.c)},
          {std::min(x.hi.a, y.hi.a), std::min(x.hi.b, y.hi.b), std::min(x.hi.c, y.hi.c)}};
}

inline bool empty(const Box& box) {
  return box.hi.a < box.lo.a || box.hi.b < box.lo.b || box.hi.c < box.lo.c;
}

inline void validate_grid(const Dims& dims, const Spacing& spacing) {
  if (dims.h < 1 || dims.w < 1 || dims.d < 1) {
    throw std::invalid_argument("volume dims must all be >= 1");
  }
  for (double s : {spacing.x, spacing.y, spacing.z}) {
    if (!(s > 0.0) || !std::isfinite(s)) {
      throw std::invalid_argument("volume spacing must be positive and finite");
    }
  }
}

template <typename T>
class Volume {
 public:
  using value_type = T;

  Volume() : Volume(Dims{}, Spacing{}) {}

  Volume(Dims dims, Spacing spacing, T fill = T{})
      : dims_(dims), spacing_(spacing), data_((validate_grid(dims, spacing), dims.voxels()), fill) {}

  Volume(Dims dims, Spacing spacing, std::vector<T> data)
      : dims_(dims), spacing_(spacing), data_(std::move(data)) {
    validate_grid(dims_, spacing_);
    if (data_.size() != dims_.voxels()) {
      throw std::invalid_argument("volume payload size does not match dims");
    }
  }

  const Dims& dims() const { return dims_; }
  const Spacing& spacing() const { return spacing_; }
  std::size_t size() const { return data_.size(); }

  std::size_t linear(std::size_t a, std::size_t b, std::size_t c) const {
    return (a * dims_.w + b) * dims_.d + c;
  }
  std::size_t linear(const Index3& i) const {
    return linear(static_cast<std::size_t>(i.a), static_cast<std::size_t>(i.b),
                  static_cast<std::size_t>(i.c));
  }
  Index3 index(std::size_t linear_index) const {
    const auto c = linear_index % dims_.d;
    const auto ab = linear_index / dims_.d;
    return {static_cast<std::ptrdiff_t>(ab / dims_.w), static_cast<std::ptrdiff_t>(ab % dims_.w),
            static_cast<std::ptrdiff_t>(c)};
  }
  bool in_bounds(const Index3& i) const {
    return i.a >= 0 && i.b >= 0 && i.c >= 0 && static_cast<std::size_t>(i.a) < dims_.h &&
           static_cast<std::size_t>(i.b) < dims_.w && static_cast<std::size_t>(i.c) < dims_.d;
  }

  T& operator()(std::size_t a, std::size_t b, std::size_t c) { return data_[linear(a, b, c)]; }
  const T& operator()(std::size_t a, std::size_t b, std::size_t c) const {
    return data_[linear(a, b, c)];
  }
  T& operator[](const Index3& i) { return data_[linear(i)]; }
  const T& operator[](const Index3& i) const { return data_[linear(i)]; }
  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  std::span<T> values() { return data_; }
  std::span<const T> values() const { return data_; }

  bool same_grid(const auto& other) const {
    return dims_ == other.dims() && spacing_ == other.spacing();
  }

  /// Physical diagonal of the image extent, used as the worst-case distance.
  double physical_diagonal() const {
    const double x = static_cast<double>(dims_.h) * spacing_.x;
    const double y = static_cast<double>(dims_.w) * spacing_.y;
    const double z = static_cast<double>(dims_.d) * spacing_.z;
    return std::sqrt(x * x + y * y + z * z);
  }

  friend bool operator==(const Volume&, const Volume&) = default;

 private:
  Dims dims_;
  Spacing spacing_;
  std::vector<T> data_;
};

using Mask3D = Volume<std::uint8_t>;
using LabelVolume = Volume<std::uint32_t>;

inline void require_same_grid(const auto& x, const auto& y) {
  if (x.dims() != y.dims()) {
    throw DimensionMismatch("dims differ");
  }
  if (x.spacing() != y.spacing()) {
    throw DimensionMismatch("spacing differs");
  }
}

/// Builds a binary mask from raw values, rejecting anything other than 0/1.
inline Mask3D make_mask(Dims dims, Spacing spacing, std::vector<std::uint8_t> voxels) {
  for (auto v : voxels) {
    if (v > 1) throw std::invalid_argument("binary mask voxels must be 0 or 1");
  }
  return Mask3D(dims, spacing, std::move(voxels));
}

/// Calls fn(a, b, c) for every voxel of box in raster order.
template <typename Fn>
void for_each_index(const Box& box, Fn&& fn) {
  for (std::ptrdiff_t a = box.lo.a; a <= box.hi.a; ++a)
    for (std::ptrdiff_t b = box.lo.b; b <= box.hi.b; ++b)
      for (std::ptrdiff_t c = box.lo.c; c <= box.hi.c; ++c) fn(Index3{a, b, c});
}

/// Copies the part of box that lies inside the source; outside voxels are
/// filled with T{}. The result's index (0,0,0) corresponds to box.lo.
template <typename T>
Volume<T> crop(const Volume<T>& src, const Box& box) {
  Volume<T> out(box.dims(), src.spacing());
  const Box inside = intersect(box, full_box(src.dims()));
  if (empty(inside)) return out;
  for_each_index(inside, [&](const Index3& i) { out[i - box.lo] = src[i]; });
  return out;
}

/// Writes every nonzero voxel of local (placed at offset) into dst, clipping
/// at the borders of dst.
template <typename T>
void paste_nonzero(Volume<T>& dst, const Volume<T>& local, const Index3& offset, T value) {
  for_each_index(full_box(local.dims()), [&](const Index3& i) {
    if (local[i] == T{}) return;
    const Index3 g = i + offset;
    if (dst.in_bounds(g)) dst[g] = value;
  });
}

inline std::size_t count(const Mask3D& mask) {
  return static_cast<std::size_t>(std::count(mask.values().begin(), mask.values().end(), 1));
}

inline Mask3D logical_and(const Mask3D& x, const Mask3D& y) {
  require_same_grid(x, y);
  Mask3D out(x.dims(), x.spacing());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] & y[i];
  return out;
}

inline Mask3D logical_or(const Mask3D& x, const Mask3D& y) {
  require_same_grid(x, y);
  Mask3D out(x.dims(), x.spacing());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] | y[i];
  return out;
}

inline Mask3D logical_not(const Mask3D& x) {
  Mask3D out(x.dims(), x.spacing());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] ^ 1;
  return out;
}

/// x AND NOT y
inline Mask3D logical_andnot(const Mask3D& x, const Mask3D& y) {
  require_same_grid(x, y);
  Mask3D out(x.dims(), x.spacing());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] & (y[i] ^ 1);
  return out;
}

// ---------------------------------------------------------------------------
// Morphology

enum class ElementKind { cross6, cube26 };

/// cross6 of radius r is the L1 ball {|da|+|db|+|dc| <= r}, i.e. r iterated
/// face-neighbour steps; cube26 of radius r is the Chebyshev ball.
struct StructuringElement {
  ElementKind kind = ElementKind::cross6;
  int radius = 1;

  std::vector<Index3> offsets() const {
    if (radius < 1) throw std::invalid_argument("structuring element radius must be >= 1");
    std::vector<Index3> out;
    for (int a = -radius; a <= radius; ++a)
      for (int b = -radius; b <= radius; ++b)
        for (int c = -radius; c <= radius; ++c) {
          const bool keep = kind == ElementKind::cube26
                                ? true
                                : std::abs(a) + std::abs(b) + std::abs(c) <= radius;
          if (keep) out.push_back({a, b, c});
        }
    return out;
  }
};

inline std::string to_string(ElementKind kind) {
  return kind == ElementKind::cross6 ? "cross6" : "cube26";
}

inline ElementKind element_kind_from_string(const std::string& s) {
  if (s == "cross6") return ElementKind::cross6;
  if (s == "cube26") return ElementKind::cube26;
  throw std::invalid_argument("unknown structuring element: " + s);
}

namespace detail {

// Shared kernel for erosion/dilation. Out-of-bounds neighbours count as 0.
inline Mask3D morph(const Mask3D& mask, const StructuringElement& elem, bool erode) {
  const auto offs = elem.offsets();
  Mask3D out(mask.dims(), mask.spacing());
  const Box all = full_box(mask.dims());
  // Interior voxels (whole neighbourhood in bounds) skip the bounds test.
  const Box interior = all.grown(-elem.radius);
  std::vector<std::ptrdiff_t> lin;
  lin.reserve(offs.size());
  const auto w = static_cast<std::ptrdiff_t>(mask.dims().w);
  const auto d = static_cast<std::ptrdiff_t>(mask.dims().d);
  for (const auto& o : offs) lin.push_back((o.a * w + o.b) * d + o.c);

  for_each_index(all, [&](const Index3& i) {
    const std::size_t li = mask.linear(i);
    if (erode && mask[li] == 0) return;
    if (!erode && mask[li] == 1) {
      out[li] = 1;
      return;
    }
    bool hit = false;
    if (!empty(interior) && interior.contains(i)) {
      for (auto off : lin) {
        const bool set = mask[static_cast<std::size_t>(static_cast<std::ptrdiff_t>(li) + off)] != 0;
        if (erode ? !set : set) {
          hit = true;
          break;
        }
      }
    } else {
      for (const auto& o : offs) {
        const Index3 n = i + o;
        const bool set = mask.in_bounds(n) && mask[n] != 0;
        if (erode ? !set : set) {
          hit = true;
          break;
        }
      }
    }
    out[li] = erode ? (hit ? 0 : 1) : (hit ? 1 : 0);
  });
  return out;
}

}  // namespace detail

inline Mask3D erode(const Mask3D& mask, const StructuringElement& elem = {}) {
  return detail::morph(mask, elem, true);
}

inline Mask3D dilate(const Mask3D& mask, const StructuringElement& elem = {}) {
  return detail::morph(mask, elem, false);
}

/// Translates every set voxel by offset; voxels leaving the grid are dropped.
inline Mask3D shift(const Mask3D& mask, const Index3& offset) {
  Mask3D out(mask.dims(), mask.spacing());
  for_each_index(full_box(mask.dims()), [&](const Index3& i) {
    if (mask[i] == 0) return;
    const Index3 t = i + offset;
    if (out.in_bounds(t)) out[t] = 1;
  });
  return out;
}

}  // namespace ccm
