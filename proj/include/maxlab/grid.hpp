#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "maxlab/errors.hpp"

namespace maxlab {

inline constexpr int kMaxDim = 8;

using Index = std::array<std::int64_t, kMaxDim>;
using Coord = std::array<double, kMaxDim>;

// Uniform isotropic grid over an axis-aligned box. The physical coordinate of
// index i is origin + i*h componentwise; samples outside the box are read as 0
// (extension by zero).
struct Domain {
  int d = 1;
  std::array<std::int64_t, kMaxDim> dims{};
  double h = 1.0;
  Coord origin{};

  std::int64_t size() const {
    std::int64_t n = 1;
    for (int a = 0; a < d; ++a) n *= dims[a];
    return n;
  }
  double coord(int axis, std::int64_t i) const { return origin[axis] + static_cast<double>(i) * h; }
  Coord point(const Index& idx) const {
    Coord c{};
    for (int a = 0; a < d; ++a) c[a] = coord(a, idx[a]);
    return c;
  }
  // Row-major: the last axis varies fastest.
  std::int64_t flat(const Index& idx) const {
    std::int64_t f = 0;
    for (int a = 0; a < d; ++a) f = f * dims[a] + idx[a];
    return f;
  }
  Index unflat(std::int64_t f) const {
    Index idx{};
    for (int a = d - 1; a >= 0; --a) {
      idx[a] = f % dims[a];
      f /= dims[a];
    }
    return idx;
  }
  bool contains(const Index& idx) const {
    for (int a = 0; a < d; ++a)
      if (idx[a] < 0 || idx[a] >= dims[a]) return false;
    return true;
  }
  double side(int axis) const { return static_cast<double>(dims[axis] - 1) * h; }

  void validate() const;
  bool operator==(const Domain& o) const;
};

// Box [lo, lo + (n-1)h]^d with n points per axis.
Domain make_domain(int d, std::int64_t n_per_axis, double h, double lo);

struct GridFunction {
  Domain domain;
  std::vector<double> values;  // row-major, one per grid point

  double& at(const Index& idx) { return values[static_cast<std::size_t>(domain.flat(idx))]; }
  double at(const Index& idx) const { return values[static_cast<std::size_t>(domain.flat(idx))]; }
  // Extension-by-zero read at an arbitrary lattice index.
  double at_or_zero(const Index& idx) const {
    return domain.contains(idx) ? at(idx) : 0.0;
  }
  void validate() const;
};

GridFunction make_zero(const Domain& dom);

// One flag per grid point of `domain`.
struct RegionMask {
  Domain domain;
  std::vector<std::uint8_t> flags;

  std::int64_t count() const;
  double measure() const;  // count * h^d
  bool test(std::int64_t flat) const { return flags[static_cast<std::size_t>(flat)] != 0; }
};

RegionMask full_mask(const Domain& dom);
// Mask of the closed index box [lo, hi] (componentwise, clipped to the domain).
RegionMask box_mask(const Domain& dom, const Index& lo, const Index& hi);
RegionMask box_mask_physical(const Domain& dom, const Coord& lo, const Coord& hi);
RegionMask complement(const RegionMask& m);
RegionMask intersect(const RegionMask& a, const RegionMask& b);
// Concentric dilation cE of a box-shaped mask (bounding box scaled about its center).
RegionMask dilate_box(const RegionMask& m, double factor);
// Index bounding box of the set flags; false if empty.
bool mask_bbox(const RegionMask& m, Index& lo, Index& hi);

// ---------------------------------------------------------------------------
// Test corpus
// ---------------------------------------------------------------------------

enum class TestFunctionKind { triangle, indicator_ball, gaussian_bump, two_bumps };

struct ShapeParams {
  Coord center{};          // shape center
  double sigma = 0.25;     // gaussian width
  double amplitude = 1.0;
  double radius = 1.0;     // indicator ball radius
  double separation = 1.0; // two_bumps: distance between centers (along axis 0)
  double second_amplitude = 1.0;
};

// Relative amplitude below which the gaussian shapes are truncated to exactly 0.
inline constexpr double kTruncationLevel = 1e-12;

GridFunction make_test_function(TestFunctionKind kind, const Domain& dom,
                                const ShapeParams& params = {});

TestFunctionKind test_function_kind_from_name(const std::string& name);
std::string to_string(TestFunctionKind kind);

// ---------------------------------------------------------------------------
// File I/O: binary "MFG1" (little-endian), with a '#'-headed CSV alternative
// accepted on input (auto-detected by magic).
// ---------------------------------------------------------------------------

GridFunction read_grid(const std::string& path);
void write_grid(const GridFunction& f, const std::string& path);

}  // namespace maxlab
