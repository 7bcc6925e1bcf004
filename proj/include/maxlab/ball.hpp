#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "maxlab/grid.hpp"

namespace maxlab {

// Volume of the d-dimensional unit ball.
double unit_ball_volume(int d);

struct BallSpec {
  Coord center{};
  double radius = 0.0;
};

// Strictly increasing physical radii discretizing the supremum variable.
struct RadiusGrid {
  std::vector<double> radii;
  std::vector<double> radii_sq;  // radii[k]*radii[k], the canonical membership threshold
  double h_link = 0.0;
  double rho_step = 1.0 / 16.0;  // bound on consecutive ratios: r[k+1]/r[k] <= 1+rho_step

  std::size_t size() const { return radii.size(); }
  // First index with radii[k] >= s (radii.size() if none).
  std::size_t index_at_least(double s) const;
  std::size_t index_at_least_sq(double s2) const;
  void validate() const;
};

// h, 2h, ..., 16h, then geometric with ratio 1+rho_step, ending exactly at r_max.
RadiusGrid make_default_radius_grid(double h, double r_max, double rho_step = 1.0 / 16.0);
// h, 2h, 3h, ... up to r_max (rho_step = 1).
RadiusGrid make_linear_radius_grid(double h, double r_max);

// Index bounding box of the nonzero samples; false if f is identically zero.
bool support_bbox(const GridFunction& f, Index& lo, Index& hi);

// Largest distance from any point of the index box `eval` to any support point
// of f, plus 2h: past this radius every ball centered in `eval` contains the
// whole support. Returns 0 for f == 0.
double required_max_radius(const GridFunction& f, const Index& eval_lo, const Index& eval_hi);
double required_max_radius(const GridFunction& f);

// ---------------------------------------------------------------------------
// Discrete balls.
//
// The stencil of B(z, r) is the set of infinite-lattice points y (coordinates
// origin + i*h, any integer i) with dist2(y, z) <= r*r, where dist2 accumulates
// squared per-axis differences in axis order. Averages divide the sum of the
// in-box samples (extension by zero) by the full lattice count.
//
// Sums follow one canonical order: per line along the last axis, the span sum
// is the difference of two left-to-right running prefixes; line totals are
// accumulated in lexicographic order of the leading indices. The accelerated
// path reads cached prefixes, the naive path recomputes them by scanning, so
// the two return bitwise-identical values.
// ---------------------------------------------------------------------------

struct BallSum {
  double sum = 0.0;        // sum of in-box samples in the stencil
  std::int64_t count = 0;  // lattice points in the stencil (including out-of-box)
};

// Cached per-line prefix sums along the last axis (size n_last+1 per line).
class LineSumTable {
 public:
  LineSumTable(const Domain& dom, std::span<const double> values);
  const Domain& domain() const { return dom_; }
  std::span<const double> line(std::int64_t line_index) const;

 private:
  Domain dom_;
  std::int64_t line_len_ = 0;
  std::vector<double> prefix_;
};

// Canonical stencil walk. `table` may be null (naive path, same result).
BallSum ball_sum_raw(const Domain& dom, std::span<const double> values,
                     const LineSumTable* table, const Coord& center, double r);

// Lattice point count of B(center, r) only.
std::int64_t lattice_count(const Domain& dom, const Coord& center, double r);

// ---------------------------------------------------------------------------

struct AverageMode {
  enum Kind { abs_value, signed_value, gradient_component } kind = abs_value;
  int component = 0;

  static AverageMode absolute() { return {abs_value, 0}; }
  static AverageMode raw() { return {signed_value, 0}; }
  static AverageMode gradient(int i) { return {gradient_component, i}; }
};

// Naive reference path: throws errc::empty_stencil when no lattice point is inside.
double ball_average(const GridFunction& f, const BallSpec& ball, AverageMode mode);

// Acceleration structure over one function: per-mode value grids plus their
// line prefix tables, built on first use.
class BallAverager {
 public:
  explicit BallAverager(const GridFunction& f);
  ~BallAverager();
  BallAverager(BallAverager&&) noexcept;

  double average(const BallSpec& ball, AverageMode mode) const;
  BallSum sum(const BallSpec& ball, AverageMode mode) const;
  const GridFunction& source() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// ---------------------------------------------------------------------------

// H(z, s) = max over radii r_k >= s of r_k^alpha * average(|f|, B(z, r_k));
// nonincreasing in s, 0 beyond the largest radius.
struct SuffixMaxProfile {
  std::vector<double> radii;
  std::vector<double> values;  // suffix maxima

  double eval(double s) const;
};

SuffixMaxProfile suffix_max_profile(const GridFunction& f, const Index& center, double alpha,
                                    const RadiusGrid& rgrid);

}  // namespace maxlab
