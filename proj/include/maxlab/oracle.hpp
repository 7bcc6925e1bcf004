#pragma once

#include "maxlab/maximal.hpp"

namespace maxlab {

struct OracleConfig {
  int fine_factor = 4;     // power of 2; 1 reproduces the engine's search space
  bool exhaustive = true;  // no pruning of any kind
  bool use_tables = true;  // cached prefixes; bitwise-identical to rescanning
};

struct OracleResult {
  double value = 0.0;
  BallSpec ball;
};

// Dense scan over all centers on the fine_factor-refined lattice (the single
// center x for the centered operator) and all radii on the fine_factor-refined
// radius grid. Same candidate predicate, value expression and tie-break as the
// engines, so fine_factor=1 matches them bitwise.
OracleResult brute_force_maximal(const GridFunction& f, double alpha, double delta,
                                 const Coord& x, OperatorKind kind, const RadiusGrid& rgrid,
                                 const OracleConfig& config = {});

enum class ClosedFormCase { triangle_center, indicator_right_centered, indicator_right_noncentered };

struct ClosedForm1d {
  double value = 0.0;
  double radius = 0.0;
  double center = 0.0;  // maximizing ball center (z* for the non-centered case)
};

// Analytic maxima for the d=1 reference inputs, alpha in (0,1):
//   triangle f(x)=max(0,1-|x|) at x=0 (centered);
//   indicator of [-1,1] at x=2 (centered and non-centered).
ClosedForm1d closed_form_1d(ClosedFormCase c, double alpha);

// The refined radius list the oracle scans (exposed for tests).
std::vector<double> refine_radii(const RadiusGrid& rgrid, int fine_factor);

}  // namespace maxlab
