#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "maxlab/maximal.hpp"
#include "maxlab/verify.hpp"

namespace maxlab {

enum class SequenceKind { additive_bump, mollify, translate };

std::string to_string(SequenceKind k);
SequenceKind sequence_kind_from_name(const std::string& name);

// W^{1,1}-convergent perturbation family f_j -> f with magnitude law 1/j.
struct SequenceSpec {
  SequenceKind kind = SequenceKind::additive_bump;
  std::vector<int> j_values = {1, 2, 4, 8, 16, 32};
  std::optional<Coord> bump_center;  // additive bump location; default: argmax of f
  double bump_sigma = 0.2;
};

// additive_bump: f + g/j for a fixed unit-W11 bump g; mollify: separable
// gaussian kernel of support radius 1/j; translate: shift by 1/j along axis 0,
// snapped to the grid.
std::vector<GridFunction> make_sequence(const GridFunction& f, const SequenceSpec& spec);

struct TriangleRow {
  int j = 0;
  double delta = 0.0;
  double term1 = 0.0, term2 = 0.0, term3 = 0.0;
  double direct = 0.0;
};

struct SmallRadiusRow {
  double delta = 0.0;
  double measure_E = 0.0;
  double measure_D = 0.0;
};

struct ContinuityRun {
  FracParams params;
  SequenceKind kind = SequenceKind::additive_bump;
  std::vector<int> j_values;
  std::vector<double> w11_gap, e_j, modulus_gap, tail_j;
  std::vector<double> deltas;       // descending
  std::vector<double> delta_curve;  // ||grad M f - grad M^d f||_q(K) per delta
  std::vector<TriangleRow> triangle;
  std::vector<SmallRadiusRow> small_radius;
  double tau_floor = 0.0;
  double lambda0 = 0.0;
  double min_K_maximal = 0.0;
  double tau_ineq_used = 0.0;
  double c_emp = 0.0;  // |D| / delta^(d/(d-a)) fitted at the largest delta
};

struct ContinuityConfig {
  SequenceSpec seq;
  double alpha = 0.5;
  OperatorKind kind = OperatorKind::centered;
  std::optional<RegionMask> K;  // default: support-hugging box of f
  std::vector<double> deltas = {1.0, 0.5, 0.25, 0.125};  // descending
  double c = 2.0;       // dilation constant for the D sets
  int j_for_sets = 8;   // which f_j feeds the small-radius machinery
  int workers = 1;
  // Rebuilds f at a finer spacing for the tau_floor estimate; tau_floor = 0 when absent.
  std::function<GridFunction(double)> maker;
  // Explicit perturbation family (per j_values); replaces make_sequence.
  std::optional<std::vector<GridFunction>> sequence_override;
};

// Full experiment driver: every column of ContinuityRun.
ContinuityRun run_continuity(const GridFunction& f, const ContinuityConfig& cfg);

// Named decay/shape assertions over a finished run (the cmd_continuity gate).
std::vector<std::pair<std::string, bool>> continuity_assertions(const ContinuityRun& run);

// ---------------------------------------------------------------------------
// Individual operations (also reachable through run_continuity)
// ---------------------------------------------------------------------------

// ||grad M_a f - grad M^d_a f||_{L^q(K)} per delta (descending list).
std::vector<double> delta_convergence_curve(const GridFunction& f, double alpha,
                                            const RegionMask& K, const std::vector<double>& deltas,
                                            const RadiusGrid& rgrid, OperatorKind kind,
                                            int workers = 1);

struct DeltaDecomposition {
  double term1 = 0.0, term2 = 0.0, term3 = 0.0, direct = 0.0;
};

DeltaDecomposition delta_decomposition(const GridFunction& f, const GridFunction& f_j,
                                       double alpha, double delta, const RegionMask& K,
                                       const RadiusGrid& rgrid, OperatorKind kind,
                                       int workers = 1);

struct Lambda0 {
  double lambda0 = 0.0;
  BallSpec ball;  // the half-mass ball B0 containing K
};

Lambda0 lambda0_estimate(const GridFunction& f, const RegionMask& K, double alpha);

struct SmallRadiusSets {
  RegionMask E;  // points of K whose whole tie set has radius < delta and value > lambda0
  RegionMask D;  // union of the c-dilated recorded good balls over E
  double measure_E = 0.0;
  double measure_D = 0.0;
};

SmallRadiusSets small_radius_sets(const MaximalField& field_j, double lambda0,
                                  const RegionMask& K, double delta, double c);

// || |f_j| - |f| ||_W11 per j; enforces the function-level reverse triangle.
std::vector<double> modulus_convergence(const GridFunction& f,
                                        const std::vector<GridFunction>& seq);

// ||grad M_a f_j - grad M_a f||_{L^q((3K)^c within the box)} per j.
std::vector<double> tail_errors(const GridFunction& f, const std::vector<GridFunction>& seq,
                                double alpha, const RegionMask& K, const RadiusGrid& rgrid,
                                OperatorKind kind, int workers = 1);

}  // namespace maxlab
