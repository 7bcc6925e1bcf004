#pragma once

#include <optional>
#include <string>
#include <vector>

#include "maxlab/ball.hpp"
#include "maxlab/grid.hpp"

namespace maxlab {

enum class OperatorKind { centered, noncentered };

std::string to_string(OperatorKind k);
OperatorKind operator_kind_from_name(const std::string& name);

struct FracParams {
  double alpha = 0.5;
  double delta = 0.0;  // truncation radius, >= 0; radii r >= delta are admissible
  OperatorKind kind = OperatorKind::centered;

  // q = d/(d-alpha), recomputed on demand.
  double conjugate_exponent(int d) const { return d / (d - alpha); }
  void validate(int d) const;
};

// Relative tolerance separating genuine analytic ties from float noise.
inline constexpr double kTieTolerance = 1e-9;

// The recorded maximizer for one grid point, with tie-set metadata. Ties are
// the candidates whose value is >= max * (1 - kTieTolerance).
struct GoodBall {
  std::int64_t center_flat = -1;  // flat index into the source domain, -1 = none
  double radius = 0.0;
  double value = 0.0;
  std::int64_t tie_count = 0;  // 0 when tie tracking was disabled
  double min_tie_radius = 0.0;
  double max_tie_radius = 0.0;
  double minus1 = 0.0;  // max over the tie set of value/radius
};

struct MaximalField {
  FracParams params;
  GridFunction values;  // samples on the evaluation domain
  std::vector<GoodBall> balls;
  RadiusGrid rgrid;
  Domain source_domain;
  Index eval_lo{};  // position of the evaluation box inside the source domain
  bool ties_tracked = false;

  const GoodBall& ball(std::int64_t eval_flat) const {
    return balls[static_cast<std::size_t>(eval_flat)];
  }
  BallSpec ball_spec(std::int64_t eval_flat) const;
  // Source-domain index of an evaluation point.
  Index source_index(std::int64_t eval_flat) const;
};

struct ComputeOptions {
  std::optional<Index> eval_lo;  // inclusive evaluation box; default: full domain
  std::optional<Index> eval_hi;
  const RegionMask* compute_mask = nullptr;  // source-domain mask; skip unflagged points
  bool exhaustive = false;                   // disable the L1 value-bound pruning
  bool with_ties = true;                     // track per-point tie sets
  int workers = 1;
};

// The maximal operator selected by params.kind at truncation params.delta.
MaximalField compute_maximal(const GridFunction& f, const FracParams& params,
                             const RadiusGrid& rgrid, const ComputeOptions& opts = {});

MaximalField centered_maximal(const GridFunction& f, const FracParams& params,
                              const RadiusGrid& rgrid, const ComputeOptions& opts = {});
MaximalField noncentered_maximal(const GridFunction& f, const FracParams& params,
                                 const RadiusGrid& rgrid, const ComputeOptions& opts = {});

// One field per truncation radius (deltas ascending), sharing a single pass
// over the per-point radius profiles. Pointwise antitone in delta.
std::vector<MaximalField> truncated_family(const GridFunction& f, const FracParams& params,
                                           const RadiusGrid& rgrid,
                                           const std::vector<double>& deltas,
                                           const ComputeOptions& opts = {});

// sup over recorded tie-optimal balls of r^(alpha-1) * average(|f|) = value/r;
// requires a delta = 0 field with tie tracking.
GridFunction refined_maximal_minus1(const GridFunction& f, const MaximalField& field);

// Good-ball sidecar ("MFGB", little-endian): per point d int64 center indices,
// float64 radius, float64 value.
void write_good_ball_sidecar(const MaximalField& field, const std::string& path);
struct SidecarEntry {
  std::vector<std::int64_t> center;
  double radius;
  double value;
};
std::vector<SidecarEntry> read_good_ball_sidecar(const std::string& path);

}  // namespace maxlab
