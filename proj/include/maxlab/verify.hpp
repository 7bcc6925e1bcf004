#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "maxlab/calculus.hpp"
#include "maxlab/maximal.hpp"

namespace maxlab {

// Per-check statistics. `pass` always means max_violation <= tolerance_used;
// what "violation" measures is documented per check below. Quantiles are of
// the signed per-point slack (positive = inequality failed by that margin).
struct CheckReport {
  std::string check_name;
  std::int64_t points_tested = 0;
  std::int64_t ties_excluded = 0;
  double max_violation = 0.0;
  double q50 = 0.0, q90 = 0.0, q99 = 0.0, q100 = 0.0;
  double tolerance_used = 0.0;
  bool pass = false;
  std::vector<std::pair<std::string, double>> stats;

  double stat(const std::string& name) const;
};

// Pointwise a.e. inequalities cannot hold exactly on a grid; the tolerance
// C_tol*(h + h/rbar) vanishes with h and blows up where good balls are tiny.
inline constexpr double kCTol = 5.0;
inline double tau_ineq(double h, double rbar) { return kCTol * (h + h / rbar); }

struct VerifyOptions {
  OperatorKind kind = OperatorKind::centered;
  int workers = 1;
  std::optional<RegionMask> region;  // tested region; default: support-hugging box
};

// Smallest axis box containing {|f| > 1e-3 max|f|}, inflated by 10%.
RegionMask default_region(const GridFunction& f);

// Default radius grid reaching every evaluation point of f's box.
RadiusGrid make_rgrid_for(const GridFunction& f, double rho_step = 1.0 / 16.0);

// |grad M_a f| <= M_a|grad f| (pointwise slack; pass on the max).
CheckReport check_kinnunen(const GridFunction& f, double alpha, const RadiusGrid& rgrid,
                           const VerifyOptions& opts = {});

// |grad M^d_a f| <= (d-a) r^(a-1) avg_B|f| at the recorded good ball, plus the
// corollary chain rhs <= (d-a) * minus1 + 1e-12 (stat "chain_max_violation").
CheckReport check_refined_ks(const GridFunction& f, double alpha, double delta,
                             const RadiusGrid& rgrid, const VerifyOptions& opts = {});

// Vector residual |grad M^d_a f - r^a avg_B grad|f||; max_violation is the
// 90th-percentile residual (the per-check pass statistic).
CheckReport check_luiro(const GridFunction& f, double alpha, double delta,
                        const RadiusGrid& rgrid, const VerifyOptions& opts = {});

// Good-ball property c^a avg_cB|f| < avg_B|f| (slack; pass on the max) and the
// empirical Poincare ratio avg_cB|f| / (r avg_cB|grad f|) (stat "ratio_max").
CheckReport check_poincare(const GridFunction& f, double alpha, double c,
                           const RadiusGrid& rgrid, const VerifyOptions& opts = {});

// ||grad M_a f||_{q, region} / ||grad f||_1 with q = d/(d-alpha).
double check_sobolev_ratio(const GridFunction& f, double alpha, const RadiusGrid& rgrid,
                           const VerifyOptions& opts = {});

// Weak (1, d/(d-a)) constant of the non-centered operator over a log t-grid;
// stats "W", "W_doubled"; pass when doubling the t-grid moves W by <= 5%.
CheckReport check_weak_type(const GridFunction& g, double alpha, const RadiusGrid& rgrid,
                            const VerifyOptions& opts = {});

// |grad M^d_a f| <= ||grad|f|||_1 / (omega_d delta^(d-a)), delta > 0.
CheckReport check_delta_gradient_bound(const GridFunction& f, double alpha, double delta,
                                       const RadiusGrid& rgrid, const VerifyOptions& opts = {});

// M_a f(2x) scaling covariance on the matched half-spacing grid (exact search
// space bijection; tolerance 1e-12 relative).
CheckReport check_scaling_covariance(const GridFunction& f, double alpha,
                                     const RadiusGrid& rgrid, const VerifyOptions& opts = {});

// Lower empirical quantile of an unsorted sample (deterministic: full sort).
double quantile(std::vector<double> sample, double q);

}  // namespace maxlab
