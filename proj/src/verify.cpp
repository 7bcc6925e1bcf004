#include "maxlab/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace maxlab {

double CheckReport::stat(const std::string& name) const {
  for (const auto& [k, v] : stats)
    if (k == name) return v;
  fail(errc::bad_argument, "no such stat: " + name);
}

double quantile(std::vector<double> sample, double q) {
  require(!sample.empty(), errc::bad_argument, "empty sample");
  std::sort(sample.begin(), sample.end());
  auto n = static_cast<double>(sample.size());
  auto i = static_cast<std::int64_t>(std::ceil(q * n)) - 1;
  i = std::clamp<std::int64_t>(i, 0, static_cast<std::int64_t>(sample.size()) - 1);
  return sample[static_cast<std::size_t>(i)];
}

RegionMask default_region(const GridFunction& f) {
  double m = 0.0;
  for (double v : f.values) m = std::max(m, std::abs(v));
  if (m == 0.0) return full_mask(f.domain);
  RegionMask above;
  above.domain = f.domain;
  above.flags.assign(f.values.size(), 0);
  for (std::size_t i = 0; i < f.values.size(); ++i)
    above.flags[i] = std::abs(f.values[i]) > 1e-3 * m ? 1 : 0;
  return dilate_box(above, 1.1);
}

RadiusGrid make_rgrid_for(const GridFunction& f, double rho_step) {
  double r = required_max_radius(f);
  if (r <= 0.0) r = f.domain.h * 32;
  return make_default_radius_grid(f.domain.h, r, rho_step);
}

namespace {

// Evaluation plumbing shared by the pointwise checks: the field is computed on
// the region's bounding box padded by two cells, and the tested points are the
// region points two cells deep inside it (central differences all around).
struct CheckSetup {
  RegionMask region;
  Index elo{}, ehi{};
  Domain edom;
  ComputeOptions copts;
  std::vector<std::int64_t> tested_eval;  // flat indices in the eval domain
};

CheckSetup make_setup(const GridFunction& f, const VerifyOptions& opts, int pad = 2) {
  CheckSetup s;
  s.region = opts.region ? *opts.region : default_region(f);
  require(s.region.domain == f.domain, errc::bad_argument, "region domain mismatch");
  Index rlo{}, rhi{};
  require(mask_bbox(s.region, rlo, rhi), errc::bad_argument, "empty test region");
  const Domain& dom = f.domain;
  for (int a = 0; a < dom.d; ++a) {
    s.elo[a] = std::max<std::int64_t>(0, rlo[a] - pad);
    s.ehi[a] = std::min<std::int64_t>(dom.dims[a] - 1, rhi[a] + pad);
  }
  s.edom = dom;
  for (int a = 0; a < dom.d; ++a) {
    s.edom.dims[a] = s.ehi[a] - s.elo[a] + 1;
    s.edom.origin[a] = dom.coord(a, s.elo[a]);
  }
  s.copts.eval_lo = s.elo;
  s.copts.eval_hi = s.ehi;
  s.copts.workers = opts.workers;

  for (std::int64_t ef = 0; ef < s.edom.size(); ++ef) {
    Index idx = s.edom.unflat(ef);
    bool interior = true;
    for (int a = 0; a < dom.d; ++a)
      interior = interior && idx[a] >= pad && idx[a] <= s.edom.dims[a] - 1 - pad;
    if (!interior) continue;
    Index src = idx;
    for (int a = 0; a < dom.d; ++a) src[a] += s.elo[a];
    if (s.region.test(dom.flat(src))) s.tested_eval.push_back(ef);
  }
  require(!s.tested_eval.empty(), errc::bad_argument, "test region has no interior points");
  return s;
}

double rbar_of(const MaximalField& field, const std::vector<std::int64_t>& tested) {
  std::vector<double> radii;
  radii.reserve(tested.size());
  for (auto ef : tested) radii.push_back(field.ball(ef).radius);
  return quantile(std::move(radii), 0.10);
}


void fill_quantiles(CheckReport& rep, std::vector<double> slack) {
  if (slack.empty()) {
    // Every tested point was excluded (a tie at every point happens only for
    // degenerate inputs); the check is vacuous.
    rep.q50 = rep.q90 = rep.q99 = rep.q100 = 0.0;
    return;
  }
  rep.q50 = quantile(slack, 0.50);
  rep.q90 = quantile(slack, 0.90);
  rep.q99 = quantile(slack, 0.99);
  rep.q100 = quantile(std::move(slack), 1.00);
}

double violating_fraction(const std::vector<double>& slack, double tol) {
  if (slack.empty()) return 0.0;
  std::int64_t viol = 0;
  for (double v : slack) viol += v > tol;
  return static_cast<double>(viol) / static_cast<double>(slack.size());
}

}  // namespace

CheckReport check_kinnunen(const GridFunction& f, double alpha, const RadiusGrid& rgrid,
                           const VerifyOptions& opts) {
  CheckSetup s = make_setup(f, opts);
  FracParams params{alpha, 0.0, opts.kind};
  MaximalField field = compute_maximal(f, params, rgrid, s.copts);
  GridFunction lhs = gradient(field.values).magnitude();

  GridFunction gmag = gradient(f).magnitude();
  MaximalField rhs_field = compute_maximal(gmag, params, rgrid, s.copts);

  CheckReport rep;
  rep.check_name = "kinnunen";
  std::vector<double> slack;
  slack.reserve(s.tested_eval.size());
  for (auto ef : s.tested_eval) {
    if (field.ball(ef).tie_count > 1) {
      ++rep.ties_excluded;
      continue;
    }
    slack.push_back(lhs.values[static_cast<std::size_t>(ef)] -
                    rhs_field.values.values[static_cast<std::size_t>(ef)]);
  }
  rep.points_tested = static_cast<std::int64_t>(slack.size());
  double rbar = rbar_of(field, s.tested_eval);
  rep.tolerance_used = tau_ineq(f.domain.h, rbar);
  fill_quantiles(rep, slack);
  rep.max_violation = rep.q100;
  rep.pass = rep.max_violation <= rep.tolerance_used;
  rep.stats = {{"rbar", rbar},
               {"violating_fraction", violating_fraction(slack, rep.tolerance_used)}};
  return rep;
}

CheckReport check_refined_ks(const GridFunction& f, double alpha, double delta,
                             const RadiusGrid& rgrid, const VerifyOptions& opts) {
  require(delta >= 0.0, errc::bad_argument, "delta must be >= 0");
  CheckSetup s = make_setup(f, opts);
  FracParams params{alpha, 0.0, opts.kind};
  std::vector<double> deltas{0.0};
  if (delta > 0.0) deltas.push_back(delta);
  std::vector<MaximalField> fam = truncated_family(f, params, rgrid, deltas, s.copts);
  const MaximalField& base = fam.front();
  const MaximalField& fieldd = fam.back();
  GridFunction minus1 = refined_maximal_minus1(f, base);
  GridFunction lhs = gradient(fieldd.values).magnitude();

  const double d_minus_alpha = static_cast<double>(f.domain.d) - alpha;
  CheckReport rep;
  rep.check_name = "refined_ks";
  std::vector<double> slack;
  double chain_max = -std::numeric_limits<double>::infinity();
  for (auto ef : s.tested_eval) {
    const GoodBall& gb = fieldd.ball(ef);
    double rhs = d_minus_alpha * (gb.value / gb.radius);
    chain_max = std::max(
        chain_max, rhs - d_minus_alpha * minus1.values[static_cast<std::size_t>(ef)]);
    if (gb.tie_count > 1) {
      ++rep.ties_excluded;
      continue;
    }
    slack.push_back(lhs.values[static_cast<std::size_t>(ef)] - rhs);
  }
  rep.points_tested = static_cast<std::int64_t>(slack.size());
  double rbar = rbar_of(fieldd, s.tested_eval);
  rep.tolerance_used = tau_ineq(f.domain.h, rbar);
  fill_quantiles(rep, slack);
  rep.max_violation = rep.q100;
  rep.pass = rep.max_violation <= rep.tolerance_used;
  rep.stats = {{"rbar", rbar},
               {"violating_fraction", violating_fraction(slack, rep.tolerance_used)},
               {"chain_max_violation", chain_max}};
  return rep;
}

CheckReport check_luiro(const GridFunction& f, double alpha, double delta,
                        const RadiusGrid& rgrid, const VerifyOptions& opts) {
  CheckSetup s = make_setup(f, opts);
  FracParams params{alpha, delta, opts.kind};
  MaximalField field = compute_maximal(f, params, rgrid, s.copts);
  GradientField gradM = gradient(field.values);

  GradientField gmod = gradient_of_modulus(f);
  std::vector<LineSumTable> tables;
  tables.reserve(static_cast<std::size_t>(f.domain.d));
  for (int a = 0; a < f.domain.d; ++a)
    tables.emplace_back(f.domain, gmod.components[static_cast<std::size_t>(a)]);

  CheckReport rep;
  rep.check_name = "luiro";
  std::vector<double> residual;
  for (auto ef : s.tested_eval) {
    const GoodBall& gb = field.ball(ef);
    if (gb.tie_count > 1) {
      ++rep.ties_excluded;
      continue;
    }
    BallSpec B = field.ball_spec(ef);
    double powr = std::pow(B.radius, alpha);
    double r2 = 0.0;
    for (int a = 0; a < f.domain.d; ++a) {
      BallSum bs = ball_sum_raw(f.domain, gmod.components[static_cast<std::size_t>(a)],
                                &tables[static_cast<std::size_t>(a)], B.center, B.radius);
      double avg = bs.count > 0 ? bs.sum / static_cast<double>(bs.count) : 0.0;
      double t = gradM.components[static_cast<std::size_t>(a)][static_cast<std::size_t>(ef)] -
                 powr * avg;
      r2 += t * t;
    }
    residual.push_back(std::sqrt(r2));
  }
  rep.points_tested = static_cast<std::int64_t>(residual.size());
  double rbar = rbar_of(field, s.tested_eval);
  rep.tolerance_used = tau_ineq(f.domain.h, rbar);
  fill_quantiles(rep, residual);
  rep.max_violation = rep.q90;  // the per-check pass statistic
  rep.pass = rep.max_violation <= rep.tolerance_used;
  rep.stats = {{"rbar", rbar}};
  return rep;
}

CheckReport check_poincare(const GridFunction& f, double alpha, double c,
                           const RadiusGrid& rgrid, const VerifyOptions& opts) {
  require(c > 1.0, errc::bad_argument, "need c > 1");
  CheckSetup s = make_setup(f, opts);
  FracParams params{alpha, 0.0, opts.kind};
  MaximalField field = compute_maximal(f, params, rgrid, s.copts);

  BallAverager avg_f(f);
  GridFunction gmag = gradient(f).magnitude();
  BallAverager avg_g(gmag);

  CheckReport rep;
  rep.check_name = "poincare";
  std::vector<double> slack;
  double ratio_max = 0.0;
  std::int64_t zero_den = 0;
  const double calpha = std::pow(c, alpha);
  for (auto ef : s.tested_eval) {
    BallSpec B = field.ball_spec(ef);
    BallSpec cB{B.center, c * B.radius};
    double a_b = avg_f.average(B, AverageMode::absolute());
    double a_cb = avg_f.average(cB, AverageMode::absolute());
    slack.push_back(calpha * a_cb - a_b);
    double den = B.radius * avg_g.average(cB, AverageMode::absolute());
    if (den == 0.0) {
      ++zero_den;
      continue;
    }
    ratio_max = std::max(ratio_max, a_cb / den);
  }
  rep.points_tested = static_cast<std::int64_t>(slack.size());
  double rbar = rbar_of(field, s.tested_eval);
  rep.tolerance_used = tau_ineq(f.domain.h, rbar);
  fill_quantiles(rep, slack);
  rep.max_violation = rep.q100;
  rep.pass = rep.max_violation <= rep.tolerance_used;
  rep.stats = {{"rbar", rbar},
               {"ratio_max", ratio_max},
               {"zero_denominator_excluded", static_cast<double>(zero_den)}};
  return rep;
}

double check_sobolev_ratio(const GridFunction& f, double alpha, const RadiusGrid& rgrid,
                           const VerifyOptions& opts) {
  CheckSetup s = make_setup(f, opts);
  double den = lq_norm(gradient(f).magnitude(), 1.0);
  require(den > 0.0, errc::zero_gradient_input, "input has zero gradient");

  FracParams params{alpha, 0.0, opts.kind};
  MaximalField field = compute_maximal(f, params, rgrid, s.copts);
  GridFunction gm = gradient(field.values).magnitude();

  RegionMask emask;
  emask.domain = s.edom;
  emask.flags.assign(static_cast<std::size_t>(s.edom.size()), 0);
  for (auto ef : s.tested_eval) emask.flags[static_cast<std::size_t>(ef)] = 1;
  double q = params.conjugate_exponent(f.domain.d);
  return lq_norm(gm, q, &emask) / den;
}

CheckReport check_weak_type(const GridFunction& g, double alpha, const RadiusGrid& rgrid,
                            const VerifyOptions& opts) {
  for (double v : g.values)
    require(v >= 0.0, errc::bad_argument, "weak-type input must be nonnegative");
  FracParams params{alpha, 0.0, OperatorKind::noncentered};
  ComputeOptions copts;
  copts.workers = opts.workers;
  copts.with_ties = false;
  MaximalField field = compute_maximal(g, params, rgrid, copts);

  CheckReport rep;
  rep.check_name = "weak_type";
  rep.points_tested = field.values.domain.size();
  double tmax = 0.0;
  for (double v : field.values.values) tmax = std::max(tmax, v);
  double norm1 = lq_norm(g, 1.0);
  const double inv_q = (static_cast<double>(g.domain.d) - alpha) / g.domain.d;
  const double hd = std::pow(g.domain.h, g.domain.d);

  auto eval_w = [&](int n) {
    if (tmax == 0.0 || norm1 == 0.0) return 0.0;
    double w = 0.0;
    for (int i = 0; i < n; ++i) {
      double t = tmax * std::exp(std::log(1e-3) *
                                 (1.0 - static_cast<double>(i) / static_cast<double>(n - 1)));
      std::int64_t cnt = 0;
      for (double v : field.values.values) cnt += v > t;
      w = std::max(w, t * std::pow(static_cast<double>(cnt) * hd, inv_q) / norm1);
    }
    return w;
  };
  double w30 = eval_w(30);
  double w59 = eval_w(59);  // superset of the 30-point grid
  rep.max_violation = w59 - 1.05 * w30;
  rep.tolerance_used = 0.0;
  rep.q50 = rep.q90 = rep.q99 = rep.q100 = rep.max_violation;
  rep.pass = std::isfinite(w30) && std::isfinite(w59) && rep.max_violation <= 0.0;
  rep.stats = {{"W", w30}, {"W_doubled", w59}};
  return rep;
}

CheckReport check_delta_gradient_bound(const GridFunction& f, double alpha, double delta,
                                       const RadiusGrid& rgrid, const VerifyOptions& opts) {
  require(delta > 0.0, errc::delta_zero, "needs delta > 0");
  CheckSetup s = make_setup(f, opts);
  FracParams params{alpha, delta, opts.kind};
  MaximalField field = compute_maximal(f, params, rgrid, s.copts);
  GridFunction lhs = gradient(field.values).magnitude();

  const int d = f.domain.d;
  double bound = lq_norm(gradient_of_modulus(f).magnitude(), 1.0) /
                 (unit_ball_volume(d) * std::pow(delta, static_cast<double>(d) - alpha));

  CheckReport rep;
  rep.check_name = "delta_gradient_bound";
  std::vector<double> slack;
  for (auto ef : s.tested_eval) {
    if (field.ball(ef).tie_count > 1) {
      ++rep.ties_excluded;
      continue;
    }
    slack.push_back(lhs.values[static_cast<std::size_t>(ef)] - bound);
  }
  rep.points_tested = static_cast<std::int64_t>(slack.size());
  double rbar = rbar_of(field, s.tested_eval);
  rep.tolerance_used = tau_ineq(f.domain.h, rbar);
  fill_quantiles(rep, slack);
  rep.max_violation = rep.q100;
  rep.pass = rep.max_violation <= rep.tolerance_used;
  rep.stats = {{"rbar", rbar},
               {"violating_fraction", violating_fraction(slack, rep.tolerance_used)},
               {"bound", bound}};
  return rep;
}

CheckReport check_scaling_covariance(const GridFunction& f, double alpha,
                                     const RadiusGrid& rgrid, const VerifyOptions& opts) {
  CheckSetup s = make_setup(f, opts);
  FracParams params{alpha, 0.0, opts.kind};
  MaximalField field = compute_maximal(f, params, rgrid, s.copts);

  // f_2(x) = f(2x) on the half-spacing grid: identical samples, halved box.
  GridFunction f2 = f;
  f2.domain.h = 0.5 * f.domain.h;
  for (int a = 0; a < f.domain.d; ++a) f2.domain.origin[a] = 0.5 * f.domain.origin[a];
  RadiusGrid rg2 = rgrid;
  rg2.h_link = 0.5 * rgrid.h_link;
  for (std::size_t k = 0; k < rg2.radii.size(); ++k) {
    rg2.radii[k] = 0.5 * rgrid.radii[k];
    rg2.radii_sq[k] = rg2.radii[k] * rg2.radii[k];
  }
  MaximalField field2 = compute_maximal(f2, params, rg2, s.copts);

  const double scale = std::pow(2.0, -alpha);
  double worst = 0.0, vmax = 0.0;
  for (std::size_t i = 0; i < field.values.values.size(); ++i) {
    worst = std::max(worst,
                     std::abs(field2.values.values[i] - scale * field.values.values[i]));
    vmax = std::max(vmax, std::abs(field.values.values[i]));
  }
  CheckReport rep;
  rep.check_name = "scaling_covariance";
  rep.points_tested = static_cast<std::int64_t>(field.values.values.size());
  rep.max_violation = worst;
  rep.q50 = rep.q90 = rep.q99 = rep.q100 = worst;
  rep.tolerance_used = 1e-12 * std::max(1.0, vmax);
  rep.pass = rep.max_violation <= rep.tolerance_used;
  rep.stats = {{"field_max", vmax}};
  return rep;
}

}  // namespace maxlab
