#include "maxlab/maximal.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <deque>
#include <fstream>
#include <limits>

#include "maxlab/parallel.hpp"

namespace maxlab {

namespace {
// Pruning margin: a skipped candidate is guaranteed strictly below every tie
// threshold max*(1-kTieTolerance), with room for the float slop of the bound.
constexpr double kPruneFactor = 1.0 - 2.0 * kTieTolerance;
}  // namespace

std::string to_string(OperatorKind k) {
  return k == OperatorKind::centered ? "centered" : "noncentered";
}

OperatorKind operator_kind_from_name(const std::string& name) {
  if (name == "centered") return OperatorKind::centered;
  if (name == "noncentered") return OperatorKind::noncentered;
  fail(errc::bad_argument, "unknown operator kind: " + name);
}

void FracParams::validate(int d) const {
  require(alpha > 0.0 && alpha < static_cast<double>(d), errc::invalid_alpha,
          "need 0 < alpha < d");
  require(delta >= 0.0, errc::bad_argument, "delta must be >= 0");
}

BallSpec MaximalField::ball_spec(std::int64_t eval_flat) const {
  const GoodBall& b = ball(eval_flat);
  require(b.center_flat >= 0, errc::missing_good_ball, "point has no recorded ball");
  BallSpec spec;
  spec.center = source_domain.point(source_domain.unflat(b.center_flat));
  spec.radius = b.radius;
  return spec;
}

Index MaximalField::source_index(std::int64_t eval_flat) const {
  Index idx = values.domain.unflat(eval_flat);
  for (int a = 0; a < values.domain.d; ++a) idx[a] += eval_lo[a];
  return idx;
}

// ---------------------------------------------------------------------------
// Shared engine state
// ---------------------------------------------------------------------------

namespace {

struct Engine {
  const GridFunction* f = nullptr;
  const RadiusGrid* rg = nullptr;
  double alpha = 0.0;
  std::vector<double> absv;
  std::unique_ptr<LineSumTable> table;
  std::vector<double> powr;       // r_k^alpha
  std::vector<double> suffix_ub;  // suffix max of the center-free value bound
  bool has_support = false;
  Coord supp_clo{}, supp_chi{};  // physical support bounding box

  // Exact-difference fast path: when coord(i) - coord(j) == (i-j)*h holds
  // bitwise over the reachable index range, stencil membership depends only on
  // index offsets and the per-radius half-widths can be tabulated once.
  bool exact_diffs = false;
  std::vector<std::vector<std::int32_t>> half_width;  // [k][|leading offset|]

  const Domain& src() const { return f->domain; }

  // Squared distance from x to the support box, accumulated in axis order.
  double supp_dist2(const Coord& x) const {
    double s = 0.0;
    for (int a = 0; a < src().d; ++a) {
      double t = 0.0;
      if (x[a] < supp_clo[a]) t = supp_clo[a] - x[a];
      else if (x[a] > supp_chi[a]) t = x[a] - supp_chi[a];
      s += t * t;
    }
    return s;
  }

  // Tabulated stencil sum at a grid-point center; bitwise identical to the
  // coordinate walk (same membership, same per-line prefix differences, same
  // line order).
  BallSum fast_sum(const Index& zi, std::size_t k) const {
    const Domain& dom = src();
    const auto& w = half_width[k];
    BallSum out;
    if (dom.d == 1) {
      std::int64_t W = w[0];
      out.count = 2 * W + 1;
      std::int64_t a = std::max<std::int64_t>(zi[0] - W, 0);
      std::int64_t b = std::min<std::int64_t>(zi[0] + W, dom.dims[0] - 1);
      if (a <= b) {
        auto p = table->line(0);
        out.sum = p[static_cast<std::size_t>(b + 1)] - p[static_cast<std::size_t>(a)];
      }
      return out;
    }
    const std::int64_t D = static_cast<std::int64_t>(w.size()) - 1;
    const std::int64_t n1 = dom.dims[1];
    for (std::int64_t dy = -D; dy <= D; ++dy) {
      std::int64_t W = w[static_cast<std::size_t>(dy < 0 ? -dy : dy)];
      out.count += 2 * W + 1;
      std::int64_t row = zi[0] + dy;
      if (row < 0 || row >= dom.dims[0]) continue;
      std::int64_t a = std::max<std::int64_t>(zi[1] - W, 0);
      std::int64_t b = std::min<std::int64_t>(zi[1] + W, n1 - 1);
      if (a > b) continue;
      auto p = table->line(row);
      out.sum += p[static_cast<std::size_t>(b + 1)] - p[static_cast<std::size_t>(a)];
    }
    return out;
  }

  // Candidate value r_k^alpha * avg(|f|, B(z, r_k)). Balls that provably miss
  // the support skip the stencil walk; the result is the exact 0 the walk
  // would produce.
  double candidate(const Coord& z, std::size_t k, double z_supp_dist2) const {
    if (!has_support) return 0.0;
    if (z_supp_dist2 > rg->radii_sq[k] * (1.0 + 1e-12)) return 0.0;
    BallSum s = ball_sum_raw(src(), absv, table.get(), z, rg->radii[k]);
    if (s.count <= 0) return 0.0;
    return powr[k] * (s.sum / static_cast<double>(s.count));
  }

  double candidate_at(const Index& zi, const Coord& z, std::size_t k,
                      double z_supp_dist2) const {
    if (!has_support) return 0.0;
    if (z_supp_dist2 > rg->radii_sq[k] * (1.0 + 1e-12)) return 0.0;
    if (!exact_diffs) return candidate(z, k, z_supp_dist2);
    BallSum s = fast_sum(zi, k);
    if (s.count <= 0) return 0.0;
    return powr[k] * (s.sum / static_cast<double>(s.count));
  }
};

// coord(i) must represent origin + i*h exactly over [-margin, dims+margin];
// then coordinate differences equal offset*h bitwise and stencils translate.
bool probe_exact_diffs(const Domain& dom, std::int64_t margin) {
  for (int a = 0; a < dom.d; ++a) {
    for (std::int64_t i = -margin; i < dom.dims[a] + margin; ++i) {
      double p = static_cast<double>(i) * dom.h;
      if (std::fma(static_cast<double>(i), dom.h, -p) != 0.0) return false;
      double c = dom.origin[a] + p;
      // Knuth two-sum residual.
      double bv = c - dom.origin[a];
      double av = c - bv;
      if ((dom.origin[a] - av) + (p - bv) != 0.0) return false;
    }
  }
  return true;
}

Engine build_engine(const GridFunction& f, const RadiusGrid& rgrid, double alpha) {
  Engine e;
  e.f = &f;
  e.rg = &rgrid;
  e.alpha = alpha;
  e.absv.resize(f.values.size());
  for (std::size_t i = 0; i < e.absv.size(); ++i) e.absv[i] = std::abs(f.values[i]);
  e.table = std::make_unique<LineSumTable>(f.domain, e.absv);

  const std::size_t K = rgrid.size();
  e.powr.resize(K);
  for (std::size_t k = 0; k < K; ++k) e.powr[k] = std::pow(rgrid.radii[k], alpha);

  Index slo{}, shi{};
  e.has_support = support_bbox(f, slo, shi);
  if (e.has_support) {
    for (int a = 0; a < f.domain.d; ++a) {
      e.supp_clo[a] = f.domain.coord(a, slo[a]);
      e.supp_chi[a] = f.domain.coord(a, shi[a]);
    }
  }

  e.exact_diffs =
      f.domain.d <= 2 &&
      probe_exact_diffs(f.domain,
                        static_cast<std::int64_t>(std::ceil(rgrid.radii.back() / f.domain.h)) + 2);
  if (e.exact_diffs) {
    auto sq = [](double t) { return t * t; };
    const double h = f.domain.h;
    e.half_width.resize(K);
    for (std::size_t k = 0; k < K; ++k) {
      const double r2 = rgrid.radii_sq[k];
      auto fit = [&](double acc2) {
        auto m = static_cast<std::int64_t>(std::floor(std::sqrt(std::max(0.0, r2 - acc2)) / h));
        while (acc2 + sq(static_cast<double>(m + 1) * h) <= r2) ++m;
        while (m >= 0 && acc2 + sq(static_cast<double>(m) * h) > r2) --m;
        return m;
      };
      if (f.domain.d == 1) {
        e.half_width[k] = {static_cast<std::int32_t>(fit(0.0))};
      } else {
        std::int64_t D = fit(0.0);
        e.half_width[k].resize(static_cast<std::size_t>(D + 1));
        for (std::int64_t dy = 0; dy <= D; ++dy)
          e.half_width[k][static_cast<std::size_t>(dy)] =
              static_cast<std::int32_t>(fit(sq(static_cast<double>(dy) * h)));
      }
    }
  }

  // Center-free bound: val(z, r_k) <= r_k^alpha * T / N(r_k) with T the total
  // |f| mass. In exact mode N is the exact per-radius lattice count (the same
  // for every grid center); otherwise the inscribed axis box gives a sound
  // lower bound on the count.
  double T = pairwise_sum(e.absv);
  const int d = f.domain.d;
  e.suffix_ub.assign(K, 0.0);
  for (std::size_t k = 0; k < K; ++k) {
    double n_lb;
    if (e.exact_diffs) {
      std::int64_t n = 0;
      const auto& w = e.half_width[k];
      if (d == 1) {
        n = 2 * static_cast<std::int64_t>(w[0]) + 1;
      } else {
        for (std::size_t dy = 0; dy < w.size(); ++dy)
          n += (dy == 0 ? 1 : 2) * (2 * static_cast<std::int64_t>(w[dy]) + 1);
      }
      n_lb = static_cast<double>(n);
    } else {
      double wa = rgrid.radii[k] / std::sqrt(static_cast<double>(d));
      double n_axis = std::floor(2.0 * (wa / f.domain.h) * (1.0 - 1e-9));
      n_lb = std::max(1.0, std::pow(std::max(1.0, n_axis), d));
    }
    e.suffix_ub[k] = e.powr[k] * (T / n_lb);
  }
  for (std::size_t k = K - 1; k-- > 0;)
    e.suffix_ub[k] = std::max(e.suffix_ub[k], e.suffix_ub[k + 1]);
  return e;
}

struct EvalBoxResolved {
  Index lo{}, hi{};
  Domain dom;  // the evaluation sub-domain
};

EvalBoxResolved resolve_eval(const Domain& src, const ComputeOptions& opts) {
  EvalBoxResolved e;
  for (int a = 0; a < src.d; ++a) {
    e.lo[a] = opts.eval_lo ? (*opts.eval_lo)[a] : 0;
    e.hi[a] = opts.eval_hi ? (*opts.eval_hi)[a] : src.dims[a] - 1;
    require(e.lo[a] >= 0 && e.lo[a] <= e.hi[a] && e.hi[a] < src.dims[a], errc::bad_argument,
            "evaluation box outside the domain");
  }
  e.dom = src;
  for (int a = 0; a < src.d; ++a) {
    e.dom.dims[a] = e.hi[a] - e.lo[a] + 1;
    e.dom.origin[a] = src.coord(a, e.lo[a]);
  }
  return e;
}

void check_preconditions(const GridFunction& f, const FracParams& params, const RadiusGrid& rgrid,
                         const std::vector<double>& deltas, const EvalBoxResolved& eval) {
  params.validate(f.domain.d);
  rgrid.validate();
  require(rgrid.h_link == f.domain.h, errc::bad_argument,
          "radius grid was built for a different spacing");
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    require(deltas[i] >= 0.0, errc::bad_argument, "delta must be >= 0");
    require(deltas[i] < rgrid.radii.back(), errc::bad_argument, "delta beyond the radius grid");
    if (i > 0)
      require(deltas[i] >= deltas[i - 1], errc::bad_argument, "deltas must be ascending");
  }
  Index slo{}, shi{};
  if (support_bbox(f, slo, shi)) {
    // Tight cover requirement: from every evaluation point the largest radius
    // must reach the farthest support point.
    double needed = 0.0;
    const Domain& dom = f.domain;
    int d = dom.d;
    for (int ca = 0; ca < (1 << d); ++ca)
      for (int cb = 0; cb < (1 << d); ++cb) {
        double s = 0.0;
        for (int a = 0; a < d; ++a) {
          double xa = dom.coord(a, (ca >> a) & 1 ? eval.hi[a] : eval.lo[a]);
          double sa = dom.coord(a, (cb >> a) & 1 ? shi[a] : slo[a]);
          double t = xa - sa;
          s += t * t;
        }
        needed = std::max(needed, s);
      }
    require(rgrid.radii.back() >= std::sqrt(needed) * (1.0 - 1e-12),
            errc::insufficient_radius_grid,
            "largest radius does not cover the support from every evaluation point");
  }
}

std::vector<std::size_t> delta_indices(const RadiusGrid& rgrid, const std::vector<double>& deltas) {
  std::vector<std::size_t> idx(deltas.size());
  for (std::size_t i = 0; i < deltas.size(); ++i) idx[i] = rgrid.index_at_least(deltas[i]);
  return idx;
}

std::vector<MaximalField> prepare_fields(const GridFunction& f, const FracParams& params,
                                         const RadiusGrid& rgrid,
                                         const std::vector<double>& deltas,
                                         const EvalBoxResolved& eval, bool ties) {
  std::vector<MaximalField> fields(deltas.size());
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    MaximalField& fd = fields[i];
    fd.params = params;
    fd.params.delta = deltas[i];
    fd.values = make_zero(eval.dom);
    fd.balls.assign(static_cast<std::size_t>(eval.dom.size()), GoodBall{});
    fd.rgrid = rgrid;
    fd.source_domain = f.domain;
    fd.eval_lo = eval.lo;
    fd.ties_tracked = ties;
  }
  return fields;
}

// ---------------------------------------------------------------------------
// Centered engine: per-point scan over the radius profile, all truncations in
// one pass. Pruning cuts the scan once the suffix value bound falls below the
// best truncated value seen so far; skipped radii are provably below every
// delta's tie threshold.
// ---------------------------------------------------------------------------

void centered_family_impl(const GridFunction& f, const Engine& eng,
                          const std::vector<double>& deltas, const ComputeOptions& opts,
                          const EvalBoxResolved& eval, std::vector<MaximalField>& fields) {
  const RadiusGrid& rg = *eng.rg;
  const std::size_t K = rg.size();
  const auto idx_delta = delta_indices(rg, deltas);
  const std::size_t idx_dmin = idx_delta.front();
  const std::size_t idx_dmax = idx_delta.back();
  const Domain& src = f.domain;
  const std::int64_t n_eval = eval.dom.size();

  parallel_for(n_eval, opts.workers, [&](std::int64_t b, std::int64_t e) {
    std::vector<double> vals(K, 0.0);
    for (std::int64_t ef = b; ef < e; ++ef) {
      Index idx = eval.dom.unflat(ef);
      for (int a = 0; a < src.d; ++a) idx[a] += eval.lo[a];
      std::int64_t sf = src.flat(idx);
      if (opts.compute_mask && !opts.compute_mask->test(sf)) continue;

      Coord x = src.point(idx);
      double sd2 = eng.has_support ? eng.supp_dist2(x) : 0.0;

      double best_trunc = 0.0;
      std::size_t pruned_from = K;
      for (std::size_t k = idx_dmin; k < K; ++k) {
        if (!opts.exhaustive && k >= idx_dmax &&
            eng.suffix_ub[k] < best_trunc * kPruneFactor) {
          pruned_from = k;
          break;
        }
        double v = eng.candidate_at(idx, x, k, sd2);
        vals[k] = v;
        if (k >= idx_dmax && v > best_trunc) best_trunc = v;
      }

      for (std::size_t i = 0; i < fields.size(); ++i) {
        const std::size_t k0 = idx_delta[i];
        double vmax = -1.0;
        std::size_t kbest = k0;
        for (std::size_t k = k0; k < pruned_from; ++k)
          if (vals[k] > vmax) {
            vmax = vals[k];
            kbest = k;
          }
        GoodBall gb;
        gb.center_flat = sf;
        gb.radius = rg.radii[kbest];
        gb.value = vmax;
        if (fields[i].ties_tracked) {
          double thresh = vmax * (1.0 - kTieTolerance);
          gb.tie_count = 0;
          gb.min_tie_radius = std::numeric_limits<double>::infinity();
          gb.max_tie_radius = 0.0;
          gb.minus1 = 0.0;
          for (std::size_t k = k0; k < pruned_from; ++k) {
            if (vals[k] >= thresh) {
              ++gb.tie_count;
              gb.min_tie_radius = std::min(gb.min_tie_radius, rg.radii[k]);
              gb.max_tie_radius = std::max(gb.max_tie_radius, rg.radii[k]);
              gb.minus1 = std::max(gb.minus1, vals[k] / rg.radii[k]);
            }
          }
        } else {
          gb.tie_count = 0;
          gb.min_tie_radius = gb.max_tie_radius = gb.radius;
          gb.minus1 = gb.value / gb.radius;
        }
        fields[i].values.values[static_cast<std::size_t>(ef)] = vmax;
        fields[i].balls[static_cast<std::size_t>(ef)] = gb;
      }
    }
  });
}

// ---------------------------------------------------------------------------
// Non-centered engine (d <= 2): descending radius sweep keeping the per-center
// suffix-max profile SM_k(z) = max_{j>=k} val(z, r_j); at each radius the disc
// dilation max_{|z-x|<=r_k} SM_k(z) is folded into the output with
// sliding-window maxima per line. The candidate order is total (value desc,
// radius asc, center flat asc), so the result matches a dense per-point scan
// bitwise, tie-break included.
// ---------------------------------------------------------------------------

struct NcEntry {
  double val;
  std::int32_t j;
  std::int64_t zflat;
};

// Strictly better under (value desc, radius index asc, center asc).
inline bool nc_better(double av, std::int32_t aj, std::int64_t az, double bv, std::int32_t bj,
                      std::int64_t bz) {
  if (av != bv) return av > bv;
  if (aj != bj) return aj < bj;
  return az < bz;
}

struct SlidingMax {
  // Monotone deque of line positions; earlier positions win exact (val, j) ties.
  std::deque<std::int64_t> dq;
  const double* val;
  const std::int32_t* jj;

  void push(std::int64_t i) {
    while (!dq.empty()) {
      std::int64_t b = dq.back();
      bool new_strictly_better =
          val[i] > val[b] || (val[i] == val[b] && jj[i] < jj[b]);
      if (!new_strictly_better) break;
      dq.pop_back();
    }
    dq.push_back(i);
  }
  void expire(std::int64_t lo) {
    while (!dq.empty() && dq.front() < lo) dq.pop_front();
  }
};

// Window of lattice indices i on `axis` with acc2 + (coord(i)-z)^2 <= r2,
// mirrored from the stencil walk so engines and oracle agree on membership.
struct IdxWindow {
  std::int64_t lo = 0, hi = -1;
};

IdxWindow pred_window(const Domain& dom, int axis, double z, double acc2, double r2) {
  IdxWindow w;
  double budget = r2 - acc2;
  if (budget < 0.0) return w;
  double half = std::sqrt(budget);
  double o = dom.origin[axis], h = dom.h;
  auto pred = [&](std::int64_t i) {
    double t = dom.coord(axis, i) - z;
    return acc2 + t * t <= r2;
  };
  w.lo = static_cast<std::int64_t>(std::ceil((z - half - o) / h));
  w.hi = static_cast<std::int64_t>(std::floor((z + half - o) / h));
  while (pred(w.lo - 1)) --w.lo;
  while (w.lo <= w.hi && !pred(w.lo)) ++w.lo;
  while (pred(w.hi + 1)) ++w.hi;
  while (w.hi >= w.lo && !pred(w.hi)) --w.hi;
  return w;
}

void noncentered_family_impl(const GridFunction& f, const Engine& eng,
                             const std::vector<double>& deltas, const ComputeOptions& opts,
                             const EvalBoxResolved& eval, std::vector<MaximalField>& fields) {
  const Domain& src = f.domain;
  const RadiusGrid& rg = *eng.rg;
  const std::size_t K = rg.size();
  const auto idx_delta = delta_indices(rg, deltas);
  const std::size_t idx_dmin = idx_delta.front();
  const std::int64_t n_src = src.size();
  const std::int64_t n_eval = eval.dom.size();
  const int d = src.d;

  std::vector<double> sm_val(static_cast<std::size_t>(n_src), -1.0);
  std::vector<std::int32_t> sm_j(static_cast<std::size_t>(n_src), -1);
  std::vector<double> out_val(static_cast<std::size_t>(n_eval), -1.0);
  std::vector<std::int32_t> out_j(static_cast<std::size_t>(n_eval), -1);
  std::vector<std::int64_t> out_z(static_cast<std::size_t>(n_eval), -1);

  auto snapshot = [&](std::size_t i) {
    MaximalField& fd = fields[i];
    for (std::int64_t ef = 0; ef < n_eval; ++ef) {
      auto u = static_cast<std::size_t>(ef);
      GoodBall gb;
      gb.center_flat = out_z[u];
      gb.radius = out_j[u] >= 0 ? rg.radii[static_cast<std::size_t>(out_j[u])] : 0.0;
      gb.value = std::max(0.0, out_val[u]);
      gb.tie_count = 0;
      gb.min_tie_radius = gb.max_tie_radius = gb.radius;
      gb.minus1 = gb.radius > 0.0 ? gb.value / gb.radius : 0.0;
      fd.values.values[u] = gb.value;
      fd.balls[u] = gb;
    }
  };

  for (std::size_t k = K; k-- > idx_dmin;) {
    // Suffix-max update: smaller radius replaces on exact value ties.
    parallel_for(n_src, opts.workers, [&](std::int64_t b, std::int64_t e) {
      for (std::int64_t zf = b; zf < e; ++zf) {
        Index zi = src.unflat(zf);
        Coord z = src.point(zi);
        double v = eng.candidate_at(zi, z, k, eng.has_support ? eng.supp_dist2(z) : 0.0);
        auto u = static_cast<std::size_t>(zf);
        if (v >= sm_val[u]) {
          sm_val[u] = v;
          sm_j[u] = static_cast<std::int32_t>(k);
        }
      }
    });

    const double r2 = rg.radii_sq[k];
    if (d == 1) {
      SlidingMax sm{{}, sm_val.data(), sm_j.data()};
      std::int64_t znext = std::numeric_limits<std::int64_t>::min();
      for (std::int64_t x1 = eval.lo[0]; x1 <= eval.hi[0]; ++x1) {
        IdxWindow w;
        if (eng.exact_diffs) {
          std::int64_t W = eng.half_width[k][0];
          w.lo = x1 - W;
          w.hi = x1 + W;
        } else {
          w = pred_window(src, 0, src.coord(0, x1), 0.0, r2);
        }
        w.lo = std::max<std::int64_t>(w.lo, 0);
        w.hi = std::min<std::int64_t>(w.hi, src.dims[0] - 1);
        if (w.hi < w.lo) continue;
        if (znext == std::numeric_limits<std::int64_t>::min()) znext = w.lo;
        for (; znext <= w.hi; ++znext) sm.push(znext);
        sm.expire(w.lo);
        if (!sm.dq.empty()) {
          std::int64_t zf = sm.dq.front();
          auto u = static_cast<std::size_t>(x1 - eval.lo[0]);
          if (nc_better(sm_val[static_cast<std::size_t>(zf)],
                        sm_j[static_cast<std::size_t>(zf)], zf, out_val[u], out_j[u],
                        out_z[u])) {
            out_val[u] = sm_val[static_cast<std::size_t>(zf)];
            out_j[u] = sm_j[static_cast<std::size_t>(zf)];
            out_z[u] = zf;
          }
        }
      }
    } else {
      // d == 2: per output row, fold the sliding max of every source row in range.
      std::int64_t n_rows_eval = eval.hi[0] - eval.lo[0] + 1;
      parallel_for(n_rows_eval, opts.workers, [&](std::int64_t rb, std::int64_t re) {
        for (std::int64_t r = rb; r < re; ++r) {
          std::int64_t x0 = eval.lo[0] + r;
          double cx0 = src.coord(0, x0);
          IdxWindow w0;
          if (eng.exact_diffs) {
            std::int64_t D = static_cast<std::int64_t>(eng.half_width[k].size()) - 1;
            w0.lo = x0 - D;
            w0.hi = x0 + D;
          } else {
            w0 = pred_window(src, 0, cx0, 0.0, r2);
          }
          w0.lo = std::max<std::int64_t>(w0.lo, 0);
          w0.hi = std::min<std::int64_t>(w0.hi, src.dims[0] - 1);
          for (std::int64_t z0 = w0.lo; z0 <= w0.hi; ++z0) {
            double t0 = src.coord(0, z0) - cx0;
            double acc2 = t0 * t0;
            const std::int64_t off0 = z0 - x0 < 0 ? x0 - z0 : z0 - x0;
            const std::int64_t base = z0 * src.dims[1];
            SlidingMax sm{{}, sm_val.data(), sm_j.data()};
            std::int64_t znext = std::numeric_limits<std::int64_t>::min();
            for (std::int64_t x1 = eval.lo[1]; x1 <= eval.hi[1]; ++x1) {
              IdxWindow w1;
              if (eng.exact_diffs) {
                std::int64_t W = eng.half_width[k][static_cast<std::size_t>(off0)];
                w1.lo = x1 - W;
                w1.hi = x1 + W;
              } else {
                w1 = pred_window(src, 1, src.coord(1, x1), acc2, r2);
              }
              w1.lo = std::max<std::int64_t>(w1.lo, 0);
              w1.hi = std::min<std::int64_t>(w1.hi, src.dims[1] - 1);
              auto u = static_cast<std::size_t>(r * (eval.hi[1] - eval.lo[1] + 1) +
                                                (x1 - eval.lo[1]));
              if (w1.hi < w1.lo) continue;
              if (znext == std::numeric_limits<std::int64_t>::min()) znext = w1.lo;
              for (; znext <= w1.hi; ++znext) sm.push(base + znext);
              sm.expire(base + w1.lo);
              if (!sm.dq.empty()) {
                std::int64_t zf = sm.dq.front();
                if (nc_better(sm_val[static_cast<std::size_t>(zf)],
                              sm_j[static_cast<std::size_t>(zf)], zf, out_val[u], out_j[u],
                              out_z[u])) {
                  out_val[u] = sm_val[static_cast<std::size_t>(zf)];
                  out_j[u] = sm_j[static_cast<std::size_t>(zf)];
                  out_z[u] = zf;
                }
              }
            }
          }
        }
      });
    }

    for (std::size_t i = 0; i < deltas.size(); ++i)
      if (idx_delta[i] == k) snapshot(i);
  }
}

// Fallback for d >= 3: dense per-point scan with the suffix bound skip.
void noncentered_generic_impl(const GridFunction& f, const Engine& eng,
                              const std::vector<double>& deltas, const ComputeOptions& opts,
                              const EvalBoxResolved& eval, std::vector<MaximalField>& fields) {
  const Domain& src = f.domain;
  const RadiusGrid& rg = *eng.rg;
  const std::size_t K = rg.size();
  const auto idx_delta = delta_indices(rg, deltas);
  const std::int64_t n_eval = eval.dom.size();
  const std::int64_t n_src = src.size();

  parallel_for(n_eval, opts.workers, [&](std::int64_t b, std::int64_t e) {
    for (std::int64_t ef = b; ef < e; ++ef) {
      Index idx = eval.dom.unflat(ef);
      for (int a = 0; a < src.d; ++a) idx[a] += eval.lo[a];
      Coord x = src.point(idx);
      for (std::size_t i = 0; i < fields.size(); ++i) {
        double best_v = -1.0;
        std::int32_t best_j = -1;
        std::int64_t best_z = -1;
        for (std::int64_t zf = 0; zf < n_src; ++zf) {
          Coord z = src.point(src.unflat(zf));
          double d2 = 0.0;
          for (int a = 0; a < src.d; ++a) {
            double t = z[a] - x[a];
            d2 += t * t;
          }
          std::size_t k0 = std::max(idx_delta[i], rg.index_at_least_sq(d2));
          if (k0 >= K) continue;
          if (!opts.exhaustive && eng.suffix_ub[k0] < best_v * kPruneFactor) continue;
          double sd2 = eng.has_support ? eng.supp_dist2(z) : 0.0;
          for (std::size_t k = k0; k < K; ++k) {
            if (!opts.exhaustive && eng.suffix_ub[k] < best_v * kPruneFactor) break;
            double v = eng.candidate(z, k, sd2);
            if (nc_better(v, static_cast<std::int32_t>(k), zf, best_v, best_j, best_z)) {
              best_v = v;
              best_j = static_cast<std::int32_t>(k);
              best_z = zf;
            }
          }
        }
        GoodBall gb;
        gb.center_flat = best_z;
        gb.radius = best_j >= 0 ? rg.radii[static_cast<std::size_t>(best_j)] : 0.0;
        gb.value = std::max(0.0, best_v);
        gb.min_tie_radius = gb.max_tie_radius = gb.radius;
        gb.minus1 = gb.radius > 0.0 ? gb.value / gb.radius : 0.0;
        fields[i].values.values[static_cast<std::size_t>(ef)] = gb.value;
        fields[i].balls[static_cast<std::size_t>(ef)] = gb;
      }
    }
  });
}

// Tie metadata for non-centered fields: per point, enumerate centers within
// the largest radius and count candidates above the tie threshold, skipping
// centers and radii the global suffix bound rules out.
void noncentered_tie_pass(const GridFunction& f, const Engine& eng, const ComputeOptions& opts,
                          const EvalBoxResolved& eval, MaximalField& field) {
  const Domain& src = f.domain;
  const RadiusGrid& rg = *eng.rg;
  const std::size_t K = rg.size();
  const std::size_t idx_d = rg.index_at_least(field.params.delta);
  const std::int64_t n_eval = eval.dom.size();

  // Candidate centers sit within the largest radius of x; the index window is
  // conservative and the per-pair admissibility predicate below is exact.
  const auto reach = static_cast<std::int64_t>(std::ceil(rg.radii.back() / src.h)) + 2;

  parallel_for(n_eval, opts.workers, [&](std::int64_t b, std::int64_t e) {
    for (std::int64_t ef = b; ef < e; ++ef) {
      Index idx = eval.dom.unflat(ef);
      for (int a = 0; a < src.d; ++a) idx[a] += eval.lo[a];
      Coord x = src.point(idx);
      double vmax = field.values.values[static_cast<std::size_t>(ef)];
      double thresh = vmax * (1.0 - kTieTolerance);

      GoodBall& gb = field.balls[static_cast<std::size_t>(ef)];
      gb.tie_count = 0;
      gb.min_tie_radius = std::numeric_limits<double>::infinity();
      gb.max_tie_radius = 0.0;
      gb.minus1 = 0.0;

      Index zlo{}, zhi{};
      for (int a = 0; a < src.d; ++a) {
        zlo[a] = std::max<std::int64_t>(0, idx[a] - reach);
        zhi[a] = std::min<std::int64_t>(src.dims[a] - 1, idx[a] + reach);
      }
      Index zi = zlo;
      for (;;) {
        Coord z = src.point(zi);
        double d2 = 0.0;
        for (int a = 0; a < src.d; ++a) {
          double t = z[a] - x[a];
          d2 += t * t;
        }
        std::size_t k0 = std::max(idx_d, rg.index_at_least_sq(d2));
        if (k0 < K && eng.suffix_ub[k0] >= thresh) {
          double sd2 = eng.has_support ? eng.supp_dist2(z) : 0.0;
          for (std::size_t k = k0; k < K; ++k) {
            if (eng.suffix_ub[k] < thresh) break;
            double v = eng.candidate_at(zi, z, k, sd2);
            if (v >= thresh) {
              ++gb.tie_count;
              gb.min_tie_radius = std::min(gb.min_tie_radius, rg.radii[k]);
              gb.max_tie_radius = std::max(gb.max_tie_radius, rg.radii[k]);
              gb.minus1 = std::max(gb.minus1, v / rg.radii[k]);
            }
          }
        }
        int a = src.d - 1;
        while (a >= 0) {
          if (++zi[a] <= zhi[a]) break;
          zi[a] = zlo[a];
          --a;
        }
        if (a < 0) break;
      }
      if (gb.tie_count == 0) {
        gb.min_tie_radius = gb.max_tie_radius = gb.radius;
        gb.minus1 = gb.radius > 0.0 ? gb.value / gb.radius : 0.0;
      }
    }
  });
}

}  // namespace

// ---------------------------------------------------------------------------
// Public entry points
// ---------------------------------------------------------------------------

std::vector<MaximalField> truncated_family(const GridFunction& f, const FracParams& params,
                                           const RadiusGrid& rgrid,
                                           const std::vector<double>& deltas,
                                           const ComputeOptions& opts) {
  f.validate();
  require(!deltas.empty(), errc::bad_argument, "need at least one delta");
  EvalBoxResolved eval = resolve_eval(f.domain, opts);
  check_preconditions(f, params, rgrid, deltas, eval);
  Engine eng = build_engine(f, rgrid, params.alpha);

  const bool ties = opts.with_ties;
  std::vector<MaximalField> fields = prepare_fields(f, params, rgrid, deltas, eval, ties);

  if (params.kind == OperatorKind::centered) {
    centered_family_impl(f, eng, deltas, opts, eval, fields);
  } else {
    if (f.domain.d <= 2)
      noncentered_family_impl(f, eng, deltas, opts, eval, fields);
    else
      noncentered_generic_impl(f, eng, deltas, opts, eval, fields);
    if (ties)
      for (auto& fd : fields) noncentered_tie_pass(f, eng, opts, eval, fd);
    else
      for (auto& fd : fields) fd.ties_tracked = false;
  }
  return fields;
}

MaximalField compute_maximal(const GridFunction& f, const FracParams& params,
                             const RadiusGrid& rgrid, const ComputeOptions& opts) {
  std::vector<MaximalField> fam = truncated_family(f, params, rgrid, {params.delta}, opts);
  return std::move(fam.front());
}

MaximalField centered_maximal(const GridFunction& f, const FracParams& params,
                              const RadiusGrid& rgrid, const ComputeOptions& opts) {
  FracParams p = params;
  p.kind = OperatorKind::centered;
  return compute_maximal(f, p, rgrid, opts);
}

MaximalField noncentered_maximal(const GridFunction& f, const FracParams& params,
                                 const RadiusGrid& rgrid, const ComputeOptions& opts) {
  FracParams p = params;
  p.kind = OperatorKind::noncentered;
  return compute_maximal(f, p, rgrid, opts);
}

GridFunction refined_maximal_minus1(const GridFunction& f, const MaximalField& field) {
  require(field.params.delta == 0.0, errc::bad_argument,
          "refined operator needs a delta = 0 field");
  require(!field.balls.empty() && field.ties_tracked, errc::missing_good_ball,
          "field carries no tie-tracked good balls");
  require(f.domain == field.source_domain, errc::bad_argument, "field was built from another grid");
  GridFunction out = make_zero(field.values.domain);
  for (std::size_t i = 0; i < out.values.size(); ++i) {
    require(field.balls[i].center_flat >= 0, errc::missing_good_ball, "missing good ball");
    out.values[i] = field.balls[i].minus1;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Sidecar
// ---------------------------------------------------------------------------

namespace {
void put_u32(std::ostream& os, std::uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
  os.write(reinterpret_cast<const char*>(b), 4);
}
void put_u64(std::ostream& os, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
  os.write(reinterpret_cast<const char*>(b), 8);
}
void put_f64(std::ostream& os, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, 8);
  put_u64(os, bits);
}
bool get_u32(std::istream& is, std::uint32_t& v) {
  unsigned char b[4];
  if (!is.read(reinterpret_cast<char*>(b), 4)) return false;
  v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | b[i];
  return true;
}
bool get_u64(std::istream& is, std::uint64_t& v) {
  unsigned char b[8];
  if (!is.read(reinterpret_cast<char*>(b), 8)) return false;
  v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
  return true;
}
bool get_f64(std::istream& is, double& v) {
  std::uint64_t bits;
  if (!get_u64(is, bits)) return false;
  std::memcpy(&v, &bits, 8);
  return true;
}
}  // namespace

void write_good_ball_sidecar(const MaximalField& field, const std::string& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) fail(errc::io_failure, "cannot write: " + path);
  os.write("MFGB", 4);
  put_u32(os, static_cast<std::uint32_t>(field.source_domain.d));
  put_u64(os, static_cast<std::uint64_t>(field.values.domain.size()));
  for (std::size_t i = 0; i < field.balls.size(); ++i) {
    const GoodBall& gb = field.balls[i];
    Index c{};
    if (gb.center_flat >= 0) c = field.source_domain.unflat(gb.center_flat);
    for (int a = 0; a < field.source_domain.d; ++a)
      put_u64(os, static_cast<std::uint64_t>(gb.center_flat >= 0 ? c[a] : -1));
    put_f64(os, gb.radius);
    put_f64(os, gb.value);
  }
  if (!os) fail(errc::io_failure, "write failed: " + path);
}

std::vector<SidecarEntry> read_good_ball_sidecar(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) fail(errc::io_failure, "cannot open: " + path);
  char magic[4];
  if (!is.read(magic, 4) || std::memcmp(magic, "MFGB", 4) != 0)
    fail(errc::malformed_header, "bad sidecar magic: " + path);
  std::uint32_t d;
  std::uint64_t n;
  if (!get_u32(is, d) || !get_u64(is, n))
    fail(errc::malformed_header, "bad sidecar header: " + path);
  require(d >= 1 && d <= kMaxDim, errc::dimension_overflow, "dimension > 8 rejected");
  std::vector<SidecarEntry> entries(n);
  for (auto& en : entries) {
    en.center.resize(d);
    for (std::uint32_t a = 0; a < d; ++a) {
      std::uint64_t v;
      if (!get_u64(is, v)) fail(errc::truncated_payload, "sidecar too short: " + path);
      en.center[a] = static_cast<std::int64_t>(v);
    }
    if (!get_f64(is, en.radius) || !get_f64(is, en.value))
      fail(errc::truncated_payload, "sidecar too short: " + path);
  }
  return entries;
}

}  // namespace maxlab
