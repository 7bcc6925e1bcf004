#include "maxlab/continuity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "maxlab/parallel.hpp"

namespace maxlab {

std::string to_string(SequenceKind k) {
  switch (k) {
    case SequenceKind::additive_bump: return "additive_bump";
    case SequenceKind::mollify: return "mollify";
    case SequenceKind::translate: return "translate";
  }
  return "?";
}

SequenceKind sequence_kind_from_name(const std::string& name) {
  if (name == "additive_bump") return SequenceKind::additive_bump;
  if (name == "mollify") return SequenceKind::mollify;
  if (name == "translate") return SequenceKind::translate;
  fail(errc::bad_argument, "unknown sequence kind: " + name);
}

// ---------------------------------------------------------------------------
// Sequences
// ---------------------------------------------------------------------------

namespace {

GridFunction mollify_separable(const GridFunction& f, double width) {
  const Domain& dom = f.domain;
  double sigma = width / 3.0;
  auto m = static_cast<std::int64_t>(std::floor(width / dom.h));
  if (m < 1) return f;
  std::vector<double> kernel(static_cast<std::size_t>(2 * m + 1));
  double ksum = 0.0;
  for (std::int64_t t = -m; t <= m; ++t) {
    double x = static_cast<double>(t) * dom.h;
    kernel[static_cast<std::size_t>(t + m)] = std::exp(-x * x / (2.0 * sigma * sigma));
    ksum += kernel[static_cast<std::size_t>(t + m)];
  }
  for (auto& kv : kernel) kv /= ksum;

  GridFunction cur = f;
  for (int axis = 0; axis < dom.d; ++axis) {
    std::int64_t stride = 1;
    for (int b = axis + 1; b < dom.d; ++b) stride *= dom.dims[b];
    GridFunction next = make_zero(dom);
    const std::int64_t n = dom.size();
    for (std::int64_t fl = 0; fl < n; ++fl) {
      Index idx = dom.unflat(fl);
      double acc = 0.0;
      for (std::int64_t t = -m; t <= m; ++t) {
        std::int64_t ia = idx[axis] + t;
        if (ia < 0 || ia >= dom.dims[axis]) continue;
        acc += kernel[static_cast<std::size_t>(t + m)] *
               cur.values[static_cast<std::size_t>(fl + t * stride)];
      }
      next.values[static_cast<std::size_t>(fl)] = acc;
    }
    cur = std::move(next);
  }
  return cur;
}

}  // namespace

std::vector<GridFunction> make_sequence(const GridFunction& f, const SequenceSpec& spec) {
  f.validate();
  require(!spec.j_values.empty(), errc::bad_argument, "empty j list");
  for (std::size_t i = 0; i < spec.j_values.size(); ++i) {
    require(spec.j_values[i] >= 1, errc::bad_argument, "j must be >= 1");
    if (i > 0)
      require(spec.j_values[i] > spec.j_values[i - 1], errc::bad_argument,
              "j list must be increasing");
  }
  const Domain& dom = f.domain;
  std::vector<GridFunction> seq;
  seq.reserve(spec.j_values.size());

  switch (spec.kind) {
    case SequenceKind::additive_bump: {
      Coord center{};
      if (spec.bump_center) {
        center = *spec.bump_center;
      } else {
        std::int64_t best = 0;
        for (std::int64_t i = 1; i < dom.size(); ++i)
          if (f.values[static_cast<std::size_t>(i)] > f.values[static_cast<std::size_t>(best)])
            best = i;
        center = dom.point(dom.unflat(best));
      }
      ShapeParams p;
      p.center = center;
      p.sigma = spec.bump_sigma;
      GridFunction g = make_test_function(TestFunctionKind::gaussian_bump, dom, p);
      double unit = w11_norm(g);
      require(unit > 0.0, errc::bad_argument, "degenerate bump");
      g = gf_scale(g, 1.0 / unit);
      for (int j : spec.j_values) seq.push_back(gf_add(f, gf_scale(g, 1.0 / j)));
      break;
    }
    case SequenceKind::mollify: {
      for (int j : spec.j_values) seq.push_back(mollify_separable(f, 1.0 / j));
      break;
    }
    case SequenceKind::translate: {
      Index slo{}, shi{};
      bool has = support_bbox(f, slo, shi);
      auto max_shift =
          static_cast<std::int64_t>(std::llround(1.0 / (spec.j_values.front() * dom.h)));
      require(!has || shi[0] + max_shift <= dom.dims[0] - 1, errc::margin_overflow,
              "translate shift pushes the support out of the box");
      for (int j : spec.j_values) {
        auto m = static_cast<std::int64_t>(std::llround(1.0 / (j * dom.h)));
        GridFunction fj = make_zero(dom);
        for (std::int64_t fl = 0; fl < dom.size(); ++fl) {
          Index idx = dom.unflat(fl);
          idx[0] -= m;
          fj.values[static_cast<std::size_t>(fl)] = f.at_or_zero(idx);
        }
        seq.push_back(std::move(fj));
      }
      break;
    }
  }
  return seq;
}

// ---------------------------------------------------------------------------
// Norm plumbing
// ---------------------------------------------------------------------------

namespace {

struct EvalBox {
  Index lo{}, hi{};
  Domain dom;
};

EvalBox padded_box(const Domain& dom, const RegionMask& K, int pad) {
  Index rlo{}, rhi{};
  require(mask_bbox(K, rlo, rhi), errc::bad_argument, "empty region K");
  EvalBox e;
  for (int a = 0; a < dom.d; ++a) {
    e.lo[a] = std::max<std::int64_t>(0, rlo[a] - pad);
    e.hi[a] = std::min<std::int64_t>(dom.dims[a] - 1, rhi[a] + pad);
  }
  e.dom = dom;
  for (int a = 0; a < dom.d; ++a) {
    e.dom.dims[a] = e.hi[a] - e.lo[a] + 1;
    e.dom.origin[a] = dom.coord(a, e.lo[a]);
  }
  return e;
}

RegionMask mask_on_eval(const RegionMask& K, const EvalBox& e) {
  RegionMask m;
  m.domain = e.dom;
  m.flags.assign(static_cast<std::size_t>(e.dom.size()), 0);
  for (std::int64_t ef = 0; ef < e.dom.size(); ++ef) {
    Index idx = e.dom.unflat(ef);
    for (int a = 0; a < e.dom.d; ++a) idx[a] += e.lo[a];
    m.flags[static_cast<std::size_t>(ef)] = K.flags[static_cast<std::size_t>(K.domain.flat(idx))];
  }
  return m;
}

double grad_diff_norm(const GradientField& A, const GradientField& B, double q,
                      const RegionMask& mask) {
  require(A.domain == B.domain, errc::bad_argument, "gradient domains differ");
  std::vector<double> mag(A.components[0].size(), 0.0);
  for (std::size_t i = 0; i < mag.size(); ++i) {
    double s = 0.0;
    for (int a = 0; a < A.domain.d; ++a) {
      double t = A.components[static_cast<std::size_t>(a)][i] -
                 B.components[static_cast<std::size_t>(a)][i];
      s += t * t;
    }
    mag[i] = std::sqrt(s);
  }
  return lq_norm(A.domain, mag, q, &mask);
}

// L-infinity index dilation of a mask by `cells`, separable per axis.
RegionMask dilate_mask_cells(const RegionMask& m, int cells) {
  RegionMask cur = m;
  const Domain& dom = m.domain;
  for (int axis = 0; axis < dom.d; ++axis) {
    std::int64_t stride = 1;
    for (int b = axis + 1; b < dom.d; ++b) stride *= dom.dims[b];
    RegionMask next = cur;
    for (std::int64_t fl = 0; fl < dom.size(); ++fl) {
      if (next.flags[static_cast<std::size_t>(fl)]) continue;
      Index idx = dom.unflat(fl);
      for (int t = -cells; t <= cells && !next.flags[static_cast<std::size_t>(fl)]; ++t) {
        std::int64_t ia = idx[axis] + t;
        if (ia < 0 || ia >= dom.dims[axis]) continue;
        if (cur.flags[static_cast<std::size_t>(fl + t * stride)])
          next.flags[static_cast<std::size_t>(fl)] = 1;
      }
    }
    cur = std::move(next);
  }
  return cur;
}

std::vector<double> ascending_with_zero(const std::vector<double>& deltas) {
  std::set<double> s(deltas.begin(), deltas.end());
  s.insert(0.0);
  return {s.begin(), s.end()};
}

}  // namespace

// ---------------------------------------------------------------------------
// Individual operations
// ---------------------------------------------------------------------------

std::vector<double> delta_convergence_curve(const GridFunction& f, double alpha,
                                            const RegionMask& K, const std::vector<double>& deltas,
                                            const RadiusGrid& rgrid, OperatorKind kind,
                                            int workers) {
  require(!deltas.empty(), errc::bad_argument, "empty delta list");
  for (std::size_t i = 1; i < deltas.size(); ++i)
    require(deltas[i] < deltas[i - 1], errc::bad_argument, "deltas must be descending");
  require(deltas.back() >= 2.0 * f.domain.h * (1.0 - 1e-12), errc::bad_argument,
          "smallest delta below 2h");

  EvalBox e = padded_box(f.domain, K, 2);
  RegionMask km = mask_on_eval(K, e);
  std::vector<double> fam_deltas = ascending_with_zero(deltas);
  FracParams params{alpha, 0.0, kind};
  ComputeOptions copts;
  copts.eval_lo = e.lo;
  copts.eval_hi = e.hi;
  copts.workers = workers;
  std::vector<MaximalField> fam = truncated_family(f, params, rgrid, fam_deltas, copts);

  GradientField g0 = gradient(fam.front().values);
  double q = params.conjugate_exponent(f.domain.d);
  std::vector<double> curve;
  for (double d : deltas) {
    auto it = std::lower_bound(fam_deltas.begin(), fam_deltas.end(), d);
    const MaximalField& fd = fam[static_cast<std::size_t>(it - fam_deltas.begin())];
    curve.push_back(grad_diff_norm(g0, gradient(fd.values), q, km));
  }
  return curve;
}

DeltaDecomposition delta_decomposition(const GridFunction& f, const GridFunction& f_j,
                                       double alpha, double delta, const RegionMask& K,
                                       const RadiusGrid& rgrid, OperatorKind kind, int workers) {
  EvalBox e = padded_box(f.domain, K, 2);
  RegionMask km = mask_on_eval(K, e);
  FracParams params{alpha, 0.0, kind};
  ComputeOptions copts;
  copts.eval_lo = e.lo;
  copts.eval_hi = e.hi;
  copts.workers = workers;
  std::vector<double> ds{0.0};
  if (delta > 0.0) ds.push_back(delta);
  std::vector<MaximalField> famF = truncated_family(f, params, rgrid, ds, copts);
  std::vector<MaximalField> famJ = truncated_family(f_j, params, rgrid, ds, copts);

  GradientField gF0 = gradient(famF.front().values);
  GradientField gFd = gradient(famF.back().values);
  GradientField gJ0 = gradient(famJ.front().values);
  GradientField gJd = gradient(famJ.back().values);

  double q = params.conjugate_exponent(f.domain.d);
  DeltaDecomposition out;
  out.term1 = grad_diff_norm(gF0, gFd, q, km);
  out.term2 = grad_diff_norm(gFd, gJd, q, km);
  out.term3 = grad_diff_norm(gJd, gJ0, q, km);
  out.direct = grad_diff_norm(gF0, gJ0, q, km);
  require(out.term1 + out.term2 + out.term3 >= out.direct - 1e-10, errc::bad_argument,
          "triangle inequality violated (corrupted fields)");
  return out;
}

Lambda0 lambda0_estimate(const GridFunction& f, const RegionMask& K, double alpha) {
  const Domain& dom = f.domain;
  std::vector<double> absv(f.values.size());
  for (std::size_t i = 0; i < absv.size(); ++i) absv[i] = std::abs(f.values[i]);
  double total = pairwise_sum(absv);
  require(total > 0.0, errc::no_qualifying_ball, "f is identically zero");
  LineSumTable table(dom, absv);

  Index klo{}, khi{};
  require(mask_bbox(K, klo, khi), errc::bad_argument, "empty region K");
  Index slo{}, shi{};
  support_bbox(f, slo, shi);

  auto cover_radius = [&](const Coord& z) {
    double worst = 0.0;
    for (int corner = 0; corner < (1 << dom.d); ++corner) {
      double s = 0.0;
      for (int a = 0; a < dom.d; ++a) {
        double t = dom.coord(a, (corner >> a) & 1 ? khi[a] : klo[a]) - z[a];
        s += t * t;
      }
      worst = std::max(worst, s);
    }
    return std::sqrt(worst);
  };
  auto mass_at = [&](const Coord& z, double r) {
    return ball_sum_raw(dom, absv, &table, z, r).sum;
  };
  auto half_mass_radius = [&](const Coord& z) {
    // Smallest multiple of h whose ball holds more than half the mass.
    double s = 0.0;
    for (int corner = 0; corner < (1 << dom.d); ++corner) {
      double acc = 0.0;
      for (int a = 0; a < dom.d; ++a) {
        double t = dom.coord(a, (corner >> a) & 1 ? shi[a] : slo[a]) - z[a];
        acc += t * t;
      }
      s = std::max(s, acc);
    }
    auto hi = static_cast<std::int64_t>(std::ceil(std::sqrt(s) / dom.h)) + 1;
    std::int64_t lo = 1;
    while (lo < hi) {
      std::int64_t mid = lo + (hi - lo) / 2;
      if (mass_at(z, static_cast<double>(mid) * dom.h) > 0.5 * total)
        hi = mid;
      else
        lo = mid + 1;
    }
    return static_cast<double>(lo) * dom.h;
  };

  Lambda0 best;
  double best_r = std::numeric_limits<double>::infinity();
  Index idx = klo;
  for (;;) {
    Coord z = dom.point(idx);
    double r = std::max(cover_radius(z), half_mass_radius(z));
    if (r < best_r) {
      best_r = r;
      best.ball = {z, r};
    }
    int a = dom.d - 1;
    while (a >= 0) {
      if (++idx[a] <= khi[a]) break;
      idx[a] = klo[a];
      --a;
    }
    if (a < 0) break;
  }

  double norm1 = total * std::pow(dom.h, dom.d);
  best.lambda0 = std::pow(2.0 * best_r, alpha - dom.d) / (4.0 * unit_ball_volume(dom.d)) * norm1;
  return best;
}

SmallRadiusSets small_radius_sets(const MaximalField& field_j, double lambda0,
                                  const RegionMask& K, double delta, double c) {
  require(field_j.params.delta == 0.0 && field_j.ties_tracked, errc::missing_good_ball,
          "small-radius sets need a delta = 0 field with tie tracking");
  require(c > 1.0, errc::bad_argument, "need c > 1");
  const Domain& src = field_j.source_domain;
  require(K.domain == src, errc::bad_argument, "region domain mismatch");

  SmallRadiusSets out;
  out.E.domain = src;
  out.E.flags.assign(static_cast<std::size_t>(src.size()), 0);
  out.D = out.E;

  const Domain& edom = field_j.values.domain;
  for (std::int64_t ef = 0; ef < edom.size(); ++ef) {
    Index idx = edom.unflat(ef);
    for (int a = 0; a < src.d; ++a) idx[a] += field_j.eval_lo[a];
    std::int64_t sf = src.flat(idx);
    if (!K.test(sf)) continue;
    const GoodBall& gb = field_j.ball(ef);
    // Every tie-optimal ball must be short: the widest tie radius decides.
    if (!(gb.max_tie_radius < delta && gb.value > lambda0)) continue;
    out.E.flags[static_cast<std::size_t>(sf)] = 1;

    BallSpec B = field_j.ball_spec(ef);
    double cr = c * B.radius;
    double cr2 = cr * cr;
    Index blo{}, bhi{};
    for (int a = 0; a < src.d; ++a) {
      blo[a] = std::max<std::int64_t>(
          0, static_cast<std::int64_t>(std::ceil((B.center[a] - cr - src.origin[a]) / src.h)) - 1);
      bhi[a] = std::min<std::int64_t>(
          src.dims[a] - 1,
          static_cast<std::int64_t>(std::floor((B.center[a] + cr - src.origin[a]) / src.h)) + 1);
    }
    Index bidx = blo;
    bool nonempty = true;
    for (int a = 0; a < src.d; ++a) nonempty = nonempty && blo[a] <= bhi[a];
    if (!nonempty) continue;
    for (;;) {
      Coord y = src.point(bidx);
      double d2 = 0.0;
      for (int a = 0; a < src.d; ++a) {
        double t = y[a] - B.center[a];
        d2 += t * t;
      }
      if (d2 <= cr2) out.D.flags[static_cast<std::size_t>(src.flat(bidx))] = 1;
      int a = src.d - 1;
      while (a >= 0) {
        if (++bidx[a] <= bhi[a]) break;
        bidx[a] = blo[a];
        --a;
      }
      if (a < 0) break;
    }
  }
  out.measure_E = out.E.measure();
  out.measure_D = out.D.measure();
  return out;
}

std::vector<double> modulus_convergence(const GridFunction& f,
                                        const std::vector<GridFunction>& seq) {
  GridFunction absf = gf_abs(f);
  std::vector<double> gaps;
  gaps.reserve(seq.size());
  for (const auto& fj : seq) {
    double gap = w11_norm(gf_sub(gf_abs(fj), absf));
    double w11 = w11_norm(gf_sub(fj, f));
    require(gap <= w11 + kCTol * 2.0 * f.domain.h, errc::bad_argument,
            "modulus gap exceeds the W11 gap beyond the discretization tolerance");
    gaps.push_back(gap);
  }
  return gaps;
}

std::vector<double> tail_errors(const GridFunction& f, const std::vector<GridFunction>& seq,
                                double alpha, const RegionMask& K, const RadiusGrid& rgrid,
                                OperatorKind kind, int workers) {
  const Domain& dom = f.domain;
  RegionMask threeK = dilate_box(K, 3.0);
  {
    // 3K must fit strictly inside the box.
    Index klo{}, khi{};
    mask_bbox(K, klo, khi);
    for (int a = 0; a < dom.d; ++a) {
      double c = 0.5 * (dom.coord(a, klo[a]) + dom.coord(a, khi[a]));
      double half = 1.5 * (dom.coord(a, khi[a]) - dom.coord(a, klo[a]));
      require(c - half >= dom.coord(a, 0) && c + half <= dom.coord(a, dom.dims[a] - 1),
              errc::domain_too_small, "3K does not fit in the domain box");
    }
  }
  RegionMask tail = complement(threeK);
  RegionMask halo = dilate_mask_cells(tail, 2);

  FracParams params{alpha, 0.0, kind};
  ComputeOptions copts;
  copts.workers = workers;
  copts.compute_mask = &halo;
  copts.with_ties = false;

  MaximalField base = compute_maximal(f, params, rgrid, copts);
  GradientField gbase = gradient(base.values);
  double q = params.conjugate_exponent(dom.d);

  std::vector<double> out;
  for (const auto& fj : seq) {
    MaximalField fld = compute_maximal(fj, params, rgrid, copts);
    out.push_back(grad_diff_norm(gbase, gradient(fld.values), q, tail));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Driver
// ---------------------------------------------------------------------------

ContinuityRun run_continuity(const GridFunction& f, const ContinuityConfig& cfg) {
  f.validate();
  RegionMask K = cfg.K ? *cfg.K : default_region(f);
  std::vector<GridFunction> seq =
      cfg.sequence_override ? *cfg.sequence_override : make_sequence(f, cfg.seq);
  require(seq.size() == cfg.seq.j_values.size(), errc::bad_argument,
          "sequence length does not match j_values");
  // One shared radius grid covering f and every perturbation (mollification
  // grows the support by 1/j).
  double rmax = required_max_radius(f);
  for (const auto& fj : seq) rmax = std::max(rmax, required_max_radius(fj));
  if (rmax <= 0.0) rmax = f.domain.h * 32;
  RadiusGrid rgrid = make_default_radius_grid(f.domain.h, rmax);

  ContinuityRun run;
  run.params = FracParams{cfg.alpha, 0.0, cfg.kind};
  run.kind = cfg.seq.kind;
  run.j_values = cfg.seq.j_values;
  run.deltas = cfg.deltas;
  for (std::size_t i = 1; i < cfg.deltas.size(); ++i)
    require(cfg.deltas[i] < cfg.deltas[i - 1], errc::bad_argument, "deltas must be descending");

  EvalBox e = padded_box(f.domain, K, 2);
  RegionMask km = mask_on_eval(K, e);
  std::vector<double> fam_deltas = ascending_with_zero(cfg.deltas);
  ComputeOptions copts;
  copts.eval_lo = e.lo;
  copts.eval_hi = e.hi;
  copts.workers = cfg.workers;

  const double q = run.params.conjugate_exponent(f.domain.d);

  std::vector<MaximalField> famF = truncated_family(f, run.params, rgrid, fam_deltas, copts);
  std::vector<GradientField> gF;
  gF.reserve(famF.size());
  for (const auto& fd : famF) gF.push_back(gradient(fd.values));

  // delta curve (descending)
  for (double d : cfg.deltas) {
    auto it = std::lower_bound(fam_deltas.begin(), fam_deltas.end(), d);
    run.delta_curve.push_back(
        grad_diff_norm(gF.front(), gF[static_cast<std::size_t>(it - fam_deltas.begin())], q, km));
  }

  run.modulus_gap = modulus_convergence(f, seq);

  std::optional<MaximalField> field_for_sets;
  for (std::size_t ji = 0; ji < seq.size(); ++ji) {
    const GridFunction& fj = seq[ji];
    run.w11_gap.push_back(w11_norm(gf_sub(fj, f)));
    std::vector<MaximalField> famJ = truncated_family(fj, run.params, rgrid, fam_deltas, copts);
    std::vector<GradientField> gJ;
    gJ.reserve(famJ.size());
    for (const auto& fd : famJ) gJ.push_back(gradient(fd.values));

    double direct = grad_diff_norm(gF.front(), gJ.front(), q, km);
    run.e_j.push_back(direct);

    for (double d : cfg.deltas) {
      auto it = std::lower_bound(fam_deltas.begin(), fam_deltas.end(), d);
      auto di = static_cast<std::size_t>(it - fam_deltas.begin());
      TriangleRow row;
      row.j = cfg.seq.j_values[ji];
      row.delta = d;
      row.term1 = grad_diff_norm(gF.front(), gF[di], q, km);
      row.term2 = grad_diff_norm(gF[di], gJ[di], q, km);
      row.term3 = grad_diff_norm(gJ[di], gJ.front(), q, km);
      row.direct = direct;
      require(row.term1 + row.term2 + row.term3 >= row.direct - 1e-10, errc::bad_argument,
              "triangle inequality violated");
      run.triangle.push_back(row);
    }
    if (cfg.seq.j_values[ji] == cfg.j_for_sets) field_for_sets = famJ.front();
  }

  run.tail_j = tail_errors(f, seq, cfg.alpha, K, rgrid, cfg.kind, cfg.workers);

  // Discretization noise floor: the same gradient computed at h and h/2.
  if (cfg.maker) {
    const Domain& dom = f.domain;
    GridFunction f2 = cfg.maker(dom.h / 2.0);
    bool ok = f2.domain.d == dom.d && f2.domain.h == dom.h / 2.0;
    for (int a = 0; a < dom.d; ++a)
      ok = ok && f2.domain.dims[a] == 2 * (dom.dims[a] - 1) + 1 &&
           f2.domain.origin[a] == dom.origin[a];
    require(ok, errc::bad_argument, "maker must refine the same box");
    RadiusGrid rg2 = make_rgrid_for(f2);
    ComputeOptions c2;
    Index lo2{}, hi2{};
    for (int a = 0; a < dom.d; ++a) {
      lo2[a] = 2 * e.lo[a];
      hi2[a] = 2 * e.hi[a];
    }
    c2.eval_lo = lo2;
    c2.eval_hi = hi2;
    c2.workers = cfg.workers;
    c2.with_ties = false;
    MaximalField half = compute_maximal(f2, run.params, rg2, c2);
    GradientField ghalf = gradient(half.values);
    // Restrict the fine gradient to the coarse points.
    GradientField rest;
    rest.domain = e.dom;
    rest.components.assign(static_cast<std::size_t>(dom.d),
                           std::vector<double>(static_cast<std::size_t>(e.dom.size()), 0.0));
    for (std::int64_t ef = 0; ef < e.dom.size(); ++ef) {
      Index idx = e.dom.unflat(ef);
      Index fi{};
      for (int a = 0; a < dom.d; ++a) fi[a] = 2 * idx[a];
      std::int64_t ff = half.values.domain.flat(fi);
      for (int a = 0; a < dom.d; ++a)
        rest.components[static_cast<std::size_t>(a)][static_cast<std::size_t>(ef)] =
            ghalf.components[static_cast<std::size_t>(a)][static_cast<std::size_t>(ff)];
    }
    run.tau_floor = grad_diff_norm(gF.front(), rest, q, km);
  }

  // lambda0, the K-minimum of the maximal function, and the small-radius sets.
  Lambda0 l0 = lambda0_estimate(f, K, cfg.alpha);
  run.lambda0 = l0.lambda0;
  double minK = std::numeric_limits<double>::infinity();
  std::vector<double> radii_K;
  for (std::int64_t ef = 0; ef < e.dom.size(); ++ef) {
    if (!km.flags[static_cast<std::size_t>(ef)]) continue;
    minK = std::min(minK, famF.front().values.values[static_cast<std::size_t>(ef)]);
    radii_K.push_back(famF.front().ball(ef).radius);
  }
  run.min_K_maximal = minK;
  run.tau_ineq_used = tau_ineq(f.domain.h, quantile(std::move(radii_K), 0.10));

  if (!field_for_sets) {
    SequenceSpec one = cfg.seq;
    one.j_values = {cfg.j_for_sets};
    std::vector<MaximalField> fam =
        truncated_family(make_sequence(f, one).front(), run.params, rgrid, {0.0}, copts);
    field_for_sets = fam.front();
  }
  for (double d : cfg.deltas) {
    SmallRadiusSets s = small_radius_sets(*field_for_sets, run.lambda0, K, d, cfg.c);
    run.small_radius.push_back({d, s.measure_E, s.measure_D});
  }
  if (!run.small_radius.empty()) {
    const double expo =
        static_cast<double>(f.domain.d) / (static_cast<double>(f.domain.d) - cfg.alpha);
    run.c_emp = run.small_radius.front().measure_D / std::pow(cfg.deltas.front(), expo);
  }
  return run;
}

std::vector<std::pair<std::string, bool>> continuity_assertions(const ContinuityRun& run) {
  std::vector<std::pair<std::string, bool>> out;
  auto add = [&](const std::string& name, bool ok) { out.emplace_back(name, ok); };

  bool w11_dec = true;
  for (std::size_t i = 1; i < run.w11_gap.size(); ++i)
    w11_dec = w11_dec && run.w11_gap[i] < run.w11_gap[i - 1];
  add("w11_gap_strictly_decreasing", w11_dec);
  if (run.kind != SequenceKind::translate) {
    // The 1/j translate law saturates at j=1 on narrow inputs (the shift
    // exceeds the support scale), so the 16x decay is a property of the
    // additive and mollified laws only.
    add("w11_gap_final_leq_first_over_16",
        run.w11_gap.back() <= run.w11_gap.front() / 16.0 + 1e-15);
  }

  bool e_mono = true;
  for (std::size_t i = 1; i < run.e_j.size(); ++i)
    e_mono = e_mono && run.e_j[i] <= 1.05 * run.e_j[i - 1];
  add("e_j_nonincreasing_within_5pct", e_mono);
  add("e_j_final_decay",
      run.e_j.back() <= std::max(0.15 * run.e_j.front(), run.tau_floor));

  bool tri = true;
  for (const auto& row : run.triangle)
    tri = tri && row.term1 + row.term2 + row.term3 >= row.direct - 1e-10;
  add("triangle_inequality", tri);

  add("delta_curve_decay",
      run.delta_curve.back() <= 0.1 * run.delta_curve.front() + run.tau_floor + 1e-15);

  add("modulus_gap_final_leq_first_over_8",
      run.modulus_gap.back() <= run.modulus_gap.front() / 8.0 + 1e-15);

  add("tail_final_decay",
      run.tail_j.back() <= std::max(0.25 * run.tail_j.front(), run.tau_floor));

  bool d_mono = true;
  for (std::size_t i = 1; i < run.small_radius.size(); ++i)
    d_mono = d_mono && run.small_radius[i].measure_D <= run.small_radius[i - 1].measure_D + 1e-15;
  add("measure_D_nonincreasing", d_mono);

  add("lambda0_lower_bound", run.min_K_maximal >= run.lambda0 - run.tau_ineq_used);
  return out;
}

}  // namespace maxlab
