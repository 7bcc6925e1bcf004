#include "maxlab/oracle.hpp"

#include <cmath>

namespace maxlab {

namespace {

bool is_power_of_two(int v) { return v >= 1 && (v & (v - 1)) == 0; }

struct Candidate {
  double value = -1.0;
  double radius = 0.0;
  Coord center{};
  bool set = false;
};

// value desc, then radius asc, then center lex asc.
bool better(double v, double r, const Coord& z, const Candidate& best, int d) {
  if (!best.set) return true;
  if (v != best.value) return v > best.value;
  if (r != best.radius) return r < best.radius;
  for (int a = 0; a < d; ++a)
    if (z[a] != best.center[a]) return z[a] < best.center[a];
  return false;
}

}  // namespace

std::vector<double> refine_radii(const RadiusGrid& rgrid, int fine_factor) {
  require(is_power_of_two(fine_factor), errc::bad_argument, "fine_factor must be a power of 2");
  if (fine_factor == 1) return rgrid.radii;
  std::vector<double> out;
  double r0 = rgrid.radii.front();
  for (int m = 1; m < fine_factor; ++m)
    out.push_back(r0 * static_cast<double>(m) / static_cast<double>(fine_factor));
  out.push_back(r0);
  for (std::size_t k = 0; k + 1 < rgrid.radii.size(); ++k) {
    double a = rgrid.radii[k], b = rgrid.radii[k + 1];
    for (int m = 1; m < fine_factor; ++m)
      out.push_back(a + (b - a) * static_cast<double>(m) / static_cast<double>(fine_factor));
    out.push_back(b);
  }
  return out;
}

OracleResult brute_force_maximal(const GridFunction& f, double alpha, double delta,
                                 const Coord& x, OperatorKind kind, const RadiusGrid& rgrid,
                                 const OracleConfig& config) {
  f.validate();
  FracParams params{alpha, delta, kind};
  params.validate(f.domain.d);
  require(is_power_of_two(config.fine_factor), errc::bad_argument,
          "fine_factor must be a power of 2");
  require(config.exhaustive, errc::bad_argument, "the oracle is the exhaustive baseline");

  const Domain& dom = f.domain;
  const int d = dom.d;
  std::vector<double> absv(f.values.size());
  for (std::size_t i = 0; i < absv.size(); ++i) absv[i] = std::abs(f.values[i]);
  LineSumTable table(dom, absv);
  const LineSumTable* tab = config.use_tables ? &table : nullptr;

  std::vector<double> radii = refine_radii(rgrid, config.fine_factor);
  std::vector<double> powr(radii.size());
  for (std::size_t k = 0; k < radii.size(); ++k) powr[k] = std::pow(radii[k], alpha);

  Candidate best;
  auto scan_center = [&](const Coord& z) {
    double d2 = 0.0;
    for (int a = 0; a < d; ++a) {
      double t = x[a] - z[a];
      d2 += t * t;
    }
    for (std::size_t k = 0; k < radii.size(); ++k) {
      double r = radii[k];
      if (r < delta) continue;
      if (kind == OperatorKind::noncentered && r * r < d2) continue;
      BallSum s = ball_sum_raw(dom, absv, tab, z, r);
      if (s.count <= 0) continue;  // empty stencil: not a candidate
      double v = powr[k] * (s.sum / static_cast<double>(s.count));
      if (better(v, r, z, best, d)) {
        best.value = v;
        best.radius = r;
        best.center = z;
        best.set = true;
      }
    }
  };

  if (kind == OperatorKind::centered) {
    scan_center(x);
  } else {
    // In-box lattice refined by fine_factor, in coordinate-lex order.
    const int ff = config.fine_factor;
    const double step = dom.h / static_cast<double>(ff);
    Index n{};
    for (int a = 0; a < d; ++a) n[a] = (dom.dims[a] - 1) * ff + 1;
    Index idx{};
    for (;;) {
      Coord z{};
      for (int a = 0; a < d; ++a) z[a] = dom.origin[a] + static_cast<double>(idx[a]) * step;
      scan_center(z);
      int a = d - 1;
      while (a >= 0) {
        if (++idx[a] < n[a]) break;
        idx[a] = 0;
        --a;
      }
      if (a < 0) break;
    }
  }

  require(best.set, errc::insufficient_radius_grid, "no admissible candidate ball");
  OracleResult res;
  res.value = best.value;
  res.ball = {best.center, best.radius};
  return res;
}

ClosedForm1d closed_form_1d(ClosedFormCase c, double alpha) {
  require(alpha > 0.0 && alpha < 1.0, errc::unsupported_case, "closed forms need alpha in (0,1)");
  ClosedForm1d out;
  switch (c) {
    case ClosedFormCase::triangle_center: {
      // max over r of r^a (1 - r/2), attained at r* = 2a/(a+1).
      double rstar = 2.0 * alpha / (alpha + 1.0);
      out.radius = rstar;
      out.value = std::pow(rstar, alpha) * (1.0 - 0.5 * rstar);
      out.center = 0.0;
      break;
    }
    case ClosedFormCase::indicator_right_centered: {
      // profile r^(a-1)(r-1)/2 increases on [1,3], then r^(a-1): peak at r=3.
      out.radius = 3.0;
      out.value = std::pow(3.0, alpha - 1.0);
      out.center = 2.0;
      break;
    }
    case ClosedFormCase::indicator_right_noncentered: {
      // left-anchored interval (2-2r, 2): r^(a-1)(2r-1)/2 increases to r=3/2.
      out.radius = 1.5;
      out.value = std::pow(1.5, alpha - 1.0);
      out.center = 0.5;
      break;
    }
  }
  return out;
}

}  // namespace maxlab
