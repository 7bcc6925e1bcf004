#include "maxlab/ball.hpp"

#include <algorithm>
#include <cmath>

#include "maxlab/calculus.hpp"

namespace maxlab {

double unit_ball_volume(int d) {
  require(d >= 1, errc::bad_argument, "dimension must be >= 1");
  return std::pow(M_PI, 0.5 * d) / std::tgamma(0.5 * d + 1.0);
}

// ---------------------------------------------------------------------------
// RadiusGrid
// ---------------------------------------------------------------------------

namespace {
void finalize(RadiusGrid& g) {
  g.radii_sq.resize(g.radii.size());
  for (std::size_t k = 0; k < g.radii.size(); ++k) g.radii_sq[k] = g.radii[k] * g.radii[k];
  g.validate();
}
}  // namespace

std::size_t RadiusGrid::index_at_least(double s) const {
  return static_cast<std::size_t>(std::lower_bound(radii.begin(), radii.end(), s) - radii.begin());
}

std::size_t RadiusGrid::index_at_least_sq(double s2) const {
  return static_cast<std::size_t>(std::lower_bound(radii_sq.begin(), radii_sq.end(), s2) -
                                  radii_sq.begin());
}

void RadiusGrid::validate() const {
  require(!radii.empty(), errc::bad_argument, "radius grid is empty");
  require(h_link > 0.0, errc::bad_argument, "radius grid needs its linked spacing");
  require(radii.front() >= h_link * (1.0 - 1e-12), errc::bad_argument,
          "smallest radius must be >= the grid spacing");
  for (std::size_t k = 0; k + 1 < radii.size(); ++k) {
    require(radii[k + 1] > radii[k], errc::bad_argument, "radii must be strictly increasing");
    // Single-spacing steps are admissible below h/rho_step, geometric beyond.
    double bound = 1.0 + std::max(rho_step, h_link / radii[k]);
    require(radii[k + 1] / radii[k] <= bound + 1e-12, errc::bad_argument,
            "radius refinement coarser than the configured step");
  }
}

RadiusGrid make_default_radius_grid(double h, double r_max, double rho_step) {
  require(h > 0.0 && r_max >= h, errc::bad_argument, "need r_max >= h > 0");
  RadiusGrid g;
  g.h_link = h;
  g.rho_step = rho_step;
  for (int k = 1; k <= 16; ++k) {
    double r = h * k;
    if (r > r_max) break;
    g.radii.push_back(r);
  }
  while (g.radii.back() < r_max) {
    double r = g.radii.back() * (1.0 + rho_step);
    g.radii.push_back(std::min(r, r_max));
  }
  finalize(g);
  return g;
}

RadiusGrid make_linear_radius_grid(double h, double r_max) {
  require(h > 0.0 && r_max >= h, errc::bad_argument, "need r_max >= h > 0");
  RadiusGrid g;
  g.h_link = h;
  g.rho_step = 1.0;
  for (std::int64_t k = 1; h * static_cast<double>(k) <= r_max; ++k)
    g.radii.push_back(h * static_cast<double>(k));
  if (g.radii.empty() || g.radii.back() < r_max) g.radii.push_back(r_max);
  finalize(g);
  return g;
}

bool support_bbox(const GridFunction& f, Index& lo, Index& hi) {
  const Domain& dom = f.domain;
  bool any = false;
  for (int a = 0; a < dom.d; ++a) {
    lo[a] = dom.dims[a];
    hi[a] = -1;
  }
  for (std::int64_t fl = 0; fl < dom.size(); ++fl) {
    if (f.values[static_cast<std::size_t>(fl)] == 0.0) continue;
    any = true;
    Index idx = dom.unflat(fl);
    for (int a = 0; a < dom.d; ++a) {
      lo[a] = std::min(lo[a], idx[a]);
      hi[a] = std::max(hi[a], idx[a]);
    }
  }
  return any;
}

namespace {
// Largest |x - s| over corners x of box A and corners s of box B.
double max_corner_distance(const Domain& dom, const Index& alo, const Index& ahi,
                           const Index& blo, const Index& bhi) {
  int d = dom.d;
  double best = 0.0;
  for (int ca = 0; ca < (1 << d); ++ca)
    for (int cb = 0; cb < (1 << d); ++cb) {
      double s = 0.0;
      for (int a = 0; a < d; ++a) {
        double xa = dom.coord(a, (ca >> a) & 1 ? ahi[a] : alo[a]);
        double sa = dom.coord(a, (cb >> a) & 1 ? bhi[a] : blo[a]);
        double t = xa - sa;
        s += t * t;
      }
      best = std::max(best, s);
    }
  return std::sqrt(best);
}
}  // namespace

double required_max_radius(const GridFunction& f, const Index& eval_lo, const Index& eval_hi) {
  Index slo{}, shi{};
  if (!support_bbox(f, slo, shi)) return 0.0;
  return max_corner_distance(f.domain, eval_lo, eval_hi, slo, shi) + 2.0 * f.domain.h;
}

double required_max_radius(const GridFunction& f) {
  Index lo{}, hi{};
  for (int a = 0; a < f.domain.d; ++a) {
    lo[a] = 0;
    hi[a] = f.domain.dims[a] - 1;
  }
  return required_max_radius(f, lo, hi);
}

// ---------------------------------------------------------------------------
// Stencil walk
// ---------------------------------------------------------------------------

LineSumTable::LineSumTable(const Domain& dom, std::span<const double> values) : dom_(dom) {
  line_len_ = dom.dims[dom.d - 1];
  std::int64_t n_lines = dom.size() / line_len_;
  prefix_.resize(static_cast<std::size_t>(n_lines * (line_len_ + 1)));
  for (std::int64_t l = 0; l < n_lines; ++l) {
    const double* v = values.data() + l * line_len_;
    double* p = prefix_.data() + l * (line_len_ + 1);
    double acc = 0.0;
    p[0] = 0.0;
    for (std::int64_t i = 0; i < line_len_; ++i) {
      acc += v[i];
      p[i + 1] = acc;
    }
  }
}

std::span<const double> LineSumTable::line(std::int64_t line_index) const {
  return {prefix_.data() + line_index * (line_len_ + 1),
          static_cast<std::size_t>(line_len_ + 1)};
}

namespace {

// Lattice window on one axis: all integers i with budget2 - (coord(i)-z)^2 >= 0,
// where the comparison is made through the canonical accumulated predicate
// pred(i) = (acc2 + sq(coord(i)-z)) <= r2. The sqrt guess is corrected by
// predicate probes so the window is exactly the predicate's sublevel interval.
struct AxisWindow {
  std::int64_t lo = 0, hi = -1;  // empty when hi < lo
};

inline bool axis_pred(const Domain& dom, int axis, std::int64_t i, double z, double acc2,
                      double r2) {
  double t = dom.coord(axis, i) - z;
  return acc2 + t * t <= r2;
}

AxisWindow axis_window(const Domain& dom, int axis, double z, double acc2, double r2) {
  AxisWindow w;
  double budget = r2 - acc2;
  if (budget < 0.0) return w;
  double half = std::sqrt(budget);
  double o = dom.origin[axis], h = dom.h;
  w.lo = static_cast<std::int64_t>(std::ceil((z - half - o) / h));
  w.hi = static_cast<std::int64_t>(std::floor((z + half - o) / h));
  // Correct the float guess against the canonical predicate.
  while (axis_pred(dom, axis, w.lo - 1, z, acc2, r2)) --w.lo;
  while (w.lo <= w.hi && !axis_pred(dom, axis, w.lo, z, acc2, r2)) ++w.lo;
  while (axis_pred(dom, axis, w.hi + 1, z, acc2, r2)) ++w.hi;
  while (w.hi >= w.lo && !axis_pred(dom, axis, w.hi, z, acc2, r2)) --w.hi;
  if (w.hi < w.lo) {
    // The interval may be empty yet the guess non-empty; probe the best index.
    std::int64_t c = static_cast<std::int64_t>(std::llround((z - o) / h));
    w.lo = c;
    w.hi = c - 1;
    for (std::int64_t i = c - 1; i <= c + 1; ++i)
      if (axis_pred(dom, axis, i, z, acc2, r2)) {
        w.lo = i;
        w.hi = i;
        break;
      }
  }
  return w;
}

struct WalkState {
  const Domain* dom;
  std::span<const double> values;
  const LineSumTable* table;
  const Coord* center;
  double r2;
  double sum;
  std::int64_t count;
};

// Canonical line-span sum: prefix difference, prefixes read from the table or
// recomputed by a left-to-right scan.
double line_span_sum(const WalkState& st, std::int64_t line_index, std::int64_t a,
                     std::int64_t b) {
  if (st.table) {
    auto p = st.table->line(line_index);
    return p[static_cast<std::size_t>(b + 1)] - p[static_cast<std::size_t>(a)];
  }
  std::int64_t line_len = st.dom->dims[st.dom->d - 1];
  const double* v = st.values.data() + line_index * line_len;
  double acc = 0.0, pa = 0.0;
  for (std::int64_t i = 0; i <= b; ++i) {
    if (i == a) pa = acc;
    acc += v[i];
  }
  if (a == 0) pa = 0.0;
  return acc - pa;
}

void walk_axis(WalkState& st, int axis, double acc2, std::int64_t line_index, bool in_box) {
  const Domain& dom = *st.dom;
  const int last = dom.d - 1;
  if (axis == last) {
    AxisWindow w = axis_window(dom, axis, (*st.center)[axis], acc2, st.r2);
    if (w.hi < w.lo) return;
    st.count += w.hi - w.lo + 1;
    if (!in_box || st.values.empty()) return;
    std::int64_t a = std::max<std::int64_t>(w.lo, 0);
    std::int64_t b = std::min<std::int64_t>(w.hi, dom.dims[axis] - 1);
    if (a > b) return;
    st.sum += line_span_sum(st, line_index, a, b);
    return;
  }
  AxisWindow w = axis_window(dom, axis, (*st.center)[axis], acc2, st.r2);
  for (std::int64_t i = w.lo; i <= w.hi; ++i) {
    double t = dom.coord(axis, i) - (*st.center)[axis];
    bool ib = in_box && i >= 0 && i < dom.dims[axis];
    walk_axis(st, axis + 1, acc2 + t * t, line_index * dom.dims[axis] + (ib ? i : 0), ib);
  }
}

}  // namespace

BallSum ball_sum_raw(const Domain& dom, std::span<const double> values, const LineSumTable* table,
                     const Coord& center, double r) {
  WalkState st{&dom, values, table, &center, r * r, 0.0, 0};
  walk_axis(st, 0, 0.0, 0, true);
  return {st.sum, st.count};
}

std::int64_t lattice_count(const Domain& dom, const Coord& center, double r) {
  WalkState st{&dom, {}, nullptr, &center, r * r, 0.0, 0};
  walk_axis(st, 0, 0.0, 0, true);
  return st.count;
}

// ---------------------------------------------------------------------------
// Averages
// ---------------------------------------------------------------------------

namespace {

std::vector<double> transformed_values(const GridFunction& f, AverageMode mode) {
  std::vector<double> v;
  switch (mode.kind) {
    case AverageMode::abs_value: {
      v.resize(f.values.size());
      for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::abs(f.values[i]);
      break;
    }
    case AverageMode::signed_value:
      v = f.values;
      break;
    case AverageMode::gradient_component: {
      require(mode.component >= 0 && mode.component < f.domain.d, errc::bad_argument,
              "gradient component out of range");
      GradientField g = gradient(f);
      v = g.components[static_cast<std::size_t>(mode.component)];
      break;
    }
  }
  return v;
}

}  // namespace

double ball_average(const GridFunction& f, const BallSpec& ball, AverageMode mode) {
  require(ball.radius > 0.0, errc::bad_argument, "ball radius must be positive");
  std::vector<double> v = transformed_values(f, mode);
  BallSum s = ball_sum_raw(f.domain, v, nullptr, ball.center, ball.radius);
  require(s.count > 0, errc::empty_stencil, "no lattice point inside the ball");
  return s.sum / static_cast<double>(s.count);
}

struct BallAverager::Impl {
  GridFunction f;
  // slot 0: |f|, slot 1: f, slots 2..: gradient components
  mutable std::vector<std::unique_ptr<std::vector<double>>> values;
  mutable std::vector<std::unique_ptr<LineSumTable>> tables;

  std::size_t slot(AverageMode mode) const {
    switch (mode.kind) {
      case AverageMode::abs_value: return 0;
      case AverageMode::signed_value: return 1;
      case AverageMode::gradient_component: return 2 + static_cast<std::size_t>(mode.component);
    }
    return 0;
  }
  void ensure(AverageMode mode) const {
    std::size_t s = slot(mode);
    if (s >= values.size()) {
      values.resize(s + 1);
      tables.resize(s + 1);
    }
    if (!values[s]) {
      values[s] = std::make_unique<std::vector<double>>(transformed_values(f, mode));
      tables[s] = std::make_unique<LineSumTable>(f.domain, *values[s]);
    }
  }
};

BallAverager::BallAverager(const GridFunction& f) : impl_(std::make_unique<Impl>()) {
  impl_->f = f;
}
BallAverager::~BallAverager() = default;
BallAverager::BallAverager(BallAverager&&) noexcept = default;

const GridFunction& BallAverager::source() const { return impl_->f; }

BallSum BallAverager::sum(const BallSpec& ball, AverageMode mode) const {
  impl_->ensure(mode);
  std::size_t s = impl_->slot(mode);
  return ball_sum_raw(impl_->f.domain, *impl_->values[s], impl_->tables[s].get(), ball.center,
                      ball.radius);
}

double BallAverager::average(const BallSpec& ball, AverageMode mode) const {
  require(ball.radius > 0.0, errc::bad_argument, "ball radius must be positive");
  BallSum s = sum(ball, mode);
  require(s.count > 0, errc::empty_stencil, "no lattice point inside the ball");
  return s.sum / static_cast<double>(s.count);
}

// ---------------------------------------------------------------------------

double SuffixMaxProfile::eval(double s) const {
  auto it = std::lower_bound(radii.begin(), radii.end(), s);
  if (it == radii.end()) return 0.0;
  return values[static_cast<std::size_t>(it - radii.begin())];
}

SuffixMaxProfile suffix_max_profile(const GridFunction& f, const Index& center, double alpha,
                                    const RadiusGrid& rgrid) {
  require(alpha > 0.0 && alpha < f.domain.d, errc::invalid_alpha, "need 0 < alpha < d");
  std::vector<double> absv(f.values.size());
  for (std::size_t i = 0; i < absv.size(); ++i) absv[i] = std::abs(f.values[i]);
  LineSumTable table(f.domain, absv);
  Coord z = f.domain.point(center);

  SuffixMaxProfile prof;
  prof.radii = rgrid.radii;
  prof.values.resize(rgrid.size());
  double running = 0.0;
  for (std::size_t k = rgrid.size(); k-- > 0;) {
    BallSum s = ball_sum_raw(f.domain, absv, &table, z, rgrid.radii[k]);
    double val = s.count > 0
                     ? std::pow(rgrid.radii[k], alpha) * (s.sum / static_cast<double>(s.count))
                     : 0.0;
    running = std::max(running, val);
    prof.values[k] = running;
  }
  return prof;
}

}  // namespace maxlab
