#include <doctest.h>

#include <cmath>
#include <random>

#include "maxlab/corpus.hpp"
#include "maxlab/maximal.hpp"
#include "maxlab/oracle.hpp"

using namespace maxlab;

namespace {

MaximalField at_single_point(const GridFunction& f, const FracParams& p, const RadiusGrid& rg,
                             const Index& idx, bool ties = true) {
  ComputeOptions opts;
  opts.eval_lo = idx;
  opts.eval_hi = idx;
  opts.with_ties = ties;
  return compute_maximal(f, p, rg, opts);
}

}  // namespace

TEST_SUITE_BEGIN("maximal");

TEST_CASE("zero function: zero field, zero good balls") {
  GridFunction f = make_zero(corpus_domain(1, 1.0 / 64));
  RadiusGrid rg = make_default_radius_grid(f.domain.h, 1.0);
  for (auto kind : {OperatorKind::centered, OperatorKind::noncentered}) {
    MaximalField fld = compute_maximal(f, FracParams{0.5, 0.0, kind}, rg);
    for (std::size_t i = 0; i < fld.values.values.size(); ++i) {
      CHECK(fld.values.values[i] == 0.0);
      CHECK(fld.balls[i].value == 0.0);
    }
  }
}

TEST_CASE("alpha out of range is rejected") {
  GridFunction f = corpus_function("triangle", 1, 1.0 / 64);
  RadiusGrid rg = make_rgrid_for(f);
  CHECK_THROWS_AS(compute_maximal(f, FracParams{1.5, 0.0, OperatorKind::centered}, rg), error);
  CHECK_THROWS_AS(compute_maximal(f, FracParams{0.0, 0.0, OperatorKind::centered}, rg), error);
}

TEST_CASE("insufficient radius grid is rejected") {
  GridFunction f = corpus_function("triangle", 1, 1.0 / 64);
  RadiusGrid small = make_default_radius_grid(f.domain.h, 0.5);
  CHECK_THROWS_AS(compute_maximal(f, FracParams{0.5, 0.0, OperatorKind::centered}, small), error);
  try {
    compute_maximal(f, FracParams{0.5, 0.0, OperatorKind::centered}, small);
  } catch (const error& e) {
    CHECK(e.code() == errc::insufficient_radius_grid);
  }
}

TEST_CASE("triangle centered closed form at x=0") {
  double h = 1.0 / 1024;
  GridFunction f = corpus_function("triangle", 1, h);
  RadiusGrid rg = make_linear_radius_grid(h, required_max_radius(f));
  Index x0{};
  x0[0] = 4096;
  MaximalField fld = at_single_point(f, FracParams{0.5, 0.0, OperatorKind::centered}, rg, x0);
  double want = std::pow(2.0 / 3.0, 1.5);
  CHECK(std::abs(fld.values.values[0] - want) <= 10 * h);
  CHECK(std::abs(fld.ball(0).radius - 2.0 / 3.0) <= 10 * std::sqrt(h));
  // minus1 at the center: value over radius of the maximizer
  CHECK(std::abs(fld.ball(0).minus1 - std::sqrt(2.0 / 3.0)) <= 10 * std::sqrt(h));
}

TEST_CASE("indicator closed forms at x=2 (centered and non-centered)") {
  double h = 1.0 / 512;
  GridFunction f = corpus_function("indicator_ball", 1, h);
  RadiusGrid rg = make_linear_radius_grid(h, required_max_radius(f));
  Index x2{};
  x2[0] = 3072;
  MaximalField c = at_single_point(f, FracParams{0.5, 0.0, OperatorKind::centered}, rg, x2);
  CHECK(std::abs(c.values.values[0] - 1.0 / std::sqrt(3.0)) <= 10 * h);
  CHECK(std::abs(c.ball(0).radius - 3.0) <= 10 * std::sqrt(h));

  MaximalField n =
      at_single_point(f, FracParams{0.5, 0.0, OperatorKind::noncentered}, rg, x2, false);
  CHECK(std::abs(n.values.values[0] - std::sqrt(2.0 / 3.0)) <= 10 * h);
  BallSpec ball = n.ball_spec(0);
  CHECK(std::abs(ball.radius - 1.5) <= 10 * std::sqrt(h));
  CHECK(std::abs(ball.center[0] - 0.5) <= 10 * std::sqrt(h));
}

TEST_CASE("indicator ball d=2: unit value at the center") {
  double h = 1.0 / 64;
  GridFunction f = corpus_function("indicator_ball", 2, h);
  RadiusGrid rg = make_rgrid_for(f);
  Index c{};
  c[0] = c[1] = 256;
  MaximalField fld = at_single_point(f, FracParams{0.5, 0.0, OperatorKind::centered}, rg, c);
  CHECK(std::abs(fld.values.values[0] - 1.0) <= 5 * h);
  CHECK(std::abs(fld.ball(0).radius - 1.0) <= 5 * h);
}

TEST_CASE("argmax consistency and the supremum property") {
  GridFunction f = corpus_function("gaussian_bump", 2, 1.0 / 16);
  RadiusGrid rg = make_rgrid_for(f);
  FracParams p{0.5, 0.0, OperatorKind::centered};
  MaximalField fld = compute_maximal(f, p, rg);
  BallAverager avg(f);
  std::mt19937_64 rng(101);
  std::uniform_int_distribution<std::int64_t> pick(0, f.domain.size() - 1);
  std::uniform_int_distribution<std::size_t> pick_r(0, rg.size() - 1);
  for (std::int64_t ef = 0; ef < fld.values.domain.size(); ++ef)
    CHECK(fld.values.values[static_cast<std::size_t>(ef)] == fld.ball(ef).value);
  for (int it = 0; it < 1000; ++it) {
    std::int64_t xf = pick(rng);
    std::size_t k = pick_r(rng);
    Coord x = f.domain.point(f.domain.unflat(xf));
    double cand = std::pow(rg.radii[k], 0.5) *
                  avg.average({x, rg.radii[k]}, AverageMode::absolute());
    CHECK(fld.values.values[static_cast<std::size_t>(xf)] >= cand - 1e-12);
  }
}

TEST_CASE("noncentered dominates centered") {
  GridFunction f = corpus_function("two_bumps", 2, 1.0 / 16);
  RadiusGrid rg = make_rgrid_for(f);
  MaximalField c = compute_maximal(f, FracParams{0.5, 0.0, OperatorKind::centered}, rg);
  ComputeOptions opts;
  opts.with_ties = false;  // values only
  MaximalField n = compute_maximal(f, FracParams{0.5, 0.0, OperatorKind::noncentered}, rg, opts);
  for (std::size_t i = 0; i < c.values.values.size(); ++i)
    CHECK(n.values.values[i] >= c.values.values[i] - 1e-12);
}

TEST_CASE("pruned and exhaustive engines agree bitwise") {
  for (int d : {1, 2}) {
    GridFunction f = corpus_function("two_bumps", d, d == 1 ? 1.0 / 128 : 1.0 / 8);
    RadiusGrid rg = make_rgrid_for(f);
    for (auto kind : {OperatorKind::centered, OperatorKind::noncentered}) {
      FracParams p{0.75, 0.0, kind};
      ComputeOptions a, b;
      // the quadratic tie pass is for desk-scale fields; skip it on the finer grid
      a.with_ties = b.with_ties = !(d == 2 && kind == OperatorKind::noncentered) || f.domain.dims[0] <= 70;
      b.exhaustive = true;
      MaximalField fa = compute_maximal(f, p, rg, a);
      MaximalField fb = compute_maximal(f, p, rg, b);
      REQUIRE(fa.values.values.size() == fb.values.values.size());
      for (std::size_t i = 0; i < fa.values.values.size(); ++i) {
        CHECK(fa.values.values[i] == fb.values.values[i]);
        CHECK(fa.balls[i].center_flat == fb.balls[i].center_flat);
        CHECK(fa.balls[i].radius == fb.balls[i].radius);
        CHECK(fa.balls[i].tie_count == fb.balls[i].tie_count);
        CHECK(fa.balls[i].min_tie_radius == fb.balls[i].min_tie_radius);
        CHECK(fa.balls[i].max_tie_radius == fb.balls[i].max_tie_radius);
        CHECK(fa.balls[i].minus1 == fb.balls[i].minus1);
      }
    }
  }
}

TEST_CASE("truncated family: identity at delta 0, antitone in delta") {
  GridFunction f = corpus_function("gaussian_bump", 1, 1.0 / 256);
  RadiusGrid rg = make_rgrid_for(f);
  FracParams p{0.5, 0.0, OperatorKind::centered};
  std::vector<double> deltas{0.0, 0.25, 0.5, 1.0};
  std::vector<MaximalField> fam = truncated_family(f, p, rg, deltas);
  MaximalField plain = compute_maximal(f, p, rg);
  for (std::size_t i = 0; i < plain.values.values.size(); ++i) {
    CHECK(fam[0].values.values[i] == plain.values.values[i]);
    for (std::size_t k = 1; k < fam.size(); ++k)
      CHECK(fam[k].values.values[i] <= fam[k - 1].values.values[i]);
  }
  for (const auto& fd : fam)
    if (fd.params.delta > 0.0)
      for (std::size_t i = 0; i < fd.balls.size(); ++i)
        CHECK(fd.balls[i].radius >= fd.params.delta);
}

TEST_CASE("truncated triangle at delta 1") {
  double h = 1.0 / 512;
  GridFunction f = corpus_function("triangle", 1, h);
  RadiusGrid rg = make_linear_radius_grid(h, required_max_radius(f));
  Index x0{};
  x0[0] = 2048;
  ComputeOptions opts;
  opts.eval_lo = x0;
  opts.eval_hi = x0;
  std::vector<MaximalField> fam =
      truncated_family(f, FracParams{0.5, 0.0, OperatorKind::centered}, rg, {1.0}, opts);
  CHECK(std::abs(fam[0].values.values[0] - 0.5) <= 10 * h);
  CHECK(std::abs(fam[0].ball(0).radius - 1.0) <= 2 * h);
}

TEST_CASE("noncentered truncated family matches single-delta runs") {
  GridFunction f = corpus_function("gaussian_bump", 1, 1.0 / 128);
  RadiusGrid rg = make_rgrid_for(f);
  FracParams p{0.5, 0.0, OperatorKind::noncentered};
  ComputeOptions opts;
  opts.with_ties = false;
  std::vector<MaximalField> fam = truncated_family(f, p, rg, {0.0, 0.3}, opts);
  FracParams pd = p;
  pd.delta = 0.3;
  MaximalField single = compute_maximal(f, pd, rg, opts);
  for (std::size_t i = 0; i < single.values.values.size(); ++i) {
    CHECK(fam[1].values.values[i] == single.values.values[i]);
    CHECK(fam[1].balls[i].radius == single.balls[i].radius);
    CHECK(fam[1].values.values[i] <= fam[0].values.values[i]);
  }
}

TEST_CASE("dilation covariance under halving the grid") {
  for (int d : {1, 2}) {
    GridFunction f = corpus_function("gaussian_bump", d, d == 1 ? 1.0 / 256 : 1.0 / 32);
    RadiusGrid rg = make_rgrid_for(f);
    FracParams p{0.5, 0.0, OperatorKind::centered};
    MaximalField base = compute_maximal(f, p, rg);

    GridFunction f2 = f;  // f_2(x) = f(2x): same samples on the halved box
    f2.domain.h = f.domain.h / 2;
    for (int a = 0; a < d; ++a) f2.domain.origin[a] = f.domain.origin[a] / 2;
    RadiusGrid rg2 = rg;
    rg2.h_link /= 2;
    for (std::size_t k = 0; k < rg2.radii.size(); ++k) {
      rg2.radii[k] /= 2;
      rg2.radii_sq[k] = rg2.radii[k] * rg2.radii[k];
    }
    MaximalField scaled = compute_maximal(f2, p, rg2);
    double lam = std::pow(2.0, -0.5);
    for (std::size_t i = 0; i < base.values.values.size(); ++i)
      CHECK(std::abs(scaled.values.values[i] - lam * base.values.values[i]) <= 1e-12);
  }
}

TEST_CASE("truncated fields are Lipschitz with an h-stable constant") {
  auto lip = [](double h) {
    GridFunction f = corpus_function("triangle", 1, h);
    RadiusGrid rg = make_rgrid_for(f);
    MaximalField fld =
        compute_maximal(f, FracParams{0.5, 0.5, OperatorKind::centered}, rg);
    double worst = 0.0;
    for (std::size_t i = 0; i + 1 < fld.values.values.size(); ++i)
      worst = std::max(worst,
                       std::abs(fld.values.values[i + 1] - fld.values.values[i]) / h);
    return worst;
  };
  double a = lip(1.0 / 128), b = lip(1.0 / 256);
  CHECK(std::max(a, b) / std::min(a, b) <= 1.5);
}

TEST_CASE("tie metadata brackets the recorded ball") {
  for (int d : {1, 2}) {
  GridFunction f = corpus_function("two_bumps", d, d == 1 ? 1.0 / 128 : 1.0 / 4);
  RadiusGrid rg = make_rgrid_for(f);
  for (auto kind : {OperatorKind::centered, OperatorKind::noncentered}) {
    MaximalField fld = compute_maximal(f, FracParams{0.5, 0.0, kind}, rg);
    REQUIRE(fld.ties_tracked);
    for (std::size_t i = 0; i < fld.balls.size(); ++i) {
      const GoodBall& gb = fld.balls[i];
      CHECK(gb.tie_count >= 1);
      CHECK(gb.min_tie_radius <= gb.radius);
      CHECK(gb.max_tie_radius >= gb.radius);
      CHECK(gb.minus1 >= gb.value / gb.max_tie_radius - 1e-12);
    }
  }
  }
}

TEST_CASE("refined operator: preconditions and the zero function") {
  GridFunction f = corpus_function("gaussian_bump", 1, 1.0 / 128);
  RadiusGrid rg = make_rgrid_for(f);
  MaximalField trunc = compute_maximal(f, FracParams{0.5, 0.25, OperatorKind::centered}, rg);
  CHECK_THROWS_AS(refined_maximal_minus1(f, trunc), error);

  GridFunction z = make_zero(f.domain);
  MaximalField zf = compute_maximal(z, FracParams{0.5, 0.0, OperatorKind::centered},
                                    make_default_radius_grid(z.domain.h, 1.0));
  GridFunction m1 = refined_maximal_minus1(z, zf);
  for (double v : m1.values) CHECK(v == 0.0);
}

TEST_CASE("worker count does not change the field") {
  GridFunction f = corpus_function("two_bumps", 2, 1.0 / 16);
  RadiusGrid rg = make_rgrid_for(f);
  for (auto kind : {OperatorKind::centered, OperatorKind::noncentered}) {
    ComputeOptions w1, w4;
    w1.workers = 1;
    w4.workers = 4;
    w1.with_ties = w4.with_ties = kind == OperatorKind::centered;
    MaximalField a = compute_maximal(f, FracParams{0.25, 0.0, kind}, rg, w1);
    MaximalField b = compute_maximal(f, FracParams{0.25, 0.0, kind}, rg, w4);
    for (std::size_t i = 0; i < a.values.values.size(); ++i) {
      CHECK(a.values.values[i] == b.values.values[i]);
      CHECK(a.balls[i].center_flat == b.balls[i].center_flat);
      CHECK(a.balls[i].radius == b.balls[i].radius);
      CHECK(a.balls[i].tie_count == b.balls[i].tie_count);
    }
  }
}

TEST_CASE("d=3 fields agree with the oracle") {
  Domain dom = make_domain(3, 17, 0.25, -2.0);
  ShapeParams p;
  p.sigma = 0.1;  // support radius ~0.74, comfortably inside the margin
  GridFunction f = make_test_function(TestFunctionKind::gaussian_bump, dom, p);
  RadiusGrid rg = make_rgrid_for(f);
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<std::int64_t> pick(0, dom.size() - 1);
  for (auto kind : {OperatorKind::centered, OperatorKind::noncentered}) {
    ComputeOptions opts;
    opts.with_ties = false;
    MaximalField fld = compute_maximal(f, FracParams{1.5, 0.0, kind}, rg, opts);
    for (int it = 0; it < 4; ++it) {
      std::int64_t xf = pick(rng);
      Coord x = dom.point(dom.unflat(xf));
      OracleResult orc = brute_force_maximal(f, 1.5, 0.0, x, kind, rg, {1, true, true});
      CHECK(orc.value == fld.values.values[static_cast<std::size_t>(xf)]);
      CHECK(orc.ball.radius == fld.ball_spec(xf).radius);
    }
  }
}

TEST_CASE("good-ball sidecar round trip") {
  GridFunction f = corpus_function("gaussian_bump", 2, 1.0 / 8);
  RadiusGrid rg = make_rgrid_for(f);
  MaximalField fld = compute_maximal(f, FracParams{0.5, 0.0, OperatorKind::centered}, rg);
  std::string path = "/tmp/maxlab_test_sidecar.mfgb";
  write_good_ball_sidecar(fld, path);
  std::vector<SidecarEntry> entries = read_good_ball_sidecar(path);
  REQUIRE(entries.size() == fld.balls.size());
  for (std::size_t i = 0; i < entries.size(); ++i) {
    CHECK(entries[i].radius == fld.balls[i].radius);
    CHECK(entries[i].value == fld.balls[i].value);
    Index c = fld.source_domain.unflat(fld.balls[i].center_flat);
    CHECK(entries[i].center[0] == c[0]);
    CHECK(entries[i].center[1] == c[1]);
  }
}

TEST_SUITE_END();
