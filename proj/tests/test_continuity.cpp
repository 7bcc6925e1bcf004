#include <doctest.h>

#include <cmath>

#include "maxlab/continuity.hpp"
#include "maxlab/corpus.hpp"
#include "maxlab/report.hpp"

using namespace maxlab;

TEST_SUITE_BEGIN("continuity");

TEST_CASE("additive sequence gaps are exactly proportional to 1/j") {
  GridFunction f = corpus_function("gaussian_bump", 1, 1.0 / 512);
  SequenceSpec spec;
  spec.j_values = {1, 2, 4, 8, 16, 32};
  std::vector<GridFunction> seq = make_sequence(f, spec);
  std::vector<double> gaps;
  for (const auto& fj : seq) gaps.push_back(w11_norm(gf_sub(fj, f)));
  for (std::size_t i = 0; i < gaps.size(); ++i) {
    double expected = gaps.front() / spec.j_values[i];
    CHECK(std::abs(gaps[i] - expected) <= 1e-12);
  }
  CHECK(gaps.front() == doctest::Approx(1.0).epsilon(1e-9));  // unit-W11 bump
  for (std::size_t i = 1; i < gaps.size(); ++i) CHECK(gaps[i] < gaps[i - 1]);
  CHECK(gaps.back() <= gaps.front() / 16.0 + 1e-15);
}

TEST_CASE("mollified sequence converges fast") {
  GridFunction f = corpus_function("gaussian_bump", 1, 1.0 / 512);
  SequenceSpec spec;
  spec.kind = SequenceKind::mollify;
  std::vector<GridFunction> seq = make_sequence(f, spec);
  double first = w11_norm(gf_sub(seq.front(), f));
  double last = w11_norm(gf_sub(seq.back(), f));
  CHECK(last <= first / 16.0);
}

TEST_CASE("translate sequence: snapped shifts and the margin guard") {
  GridFunction f = corpus_function("gaussian_bump", 1, 1.0 / 256);
  SequenceSpec spec;
  spec.kind = SequenceKind::translate;
  std::vector<GridFunction> seq = make_sequence(f, spec);
  std::vector<double> gaps;
  for (const auto& fj : seq) gaps.push_back(w11_norm(gf_sub(fj, f)));
  for (std::size_t i = 1; i < gaps.size(); ++i) CHECK(gaps[i] < gaps[i - 1]);

  // the shift stays in the linear regime on the triangle: full 16x decay there
  GridFunction tri = corpus_function("triangle", 1, 1.0 / 256);
  std::vector<GridFunction> tseq = make_sequence(tri, spec);
  CHECK(w11_norm(gf_sub(tseq.back(), tri)) <=
        w11_norm(gf_sub(tseq.front(), tri)) / 16.0);

  // support close to the right face: the j=1 shift overflows
  Domain dom = make_domain(1, 257, 1.0 / 32, -4.0);
  GridFunction g = make_zero(dom);
  Index i{};
  i[0] = 250;
  g.at(i) = 1.0;
  CHECK_THROWS_AS(make_sequence(g, spec), error);
}

TEST_CASE("delta decomposition: degenerate cases and the triangle inequality") {
  GridFunction f = corpus_function("gaussian_bump", 1, 1.0 / 256);
  RadiusGrid rg = make_rgrid_for(f);
  RegionMask K = default_region(f);

  DeltaDecomposition same =
      delta_decomposition(f, f, 0.5, 0.25, K, rg, OperatorKind::centered);
  CHECK(same.term2 == 0.0);
  CHECK(same.term1 == same.term3);
  CHECK(same.direct == 0.0);

  // delta equal to the smallest grid radius: no truncation bites
  SequenceSpec spec;
  GridFunction fj = make_sequence(f, spec)[3];
  DeltaDecomposition tiny =
      delta_decomposition(f, fj, 0.5, f.domain.h, K, rg, OperatorKind::centered);
  CHECK(tiny.term1 == 0.0);
  CHECK(tiny.term3 == 0.0);

  DeltaDecomposition full =
      delta_decomposition(f, fj, 0.5, 0.25, K, rg, OperatorKind::centered);
  CHECK(full.term1 + full.term2 + full.term3 >= full.direct - 1e-10);
}

TEST_CASE("delta curve: exact zero below the minimal good radius, decay above") {
  GridFunction f = corpus_function("gaussian_bump", 1, 1.0 / 512);
  RadiusGrid rg = make_rgrid_for(f);
  RegionMask K = default_region(f);
  std::vector<double> deltas{1.0, 0.5, 0.25, 0.125, 1.0 / 64};
  std::vector<double> curve =
      delta_convergence_curve(f, 0.5, K, deltas, rg, OperatorKind::centered);
  for (std::size_t i = 1; i < curve.size(); ++i) CHECK(curve[i] <= curve[i - 1]);
  CHECK(curve.front() > 0.0);
  CHECK(curve.back() == 0.0);  // argmax radii over K sit well above 1/64
  CHECK_THROWS_AS(
      delta_convergence_curve(f, 0.5, K, {0.5, 1.0}, rg, OperatorKind::centered), error);
}

TEST_CASE("lambda0: the half-mass ball of the indicator") {
  double h = 1.0 / 64;
  GridFunction f = corpus_function("indicator_ball", 2, h);
  Index c{};
  c[0] = c[1] = 256;
  RegionMask K = box_mask(f.domain, c, c);
  Lambda0 l0 = lambda0_estimate(f, K, 0.5);
  CHECK(l0.ball.center[0] == 0.0);
  CHECK(l0.ball.center[1] == 0.0);
  CHECK(std::abs(l0.ball.radius - std::sqrt(0.5)) <= 3 * h);
  // direct evaluation of the display
  double norm1 = lq_norm(f, 1.0);
  double expect = std::pow(2.0 * l0.ball.radius, 0.5 - 2.0) / (4.0 * M_PI) * norm1;
  CHECK(l0.lambda0 == doctest::Approx(expect).epsilon(1e-12));

  Lambda0 l0s = lambda0_estimate(gf_scale(f, 3.0), K, 0.5);
  CHECK(l0s.lambda0 == doctest::Approx(3.0 * l0.lambda0).epsilon(1e-12));

  CHECK_THROWS_AS(lambda0_estimate(make_zero(f.domain), K, 0.5), error);
}

TEST_CASE("small-radius sets: empty cases and shrinkage") {
  GridFunction f = corpus_function("gaussian_bump", 1, 1.0 / 256);
  RadiusGrid rg = make_rgrid_for(f);
  RegionMask K = default_region(f);
  MaximalField fld = compute_maximal(f, FracParams{0.5, 0.0, OperatorKind::centered}, rg);
  Lambda0 l0 = lambda0_estimate(f, K, 0.5);

  double min_good = 1e9;
  for (const auto& gb : fld.balls) min_good = std::min(min_good, gb.max_tie_radius);
  SmallRadiusSets below = small_radius_sets(fld, l0.lambda0, K, 0.5 * min_good, 2.0);
  CHECK(below.measure_E == 0.0);
  CHECK(below.measure_D == 0.0);

  SmallRadiusSets high_bar = small_radius_sets(fld, 1e9, K, 1.0, 2.0);
  CHECK(high_bar.measure_E == 0.0);

  SmallRadiusSets a = small_radius_sets(fld, l0.lambda0, K, 0.5, 2.0);
  SmallRadiusSets b = small_radius_sets(fld, l0.lambda0, K, 0.25, 2.0);
  CHECK(b.measure_D <= a.measure_D);
  CHECK(a.measure_D >= a.measure_E);
}

TEST_CASE("modulus convergence: nonnegative corpus and the flipped sign") {
  GridFunction f = corpus_function("gaussian_bump", 1, 1.0 / 256);
  SequenceSpec spec;
  std::vector<GridFunction> seq = make_sequence(f, spec);
  std::vector<double> gaps = modulus_convergence(f, seq);
  for (std::size_t i = 0; i < seq.size(); ++i)
    CHECK(gaps[i] == w11_norm(gf_sub(seq[i], f)));  // all signs positive

  std::vector<GridFunction> flipped{gf_scale(f, -1.0)};
  GridFunction fcopy = f;
  std::vector<double> g2 = modulus_convergence(fcopy, flipped);
  CHECK(g2[0] == 0.0);  // | -f | == |f|
}

TEST_CASE("tail errors: identical sequence and the 3K guard") {
  GridFunction f = corpus_function("gaussian_bump", 1, 1.0 / 256);
  RadiusGrid rg = make_rgrid_for(f);
  RegionMask K = default_region(f);
  std::vector<GridFunction> same{f, f};
  std::vector<double> tails = tail_errors(f, same, 0.5, K, rg, OperatorKind::centered);
  CHECK(tails[0] == 0.0);
  CHECK(tails[1] == 0.0);

  Coord lo{{-3.5}}, hi{{3.5}};
  RegionMask huge = box_mask_physical(f.domain, lo, hi);
  CHECK_THROWS_AS(tail_errors(f, same, 0.5, huge, rg, OperatorKind::centered), error);
}

TEST_CASE("full run: assertions, homogeneity and determinism (d=1)") {
  GridFunction f = corpus_function("gaussian_bump", 1, 1.0 / 256);
  ContinuityConfig cfg;
  cfg.alpha = 0.5;
  cfg.workers = 1;
  cfg.maker = [](double h) { return corpus_function("gaussian_bump", 1, h); };
  ContinuityRun run = run_continuity(f, cfg);
  for (const auto& [name, ok] : continuity_assertions(run)) {
    INFO(name);
    CHECK(ok);
  }
  CHECK(run.e_j.front() > 0.0);
  CHECK(run.tau_floor > 0.0);

  // 1-homogeneity: scale f and the whole sequence by 3
  ContinuityConfig cfg3 = cfg;
  cfg3.maker = [](double h) { return gf_scale(corpus_function("gaussian_bump", 1, h), 3.0); };
  std::vector<GridFunction> seq = make_sequence(f, cfg.seq);
  std::vector<GridFunction> seq3;
  for (const auto& fj : seq) seq3.push_back(gf_scale(fj, 3.0));
  cfg3.sequence_override = seq3;
  ContinuityRun run3 = run_continuity(gf_scale(f, 3.0), cfg3);
  for (std::size_t i = 0; i < run.e_j.size(); ++i)
    CHECK(std::abs(run3.e_j[i] - 3.0 * run.e_j[i]) <=
          1e-12 * std::max(1.0, 3.0 * run.e_j[i]));
  for (std::size_t i = 0; i < run.tail_j.size(); ++i)
    CHECK(std::abs(run3.tail_j[i] - 3.0 * run.tail_j[i]) <=
          1e-12 * std::max(1.0, 3.0 * run.tail_j[i]));

  // bitwise determinism across worker counts
  ContinuityConfig cfg4 = cfg;
  cfg4.workers = 4;
  ContinuityRun run4 = run_continuity(f, cfg4);
  CHECK(to_json(run).dump() == to_json(run4).dump());
}

TEST_CASE("a constant non-converging sequence fails the decay assertions") {
  GridFunction f = corpus_function("gaussian_bump", 1, 1.0 / 256);
  SequenceSpec spec;
  GridFunction g = make_sequence(f, spec).front();  // fixed g != f
  ContinuityConfig cfg;
  cfg.alpha = 0.5;
  cfg.sequence_override = std::vector<GridFunction>(spec.j_values.size(), g);
  bool threw = false;
  bool failed = false;
  try {
    ContinuityRun run = run_continuity(f, cfg);
    for (const auto& [name, ok] : continuity_assertions(run)) failed = failed || !ok;
  } catch (const error&) {
    threw = true;  // the W11-gap invariants may trip first
  }
  CHECK((failed || threw));
}

TEST_SUITE_END();
