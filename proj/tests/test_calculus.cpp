#include <doctest.h>

#include <cmath>

#include "maxlab/calculus.hpp"
#include "maxlab/corpus.hpp"

using namespace maxlab;

TEST_SUITE_BEGIN("calculus");

TEST_CASE("gradient of a constant vanishes") {
  GridFunction f = make_zero(make_domain(2, 9, 0.25, 0.0));
  for (auto& v : f.values) v = 3.5;
  GradientField g = gradient(f);
  for (int a = 0; a < 2; ++a)
    for (double v : g.components[static_cast<std::size_t>(a)]) CHECK(v == 0.0);
}

TEST_CASE("central differences are exact on affine samples") {
  Domain dom = make_domain(2, 9, 0.25, -1.0);
  GridFunction f = make_zero(dom);
  for (std::int64_t fl = 0; fl < dom.size(); ++fl)
    f.values[static_cast<std::size_t>(fl)] = dom.point(dom.unflat(fl))[0];
  GradientField g = gradient(f);
  for (std::int64_t fl = 0; fl < dom.size(); ++fl) {
    Index idx = dom.unflat(fl);
    if (idx[0] == 0 || idx[0] == dom.dims[0] - 1) continue;  // one-sided faces
    CHECK(g.components[0][static_cast<std::size_t>(fl)] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(g.components[1][static_cast<std::size_t>(fl)] == doctest::Approx(0.0).epsilon(1e-12));
  }
}

TEST_CASE("gradient converges at second order on the smooth bump") {
  auto err_at = [](double h) {
    GridFunction f = corpus_function("gaussian_bump", 1, h);
    GradientField g = gradient(f);
    double sigma = 0.25, worst = 0.0;
    const Domain& dom = f.domain;
    for (std::int64_t i = 2; i < dom.dims[0] - 2; ++i) {
      double x = dom.coord(0, i);
      if (std::abs(x) > 0.8) continue;  // stay away from the truncation edge
      double analytic = -x / (sigma * sigma) * std::exp(-x * x / (2 * sigma * sigma));
      worst = std::max(worst,
                       std::abs(g.components[0][static_cast<std::size_t>(i)] - analytic));
    }
    return worst;
  };
  double e1 = err_at(1.0 / 256), e2 = err_at(1.0 / 512);
  CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.20));
}

TEST_CASE("domain too small for gradients") {
  GridFunction f = make_zero(make_domain(1, 2, 0.5, 0.0));
  CHECK_THROWS_AS(gradient(f), error);
}

TEST_CASE("gradient of modulus equals gradient on nonnegative inputs") {
  GridFunction f = corpus_function("gaussian_bump", 1, 1.0 / 128);
  GradientField a = gradient(f), b = gradient_of_modulus(f);
  // identical where f > 0, zeroed where f == 0
  for (std::size_t i = 0; i < f.values.size(); ++i) {
    if (f.values[i] > 0.0)
      CHECK(a.components[0][i] == b.components[0][i]);
    else
      CHECK(b.components[0][i] == 0.0);
  }
}

TEST_CASE("gradient of modulus of an odd function is even") {
  double h = 1.0 / 512;
  Domain dom = corpus_domain(1, h);
  GridFunction f = make_zero(dom);
  for (std::int64_t i = 0; i < dom.size(); ++i) {
    double x = dom.coord(0, i);
    f.values[static_cast<std::size_t>(i)] =
        std::max(0.0, 1.0 - std::abs(x - 1.5)) - std::max(0.0, 1.0 - std::abs(x + 1.5));
  }
  GradientField g = gradient_of_modulus(f);
  GridFunction mag = g.magnitude();
  std::int64_t mid = (dom.dims[0] - 1) / 2;
  for (std::int64_t i = 1; i < dom.dims[0] / 2 - 1; ++i) {
    // |f| is even, so its derivative is odd and the magnitude is even.
    CHECK(g.components[0][static_cast<std::size_t>(mid + i)] ==
          doctest::Approx(-g.components[0][static_cast<std::size_t>(mid - i)]).epsilon(1e-12));
    CHECK(mag.values[static_cast<std::size_t>(mid + i)] ==
          doctest::Approx(mag.values[static_cast<std::size_t>(mid - i)]).epsilon(1e-12));
  }
}

TEST_CASE("modulus preserves total variation away from sign changes") {
  double h = 1.0 / 512;
  ShapeParams p;
  p.sigma = 0.2;
  p.second_amplitude = -1.0;
  GridFunction f = make_test_function(TestFunctionKind::two_bumps, corpus_domain(1, h), p);
  double tv_mod = lq_norm(gradient_of_modulus(f).magnitude(), 1.0);
  double tv = lq_norm(gradient(f).magnitude(), 1.0);
  CHECK(std::abs(tv_mod - tv) <= 10 * h);
}

TEST_CASE("lq norms: zero, indicator, triangle") {
  CHECK(lq_norm(make_zero(make_domain(1, 8, 0.5, 0.0)), 2.0) == 0.0);
  GridFunction ind = corpus_function("indicator_ball", 2, 1.0 / 64);
  CHECK(lq_norm(ind, 2.0) == doctest::Approx(std::sqrt(M_PI)).epsilon(0.03));
  GridFunction tri = corpus_function("triangle", 1, 1.0 / 1024);
  CHECK(lq_norm(tri, 1.0) == doctest::Approx(1.0).epsilon(1e-3));
  CHECK_THROWS_AS(lq_norm(tri, 0.5), error);
}

TEST_CASE("norm homogeneity and mask additivity") {
  GridFunction f = corpus_function("two_bumps", 1, 1.0 / 256);
  double q = 1.7;
  double n1 = lq_norm(f, q);
  CHECK(lq_norm(gf_scale(f, -3.25), q) == doctest::Approx(3.25 * n1).epsilon(1e-12));

  Index lo{}, hi{};
  lo[0] = 0;
  hi[0] = f.domain.dims[0] / 2;
  RegionMask a = box_mask(f.domain, lo, hi);
  RegionMask b = complement(a);
  double full = std::pow(lq_norm(f, q), q);
  double parts = std::pow(lq_norm(f, q, &a), q) + std::pow(lq_norm(f, q, &b), q);
  CHECK(parts == doctest::Approx(full).epsilon(1e-10));
}

TEST_CASE("gradient is linear") {
  GridFunction f = corpus_function("gaussian_bump", 1, 1.0 / 128);
  GridFunction g = corpus_function("triangle", 1, 1.0 / 128);
  GradientField sum = gradient(gf_add(f, g));
  GradientField gf = gradient(f), gg = gradient(g);
  for (std::size_t i = 0; i < f.values.size(); ++i) {
    double lin = gf.components[0][i] + gg.components[0][i];
    // equal up to one rounding of the summed samples
    CHECK(std::abs(sum.components[0][i] - lin) <= 4e-14 * std::max(1.0, std::abs(lin)));
  }
}

TEST_CASE("w11 norm: triangle and the analytic gaussian") {
  GridFunction tri = corpus_function("triangle", 1, 1.0 / 1024);
  CHECK(w11_norm(tri) == doctest::Approx(3.0).epsilon(1e-2 / 3.0));

  GridFunction g = corpus_function("gaussian_bump", 1, 1.0 / 1024);
  double sigma = 0.25;
  double analytic = sigma * std::sqrt(2.0 * M_PI) + 2.0;
  CHECK(w11_norm(g) == doctest::Approx(analytic).epsilon(0.01));

  CHECK(w11_norm(make_zero(make_domain(1, 8, 0.5, 0.0))) == 0.0);
}

TEST_SUITE_END();
