#include <doctest.h>

#include <cmath>
#include <random>

#include "maxlab/ball.hpp"
#include "maxlab/corpus.hpp"

using namespace maxlab;

TEST_SUITE_BEGIN("ball");

TEST_CASE("unit ball volumes") {
  CHECK(unit_ball_volume(1) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(unit_ball_volume(2) == doctest::Approx(M_PI).epsilon(1e-14));
  CHECK(unit_ball_volume(3) == doctest::Approx(4.0 * M_PI / 3.0).epsilon(1e-14));
}

TEST_CASE("radius grids: shape and lookup") {
  RadiusGrid g = make_default_radius_grid(1.0 / 64, 5.0);
  CHECK(g.radii.front() == doctest::Approx(1.0 / 64));
  CHECK(g.radii.back() == doctest::Approx(5.0));
  for (std::size_t k = 0; k + 1 < g.size(); ++k) {
    CHECK(g.radii[k + 1] > g.radii[k]);
    CHECK(g.radii[k + 1] / g.radii[k] <=
          1.0 + std::max(g.rho_step, g.h_link / g.radii[k]) + 1e-12);
  }
  CHECK(g.index_at_least(0.0) == 0);
  CHECK(g.index_at_least(g.radii[7]) == 7);
  CHECK(g.index_at_least(10.0) == g.size());

  RadiusGrid lin = make_linear_radius_grid(0.25, 2.0);
  CHECK(lin.size() == 8);
  CHECK(lin.radii[3] == doctest::Approx(1.0));
}

TEST_CASE("zero function averages to zero") {
  GridFunction f = make_zero(make_domain(2, 17, 0.25, -2.0));
  CHECK(ball_average(f, {{0.0, 0.0}, 1.0}, AverageMode::absolute()) == 0.0);
}

TEST_CASE("indicator averages: inside the support and at radius 2") {
  GridFunction f = corpus_function("indicator_ball", 2, 1.0 / 128);
  CHECK(ball_average(f, {{0.0, 0.0}, 0.5}, AverageMode::absolute()) ==
        doctest::Approx(1.0).epsilon(1e-12));
  double v = ball_average(f, {{0.0, 0.0}, 2.0}, AverageMode::absolute());
  CHECK(std::abs(v - 0.25) <= 3.0 / 128);
}

TEST_CASE("triangle ball average matches the closed form") {
  double h = 1.0 / 1024;
  GridFunction f = corpus_function("triangle", 1, h);
  double v = ball_average(f, {{0.0}, 1.0}, AverageMode::absolute());
  CHECK(std::abs(v - 0.5) <= 2 * h);
}

TEST_CASE("empty stencil off grid") {
  GridFunction f = corpus_function("triangle", 1, 0.125);
  BallSpec tiny{{0.0625}, 0.05};  // midpoint center, r below half a cell
  CHECK_THROWS_AS(ball_average(f, tiny, AverageMode::absolute()), error);
}

TEST_CASE("accelerated equals naive bitwise") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  for (int d : {1, 2}) {
    Domain dom = make_domain(d, 33, 0.11, -1.7);  // deliberately non-dyadic
    GridFunction f = make_zero(dom);
    for (auto& v : f.values) v = uni(rng);
    LineSumTable table(dom, f.values);
    std::uniform_int_distribution<std::int64_t> pick(0, dom.size() - 1);
    std::uniform_real_distribution<double> rad(0.12, 2.9);
    std::uniform_real_distribution<double> offs(-0.4, 0.4);
    for (int it = 0; it < 200; ++it) {
      Coord z = dom.point(dom.unflat(pick(rng)));
      if (it % 3 == 0)
        for (int a = 0; a < d; ++a) z[a] += offs(rng) * dom.h;
      double r = rad(rng);
      BallSum naive = ball_sum_raw(dom, f.values, nullptr, z, r);
      BallSum fast = ball_sum_raw(dom, f.values, &table, z, r);
      CHECK(naive.count == fast.count);
      CHECK(naive.sum == fast.sum);
    }
  }
}

TEST_CASE("average is monotone under pointwise domination") {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  std::uniform_real_distribution<double> pos(0.0, 1.0);
  Domain dom = make_domain(2, 25, 0.125, -1.5);
  GridFunction f = make_zero(dom), g = make_zero(dom);
  for (std::size_t i = 0; i < f.values.size(); ++i) {
    f.values[i] = uni(rng);
    g.values[i] = f.values[i] * (1.0 + pos(rng));  // |g| >= |f| pointwise
  }
  std::uniform_int_distribution<std::int64_t> pick(0, dom.size() - 1);
  std::uniform_real_distribution<double> rad(0.125, 2.0);
  for (int it = 0; it < 100; ++it) {
    BallSpec b{dom.point(dom.unflat(pick(rng))), rad(rng)};
    CHECK(ball_average(f, b, AverageMode::absolute()) <=
          ball_average(g, b, AverageMode::absolute()) + 1e-15);
  }
}

TEST_CASE("stencil measure converges to the continuum ball volume") {
  Domain dom = make_domain(2, 1025, 1.0 / 128, -4.0);
  Coord z{0.0, 0.0};
  double prev_err = 1e9;
  for (double ratio : {8.0, 32.0, 128.0}) {
    double r = ratio * dom.h;
    auto n = static_cast<double>(lattice_count(dom, z, r));
    double measure = n * dom.h * dom.h;
    double err = std::abs(measure - unit_ball_volume(2) * r * r) / (unit_ball_volume(2) * r * r);
    CHECK(err < prev_err);
    CHECK(err <= 4.0 * dom.h / r);
    prev_err = err;
  }
  // monotone in r for a fixed center
  std::int64_t last = 0;
  for (double r = dom.h; r < 0.5; r += dom.h) {
    std::int64_t n = lattice_count(dom, z, r);
    CHECK(n >= last);
    last = n;
  }
}

TEST_CASE("lattice count includes out-of-box points") {
  Domain dom = make_domain(1, 9, 0.5, 0.0);  // box [0, 4]
  // ball at the box edge: half the stencil lies outside
  CHECK(lattice_count(dom, {{0.0}}, 1.0) == 5);
  GridFunction f = make_zero(dom);
  for (auto& v : f.values) v = 1.0;
  // average of the extension by zero over the straddling ball
  double v = ball_average(f, {{0.0}, 1.0}, AverageMode::absolute());
  CHECK(v == doctest::Approx(3.0 / 5.0));
}

TEST_CASE("suffix max profile is nonincreasing and tops at the centered max") {
  double h = 1.0 / 1024;
  GridFunction f = corpus_function("triangle", 1, h);
  RadiusGrid rg = make_linear_radius_grid(h, required_max_radius(f));
  Index center{};
  center[0] = 4096;  // x = 0
  SuffixMaxProfile prof = suffix_max_profile(f, center, 0.5, rg);
  for (std::size_t k = 0; k + 1 < prof.values.size(); ++k)
    CHECK(prof.values[k] >= prof.values[k + 1]);
  double want = std::pow(2.0 / 3.0, 1.5);
  CHECK(std::abs(prof.eval(rg.radii.front()) - want) <= 5 * h);
  CHECK(prof.eval(2.0 * rg.radii.back()) == 0.0);
}

TEST_CASE("gradient-component averages see the sign") {
  GridFunction f = corpus_function("triangle", 1, 1.0 / 256);
  // d/dx of the triangle is +1 left of 0, -1 right of 0
  double left = ball_average(f, {{-0.5}, 0.25}, AverageMode::gradient(0));
  double right = ball_average(f, {{0.5}, 0.25}, AverageMode::gradient(0));
  CHECK(left == doctest::Approx(1.0).epsilon(1e-2));
  CHECK(right == doctest::Approx(-1.0).epsilon(1e-2));
}

TEST_CASE("ball averager caches match the free function") {
  GridFunction f = corpus_function("gaussian_bump", 2, 1.0 / 16);
  BallAverager avg(f);
  for (BallSpec b : {BallSpec{{0.0, 0.0}, 0.5}, BallSpec{{0.25, -0.5}, 1.25}}) {
    CHECK(avg.average(b, AverageMode::absolute()) ==
          ball_average(f, b, AverageMode::absolute()));
    CHECK(avg.average(b, AverageMode::raw()) == ball_average(f, b, AverageMode::raw()));
    CHECK(avg.average(b, AverageMode::gradient(1)) ==
          ball_average(f, b, AverageMode::gradient(1)));
  }
}

TEST_SUITE_END();
