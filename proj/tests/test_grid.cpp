#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>

#include "maxlab/calculus.hpp"
#include "maxlab/corpus.hpp"
#include "maxlab/grid.hpp"

using namespace maxlab;

namespace {
std::string tmp_path(const std::string& name) { return "/tmp/maxlab_test_" + name; }
}  // namespace

TEST_SUITE_BEGIN("grid");

TEST_CASE("triangle has unit area") {
  GridFunction f = corpus_function("triangle", 1, 1.0 / 1024);
  CHECK(lq_norm(f, 1.0) == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("indicator ball area is pi") {
  GridFunction f = corpus_function("indicator_ball", 2, 1.0 / 128);
  double area = 0.0;
  for (double v : f.values) area += v;
  area *= std::pow(f.domain.h, 2);
  CHECK(area == doctest::Approx(M_PI).epsilon(0.05 / M_PI));
}

TEST_CASE("gaussian bump is nonnegative and truncated") {
  GridFunction f = corpus_function("gaussian_bump", 2, 1.0 / 32);
  double mn = 1.0;
  for (double v : f.values) mn = std::min(mn, v);
  CHECK(mn >= 0.0);
  // hard zero outside the truncation radius
  CHECK(f.values.front() == 0.0);
}

TEST_CASE("support overflow is rejected") {
  Domain dom = make_domain(1, 65, 3.0 / 64, -1.5);  // box [-1.5, 1.5]
  CHECK_THROWS_AS(make_test_function(TestFunctionKind::triangle, dom), error);
  try {
    make_test_function(TestFunctionKind::triangle, dom);
  } catch (const error& e) {
    CHECK(e.code() == errc::support_overflow);
  }
}

TEST_CASE("translation covariance: shifted origin shifts indices exactly") {
  double h = 1.0 / 16;
  Domain a = make_domain(1, 129, h, -4.0);
  Domain b = a;
  b.origin[0] = -4.0 + 5 * h;  // shift by 5 cells
  GridFunction fa = make_test_function(TestFunctionKind::triangle, a);
  GridFunction fb = make_test_function(TestFunctionKind::triangle, b);
  for (std::int64_t i = 0; i + 5 < a.dims[0]; ++i) {
    Index ia{}, ib{};
    ia[0] = i + 5;
    ib[0] = i;
    CHECK(fa.at(ia) == fb.at(ib));
  }
}

TEST_CASE("coordinate round trip") {
  Domain dom = make_domain(2, 17, 0.25, -2.0);
  for (std::int64_t fl = 0; fl < dom.size(); fl += 7) {
    Index idx = dom.unflat(fl);
    CHECK(dom.flat(idx) == fl);
    Coord p = dom.point(idx);
    for (int a = 0; a < 2; ++a)
      CHECK(std::llround((p[a] - dom.origin[a]) / dom.h) == idx[a]);
  }
}

TEST_CASE("binary round trip is bitwise") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> uni(-3.0, 3.0);
  Domain dom = make_domain(2, 9, 0.125, -0.5);
  GridFunction f = make_zero(dom);
  for (auto& v : f.values) v = uni(rng);
  f.values[3] = 0.0;
  f.values[5] = 1e-300;
  std::string path = tmp_path("roundtrip.mfg");
  write_grid(f, path);
  GridFunction g = read_grid(path);
  CHECK(g.domain == f.domain);
  for (std::size_t i = 0; i < f.values.size(); ++i) CHECK(g.values[i] == f.values[i]);
}

TEST_CASE("empty file is a malformed header") {
  std::string path = tmp_path("empty.mfg");
  std::ofstream(path, std::ios::trunc).close();
  CHECK_THROWS_AS(read_grid(path), error);
  try {
    read_grid(path);
  } catch (const error& e) {
    CHECK(e.code() == errc::malformed_header);
  }
}

TEST_CASE("documented MFG1 example parses") {
  // magic, d=1, dims=[4], h=1.0, origin=[0], 4 values
  std::string path = tmp_path("example.mfg");
  {
    GridFunction f;
    f.domain = make_domain(1, 4, 1.0, 0.0);
    f.values = {1.0, 2.0, 3.0, 4.0};
    write_grid(f, path);
  }
  std::ifstream is(path, std::ios::binary);
  char magic[4];
  is.read(magic, 4);
  CHECK(std::string(magic, 4) == "MFG1");
  GridFunction g = read_grid(path);
  CHECK(g.domain.d == 1);
  CHECK(g.domain.dims[0] == 4);
  CHECK(g.values == std::vector<double>{1.0, 2.0, 3.0, 4.0});
}

TEST_CASE("truncated payload is detected") {
  std::string path = tmp_path("trunc.mfg");
  {
    GridFunction f;
    f.domain = make_domain(1, 8, 0.5, 0.0);
    f.values.assign(8, 1.5);
    write_grid(f, path);
  }
  std::ifstream is(path, std::ios::binary);
  std::string bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  is.close();
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  os.write(bytes.data(), static_cast<std::streamsize>(bytes.size() - 8));
  os.close();
  try {
    read_grid(path);
    CHECK(false);
  } catch (const error& e) {
    CHECK(e.code() == errc::truncated_payload);
  }
}

TEST_CASE("dimension overflow is rejected") {
  std::string path = tmp_path("d9.mfg");
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  os.write("MFG1", 4);
  unsigned char d9[4] = {9, 0, 0, 0};
  os.write(reinterpret_cast<char*>(d9), 4);
  os.close();
  try {
    read_grid(path);
    CHECK(false);
  } catch (const error& e) {
    CHECK(e.code() == errc::dimension_overflow);
  }
}

TEST_CASE("CSV input is accepted and matches binary") {
  Domain dom = make_domain(1, 4, 0.5, -1.0);
  GridFunction f = make_zero(dom);
  f.values = {0.25, -1.5, 2.0, 0.0};
  std::string path = tmp_path("grid.csv");
  {
    std::ofstream os(path, std::ios::trunc);
    os << "# MFG1 d=1 dims=4 h=0.5 origin=-1.0\n";
    os.precision(17);
    for (double v : f.values) os << v << "\n";
  }
  GridFunction g = read_grid(path);
  CHECK(g.domain == f.domain);
  for (std::size_t i = 0; i < f.values.size(); ++i)
    CHECK(g.values[i] == doctest::Approx(f.values[i]));
}

TEST_CASE("region masks: measure, boxes, dilation") {
  Domain dom = make_domain(2, 33, 0.25, -4.0);
  Index lo{}, hi{};
  lo[0] = lo[1] = 10;
  hi[0] = hi[1] = 20;
  RegionMask m = box_mask(dom, lo, hi);
  CHECK(m.count() == 11 * 11);
  CHECK(m.measure() == doctest::Approx(121 * 0.0625));
  RegionMask c = complement(m);
  CHECK(c.count() == dom.size() - 121);
  RegionMask big = dilate_box(m, 3.0);
  Index blo{}, bhi{};
  CHECK(mask_bbox(big, blo, bhi));
  CHECK(bhi[0] - blo[0] > 3 * (hi[0] - lo[0]) - 3);
}

TEST_SUITE_END();
