#include "maxlab/grid.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace maxlab {

void Domain::validate() const {
  require(d >= 1, errc::bad_argument, "dimension must be >= 1");
  require(d <= kMaxDim, errc::dimension_overflow, "dimension > 8 not supported");
  require(h > 0.0 && std::isfinite(h), errc::bad_argument, "grid spacing must be positive");
  for (int a = 0; a < d; ++a)
    require(dims[a] >= 2, errc::bad_argument, "each axis needs at least 2 points");
  for (int a = 0; a < d; ++a)
    require(std::isfinite(origin[a]), errc::bad_argument, "origin must be finite");
}

bool Domain::operator==(const Domain& o) const {
  if (d != o.d || h != o.h) return false;
  for (int a = 0; a < d; ++a)
    if (dims[a] != o.dims[a] || origin[a] != o.origin[a]) return false;
  return true;
}

Domain make_domain(int d, std::int64_t n_per_axis, double h, double lo) {
  Domain dom;
  dom.d = d;
  dom.h = h;
  for (int a = 0; a < d; ++a) {
    dom.dims[a] = n_per_axis;
    dom.origin[a] = lo;
  }
  dom.validate();
  return dom;
}

void GridFunction::validate() const {
  domain.validate();
  require(static_cast<std::int64_t>(values.size()) == domain.size(), errc::bad_argument,
          "sample count does not match the domain");
  for (double v : values)
    require(std::isfinite(v), errc::bad_argument, "samples must be finite");
}

GridFunction make_zero(const Domain& dom) {
  GridFunction f;
  f.domain = dom;
  f.values.assign(static_cast<std::size_t>(dom.size()), 0.0);
  return f;
}

std::int64_t RegionMask::count() const {
  std::int64_t n = 0;
  for (auto b : flags) n += (b != 0);
  return n;
}

double RegionMask::measure() const {
  return static_cast<double>(count()) * std::pow(domain.h, domain.d);
}

RegionMask full_mask(const Domain& dom) {
  RegionMask m;
  m.domain = dom;
  m.flags.assign(static_cast<std::size_t>(dom.size()), 1);
  return m;
}

RegionMask box_mask(const Domain& dom, const Index& lo, const Index& hi) {
  RegionMask m;
  m.domain = dom;
  m.flags.assign(static_cast<std::size_t>(dom.size()), 0);
  Index clo = lo, chi = hi;
  for (int a = 0; a < dom.d; ++a) {
    clo[a] = std::max<std::int64_t>(0, clo[a]);
    chi[a] = std::min<std::int64_t>(dom.dims[a] - 1, chi[a]);
    if (clo[a] > chi[a]) return m;
  }
  Index idx = clo;
  for (;;) {
    m.flags[static_cast<std::size_t>(dom.flat(idx))] = 1;
    int a = dom.d - 1;
    while (a >= 0) {
      if (++idx[a] <= chi[a]) break;
      idx[a] = clo[a];
      --a;
    }
    if (a < 0) break;
  }
  return m;
}

RegionMask box_mask_physical(const Domain& dom, const Coord& lo, const Coord& hi) {
  Index ilo{}, ihi{};
  for (int a = 0; a < dom.d; ++a) {
    ilo[a] = static_cast<std::int64_t>(std::ceil((lo[a] - dom.origin[a]) / dom.h - 1e-12));
    ihi[a] = static_cast<std::int64_t>(std::floor((hi[a] - dom.origin[a]) / dom.h + 1e-12));
  }
  return box_mask(dom, ilo, ihi);
}

RegionMask complement(const RegionMask& m) {
  RegionMask r = m;
  for (auto& b : r.flags) b = b ? 0 : 1;
  return r;
}

RegionMask intersect(const RegionMask& a, const RegionMask& b) {
  require(a.domain == b.domain, errc::bad_argument, "mask domains differ");
  RegionMask r = a;
  for (std::size_t i = 0; i < r.flags.size(); ++i) r.flags[i] = a.flags[i] && b.flags[i];
  return r;
}

bool mask_bbox(const RegionMask& m, Index& lo, Index& hi) {
  bool any = false;
  const Domain& dom = m.domain;
  for (int a = 0; a < dom.d; ++a) {
    lo[a] = dom.dims[a];
    hi[a] = -1;
  }
  for (std::int64_t f = 0; f < dom.size(); ++f) {
    if (!m.flags[static_cast<std::size_t>(f)]) continue;
    any = true;
    Index idx = dom.unflat(f);
    for (int a = 0; a < dom.d; ++a) {
      lo[a] = std::min(lo[a], idx[a]);
      hi[a] = std::max(hi[a], idx[a]);
    }
  }
  return any;
}

RegionMask dilate_box(const RegionMask& m, double factor) {
  Index lo{}, hi{};
  if (!mask_bbox(m, lo, hi)) return m;
  const Domain& dom = m.domain;
  Coord plo{}, phi{};
  for (int a = 0; a < dom.d; ++a) {
    double c = 0.5 * (dom.coord(a, lo[a]) + dom.coord(a, hi[a]));
    double half = 0.5 * (dom.coord(a, hi[a]) - dom.coord(a, lo[a])) * factor;
    plo[a] = c - half;
    phi[a] = c + half;
  }
  return box_mask_physical(dom, plo, phi);
}

// ---------------------------------------------------------------------------
// Test functions
// ---------------------------------------------------------------------------

namespace {

double dist2_to(const Coord& a, const Coord& b, int d) {
  double s = 0.0;
  for (int k = 0; k < d; ++k) {
    double t = a[k] - b[k];
    s += t * t;
  }
  return s;
}

// Support radius at which the gaussian drops to the relative truncation level.
double gaussian_support_radius(double sigma) {
  return sigma * std::sqrt(-2.0 * std::log(kTruncationLevel));
}

double truncated_gaussian(double dist2, double sigma) {
  double r = gaussian_support_radius(sigma);
  if (dist2 > r * r) return 0.0;
  return std::exp(-dist2 / (2.0 * sigma * sigma));
}

void check_margin(const Domain& dom, const Coord& lo, const Coord& hi) {
  for (int a = 0; a < dom.d; ++a) {
    double side = dom.side(a);
    double box_lo = dom.coord(a, 0), box_hi = dom.coord(a, dom.dims[a] - 1);
    double margin = std::min(lo[a] - box_lo, box_hi - hi[a]);
    require(margin >= 0.25 * side - 1e-9, errc::support_overflow,
            "shape support does not fit the box with a 25% margin");
  }
}

}  // namespace

GridFunction make_test_function(TestFunctionKind kind, const Domain& dom,
                                const ShapeParams& p) {
  dom.validate();
  GridFunction f = make_zero(dom);
  const int d = dom.d;

  Coord lo{}, hi{};
  switch (kind) {
    case TestFunctionKind::triangle: {
      require(d == 1, errc::bad_argument, "triangle is a d=1 shape");
      lo[0] = p.center[0] - 1.0;
      hi[0] = p.center[0] + 1.0;
      break;
    }
    case TestFunctionKind::indicator_ball: {
      for (int a = 0; a < d; ++a) {
        lo[a] = p.center[a] - p.radius;
        hi[a] = p.center[a] + p.radius;
      }
      break;
    }
    case TestFunctionKind::gaussian_bump: {
      double r = gaussian_support_radius(p.sigma);
      for (int a = 0; a < d; ++a) {
        lo[a] = p.center[a] - r;
        hi[a] = p.center[a] + r;
      }
      break;
    }
    case TestFunctionKind::two_bumps: {
      double r = gaussian_support_radius(p.sigma);
      for (int a = 0; a < d; ++a) {
        lo[a] = p.center[a] - r;
        hi[a] = p.center[a] + r;
      }
      lo[0] -= 0.5 * p.separation;
      hi[0] += 0.5 * p.separation;
      break;
    }
  }
  check_margin(dom, lo, hi);

  const std::int64_t n = dom.size();
  for (std::int64_t fl = 0; fl < n; ++fl) {
    Index idx = dom.unflat(fl);
    Coord x = dom.point(idx);
    double v = 0.0;
    switch (kind) {
      case TestFunctionKind::triangle:
        v = std::max(0.0, 1.0 - std::abs(x[0] - p.center[0]));
        break;
      case TestFunctionKind::indicator_ball:
        v = dist2_to(x, p.center, d) <= p.radius * p.radius ? p.amplitude : 0.0;
        break;
      case TestFunctionKind::gaussian_bump:
        v = p.amplitude * truncated_gaussian(dist2_to(x, p.center, d), p.sigma);
        break;
      case TestFunctionKind::two_bumps: {
        Coord c1 = p.center, c2 = p.center;
        c1[0] -= 0.5 * p.separation;
        c2[0] += 0.5 * p.separation;
        v = p.amplitude * truncated_gaussian(dist2_to(x, c1, d), p.sigma) +
            p.second_amplitude * truncated_gaussian(dist2_to(x, c2, d), p.sigma);
        break;
      }
    }
    f.values[static_cast<std::size_t>(fl)] = v;
  }
  return f;
}

TestFunctionKind test_function_kind_from_name(const std::string& name) {
  if (name == "triangle") return TestFunctionKind::triangle;
  if (name == "indicator_ball") return TestFunctionKind::indicator_ball;
  if (name == "gaussian_bump") return TestFunctionKind::gaussian_bump;
  if (name == "two_bumps") return TestFunctionKind::two_bumps;
  fail(errc::bad_argument, "unknown test function: " + name);
}

std::string to_string(TestFunctionKind kind) {
  switch (kind) {
    case TestFunctionKind::triangle: return "triangle";
    case TestFunctionKind::indicator_ball: return "indicator_ball";
    case TestFunctionKind::gaussian_bump: return "gaussian_bump";
    case TestFunctionKind::two_bumps: return "two_bumps";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// I/O
// ---------------------------------------------------------------------------

namespace {

constexpr char kMagic[4] = {'M', 'F', 'G', '1'};

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

GridFunction read_grid_csv(std::istream& is, const std::string& path) {
  std::string header;
  if (!std::getline(is, header) || header.empty() || header[0] != '#')
    fail(errc::malformed_header, "missing CSV header: " + path);

  Domain dom;
  bool have_d = false, have_dims = false, have_h = false, have_origin = false;
  std::istringstream hs(header.substr(1));
  std::string tok;
  auto parse_list = [](const std::string& s, std::vector<double>& out) {
    out.clear();
    std::istringstream ls(s);
    std::string item;
    while (std::getline(ls, item, ',')) out.push_back(std::stod(item));
  };
  while (hs >> tok) {
    auto eq = tok.find('=');
    if (eq == std::string::npos) continue;
    std::string key = tok.substr(0, eq), val = tok.substr(eq + 1);
    std::vector<double> list;
    if (key == "d") {
      dom.d = std::stoi(val);
      have_d = true;
    } else if (key == "dims") {
      parse_list(val, list);
      require(list.size() <= kMaxDim, errc::dimension_overflow, "dimension > 8 rejected");
      for (std::size_t i = 0; i < list.size(); ++i) dom.dims[i] = static_cast<std::int64_t>(list[i]);
      have_dims = true;
    } else if (key == "h") {
      dom.h = std::stod(val);
      have_h = true;
    } else if (key == "origin") {
      parse_list(val, list);
      require(list.size() <= kMaxDim, errc::dimension_overflow, "dimension > 8 rejected");
      for (std::size_t i = 0; i < list.size(); ++i) dom.origin[i] = list[i];
      have_origin = true;
    }
  }
  if (!(have_d && have_dims && have_h && have_origin))
    fail(errc::malformed_header, "CSV header missing domain fields: " + path);
  require(dom.d >= 1 && dom.d <= kMaxDim, errc::dimension_overflow, "dimension > 8 rejected");
  dom.validate();

  GridFunction f;
  f.domain = dom;
  f.values.reserve(static_cast<std::size_t>(dom.size()));
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    f.values.push_back(std::stod(line));
  }
  if (static_cast<std::int64_t>(f.values.size()) != dom.size())
    fail(errc::truncated_payload, "CSV payload does not match dims: " + path);
  f.validate();
  return f;
}

}  // namespace

GridFunction read_grid(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) fail(errc::io_failure, "cannot open: " + path);

  char magic[4];
  if (!is.read(magic, 4)) fail(errc::malformed_header, "file too short: " + path);

  if (magic[0] == '#') {
    is.seekg(0);
    return read_grid_csv(is, path);
  }
  if (std::memcmp(magic, kMagic, 4) != 0)
    fail(errc::malformed_header, "bad magic: " + path);

  std::uint32_t d32;
  if (!get_u32(is, d32)) fail(errc::malformed_header, "missing dimension: " + path);
  require(d32 >= 1 && d32 <= kMaxDim, errc::dimension_overflow, "dimension > 8 rejected");

  Domain dom;
  dom.d = static_cast<int>(d32);
  for (int a = 0; a < dom.d; ++a) {
    std::uint64_t n;
    if (!get_u64(is, n)) fail(errc::malformed_header, "missing dims: " + path);
    dom.dims[a] = static_cast<std::int64_t>(n);
  }
  if (!get_f64(is, dom.h)) fail(errc::malformed_header, "missing spacing: " + path);
  for (int a = 0; a < dom.d; ++a)
    if (!get_f64(is, dom.origin[a])) fail(errc::malformed_header, "missing origin: " + path);
  dom.validate();

  GridFunction f;
  f.domain = dom;
  std::int64_t n = dom.size();
  f.values.resize(static_cast<std::size_t>(n));
  for (std::int64_t i = 0; i < n; ++i)
    if (!get_f64(is, f.values[static_cast<std::size_t>(i)]))
      fail(errc::truncated_payload, "payload shorter than dims: " + path);
  f.validate();
  return f;
}

void write_grid(const GridFunction& f, const std::string& path) {
  f.validate();
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) fail(errc::io_failure, "cannot write: " + path);
  os.write(kMagic, 4);
  put_u32(os, static_cast<std::uint32_t>(f.domain.d));
  for (int a = 0; a < f.domain.d; ++a)
    put_u64(os, static_cast<std::uint64_t>(f.domain.dims[a]));
  put_f64(os, f.domain.h);
  for (int a = 0; a < f.domain.d; ++a) put_f64(os, f.domain.origin[a]);
  for (double v : f.values) put_f64(os, v);
  if (!os) fail(errc::io_failure, "write failed: " + path);
}

}  // namespace maxlab
