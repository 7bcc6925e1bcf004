#include "maxlab/calculus.hpp"

#include <cmath>

#include "maxlab/parallel.hpp"

namespace maxlab {

GridFunction GradientField::magnitude() const {
  GridFunction m = make_zero(domain);
  for (std::size_t i = 0; i < m.values.size(); ++i) {
    double s = 0.0;
    for (int a = 0; a < domain.d; ++a) {
      double t = components[static_cast<std::size_t>(a)][i];
      s += t * t;
    }
    m.values[i] = std::sqrt(s);
  }
  return m;
}

GradientField gradient(const GridFunction& g) {
  const Domain& dom = g.domain;
  for (int a = 0; a < dom.d; ++a)
    require(dom.dims[a] >= 3, errc::domain_too_small, "gradient needs >= 3 points per axis");

  GradientField out;
  out.domain = dom;
  out.components.assign(static_cast<std::size_t>(dom.d),
                        std::vector<double>(g.values.size(), 0.0));

  const double inv2h = 1.0 / (2.0 * dom.h);
  const double invh = 1.0 / dom.h;
  const std::int64_t n = dom.size();
  for (std::int64_t fl = 0; fl < n; ++fl) {
    Index idx = dom.unflat(fl);
    for (int a = 0; a < dom.d; ++a) {
      // Stride of one step along axis a in flat order.
      std::int64_t stride = 1;
      for (int b = a + 1; b < dom.d; ++b) stride *= dom.dims[b];
      double v;
      if (idx[a] == 0)
        v = (g.values[static_cast<std::size_t>(fl + stride)] -
             g.values[static_cast<std::size_t>(fl)]) * invh;
      else if (idx[a] == dom.dims[a] - 1)
        v = (g.values[static_cast<std::size_t>(fl)] -
             g.values[static_cast<std::size_t>(fl - stride)]) * invh;
      else
        v = (g.values[static_cast<std::size_t>(fl + stride)] -
             g.values[static_cast<std::size_t>(fl - stride)]) * inv2h;
      out.components[static_cast<std::size_t>(a)][static_cast<std::size_t>(fl)] = v;
    }
  }
  return out;
}

GradientField gradient_of_modulus(const GridFunction& f) {
  GradientField g = gradient(f);
  for (std::size_t i = 0; i < f.values.size(); ++i) {
    double s = f.values[i] > 0.0 ? 1.0 : (f.values[i] < 0.0 ? -1.0 : 0.0);
    for (int a = 0; a < f.domain.d; ++a)
      g.components[static_cast<std::size_t>(a)][i] *= s;
  }
  return g;
}

double lq_norm(const Domain& dom, std::span<const double> values, double q,
               const RegionMask* mask) {
  require(q >= 1.0, errc::invalid_q, "need q >= 1");
  if (mask) require(mask->domain == dom, errc::bad_argument, "mask domain mismatch");
  const double hd = std::pow(dom.h, dom.d);
  std::vector<double> terms;
  terms.reserve(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (mask && !mask->flags[i]) continue;
    terms.push_back(std::pow(std::abs(values[i]), q) * hd);
  }
  double s = pairwise_sum(terms);
  return std::pow(s, 1.0 / q);
}

double lq_norm(const GridFunction& g, double q, const RegionMask* mask) {
  return lq_norm(g.domain, g.values, q, mask);
}

double w11_norm(const GridFunction& f) {
  return lq_norm(f, 1.0) + lq_norm(gradient(f).magnitude(), 1.0);
}

GridFunction gf_scale(const GridFunction& f, double c) {
  GridFunction r = f;
  for (auto& v : r.values) v *= c;
  return r;
}

GridFunction gf_sub(const GridFunction& a, const GridFunction& b) {
  require(a.domain == b.domain, errc::bad_argument, "domain mismatch");
  GridFunction r = a;
  for (std::size_t i = 0; i < r.values.size(); ++i) r.values[i] -= b.values[i];
  return r;
}

GridFunction gf_add(const GridFunction& a, const GridFunction& b) {
  require(a.domain == b.domain, errc::bad_argument, "domain mismatch");
  GridFunction r = a;
  for (std::size_t i = 0; i < r.values.size(); ++i) r.values[i] += b.values[i];
  return r;
}

GridFunction gf_abs(const GridFunction& f) {
  GridFunction r = f;
  for (auto& v : r.values) v = std::abs(v);
  return r;
}

}  // namespace maxlab
