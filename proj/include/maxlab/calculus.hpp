#pragma once

#include <optional>
#include <span>
#include <vector>

#include "maxlab/grid.hpp"

namespace maxlab {

// d component grids holding the discrete partial derivatives of one function.
struct GradientField {
  Domain domain;
  std::vector<std::vector<double>> components;  // components[i] holds d/dx_i

  // Euclidean norm of the component vector at each point.
  GridFunction magnitude() const;
};

// Central differences at interior points, one-sided first-order at the faces.
// Requires every axis to have at least 3 points.
GradientField gradient(const GridFunction& g);

// sign(f) * gradient(f) componentwise, with sign(0) = 0: the a.e. chain rule
// for the modulus of a Sobolev function.
GradientField gradient_of_modulus(const GridFunction& f);

// (sum |g|^q h^d)^(1/q) over the mask (full domain when absent). Reductions use
// the fixed pairwise tree, so the value is independent of worker count.
double lq_norm(const GridFunction& g, double q, const RegionMask* mask = nullptr);
double lq_norm(const Domain& dom, std::span<const double> values, double q,
               const RegionMask* mask = nullptr);

// ||f||_1 + || |grad f| ||_1.
double w11_norm(const GridFunction& f);

GridFunction gf_scale(const GridFunction& f, double c);
GridFunction gf_sub(const GridFunction& a, const GridFunction& b);
GridFunction gf_add(const GridFunction& a, const GridFunction& b);
GridFunction gf_abs(const GridFunction& f);

}  // namespace maxlab
