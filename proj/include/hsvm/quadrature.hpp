#pragma once

#include <cstddef>
#include <vector>

namespace hsvm {

struct QuadRule {
  std::vector<double> x;
  std::vector<double> w;
  std::size_t size() const { return x.size(); }
};

// Gauss-Legendre rule on [-1, 1]; nodes are exactly symmetric.  Cached per n.
const QuadRule& gauss_legendre(int n);

// Same rule mapped to [a, b].
QuadRule gauss_legendre(int n, double a, double b);

// Van der Corput radical inverse, used for low-discrepancy probe sets.
double radical_inverse(std::size_t index, unsigned base);

}  // namespace hsvm
