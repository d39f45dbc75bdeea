#pragma once

#include <vector>

namespace illiquid::quad {

/// A quadrature rule whose weights are normalized to a probability measure.
struct Rule {
  std::vector<double> nodes;
  std::vector<double> weights;

  std::size_t size() const { return nodes.size(); }
};

/// Gauss-Legendre rule for the uniform law on (0,1).
const Rule& gauss_legendre_unit(int n);

/// Gauss-Hermite rule for the standard normal law: sum w_i g(x_i) ~ E[g(N(0,1))].
const Rule& gauss_hermite_normal(int n);

/// Generalized Gauss-Laguerre rule for the Gamma(shape, 1) law.
const Rule& gauss_laguerre_gamma(int n, int shape);

}  // namespace illiquid::quad
