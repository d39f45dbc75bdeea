#include "illiquid/quadrature.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <tuple>

namespace illiquid::quad {
namespace {

// Golub-Welsch: nodes are eigenvalues of the Jacobi matrix of the monic
// recurrence, weights are squared first eigenvector components (the
// measure is normalized to total mass one).
Rule golub_welsch(const Eigen::VectorXd& diag, const Eigen::VectorXd& offdiag) {
  const auto n = diag.size();
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    jacobi(i, i) = diag(i);
    if (i + 1 < n) {
      jacobi(i, i + 1) = offdiag(i);
      jacobi(i + 1, i) = offdiag(i);
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(jacobi);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("quadrature: eigen decomposition failed");
  }
  Rule rule;
  rule.nodes.resize(static_cast<std::size_t>(n));
  rule.weights.resize(static_cast<std::size_t>(n));
  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double v0 = solver.eigenvectors()(0, i);
    rule.nodes[static_cast<std::size_t>(i)] = solver.eigenvalues()(i);
    rule.weights[static_cast<std::size_t>(i)] = v0 * v0;
    total += v0 * v0;
  }
  for (double& w : rule.weights) w /= total;
  return rule;
}

Rule make_legendre(int n) {
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd off(std::max(n - 1, 0));
  for (int i = 1; i < n; ++i) {
    const double k = i;
    off(i - 1) = k / std::sqrt(4.0 * k * k - 1.0);
  }
  Rule rule = golub_welsch(diag, off);
  // Legendre nodes are symmetric; symmetrize to remove eigen-solver noise.
  for (int i = 0; i < n / 2; ++i) {
    const auto lo = static_cast<std::size_t>(i);
    const auto hi = static_cast<std::size_t>(n - 1 - i);
    const double x = 0.5 * (rule.nodes[hi] - rule.nodes[lo]);
    const double w = 0.5 * (rule.weights[hi] + rule.weights[lo]);
    rule.nodes[lo] = -x;
    rule.nodes[hi] = x;
    rule.weights[lo] = w;
    rule.weights[hi] = w;
  }
  if (n % 2 == 1) rule.nodes[static_cast<std::size_t>(n / 2)] = 0.0;
  for (double& x : rule.nodes) x = 0.5 * (1.0 + x);
  return rule;
}

Rule make_hermite(int n) {
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd off(std::max(n - 1, 0));
  for (int i = 1; i < n; ++i) off(i - 1) = std::sqrt(static_cast<double>(i));
  Rule rule = golub_welsch(diag, off);
  for (int i = 0; i < n / 2; ++i) {
    const auto lo = static_cast<std::size_t>(i);
    const auto hi = static_cast<std::size_t>(n - 1 - i);
    const double x = 0.5 * (rule.nodes[hi] - rule.nodes[lo]);
    const double w = 0.5 * (rule.weights[hi] + rule.weights[lo]);
    rule.nodes[lo] = -x;
    rule.nodes[hi] = x;
    rule.weights[lo] = w;
    rule.weights[hi] = w;
  }
  if (n % 2 == 1) rule.nodes[static_cast<std::size_t>(n / 2)] = 0.0;
  return rule;
}

Rule make_laguerre(int n, int shape) {
  const double alpha = shape - 1.0;
  Eigen::VectorXd diag(n);
  Eigen::VectorXd off(std::max(n - 1, 0));
  for (int i = 0; i < n; ++i) diag(i) = 2.0 * i + alpha + 1.0;
  for (int i = 1; i < n; ++i) off(i - 1) = std::sqrt(i * (i + alpha));
  return golub_welsch(diag, off);
}

template <typename Key, typename Make>
const Rule& cached(std::map<Key, std::unique_ptr<Rule>>& cache, std::mutex& mu,
                   const Key& key, Make make) {
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(key);
  if (it == cache.end()) {
    it = cache.emplace(key, std::make_unique<Rule>(make())).first;
  }
  return *it->second;
}

}  // namespace

const Rule& gauss_legendre_unit(int n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre_unit: n must be >= 1");
  static std::map<int, std::unique_ptr<Rule>> cache;
  static std::mutex mu;
  return cached(cache, mu, n, [n] { return make_legendre(n); });
}

const Rule& gauss_hermite_normal(int n) {
  if (n < 1) throw std::invalid_argument("gauss_hermite_normal: n must be >= 1");
  static std::map<int, std::unique_ptr<Rule>> cache;
  static std::mutex mu;
  return cached(cache, mu, n, [n] { return make_hermite(n); });
}

const Rule& gauss_laguerre_gamma(int n, int shape) {
  if (n < 1 || shape < 1) {
    throw std::invalid_argument("gauss_laguerre_gamma: n and shape must be >= 1");
  }
  static std::map<std::pair<int, int>, std::unique_ptr<Rule>> cache;
  static std::mutex mu;
  return cached(cache, mu, std::make_pair(n, shape),
                [n, shape] { return make_laguerre(n, shape); });
}

}  // namespace illiquid::quad
