#include "dycore/specgrid/quadrature.hpp"

#include <cmath>
#include <numbers>

#include "dycore/common.hpp"

namespace dycore::specgrid {

void legendre(int n, double x, double& p, double& dp) {
  double p0 = 1.0, p1 = x;
  if (n == 0) {
    p = 1.0;
    dp = 0.0;
    return;
  }
  for (int k = 2; k <= n; ++k) {
    const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
    p0 = p1;
    p1 = pk;
  }
  p = p1;
  // n P_{n-1} - n x P_n = (1 - x^2) P_n'; use the endpoint limit at |x| = 1.
  if (std::fabs(std::fabs(x) - 1.0) < 1e-15) {
    dp = 0.5 * n * (n + 1.0) * std::pow(x, n + 1);
  } else {
    dp = n * (p0 - x * p1) / (1.0 - x * x);
  }
}

Quadrature1D lgl_nodes_weights(int order) {
  if (order < 1) throw ConfigError("LGL quadrature needs polynomial degree N >= 1, got " + std::to_string(order));
  const int n = order + 1;
  Quadrature1D q;
  q.order = order;
  q.nodes.resize(n);
  q.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    // Newton on x P_N - P_{N-1} = 0 starting from Chebyshev-Gauss-Lobatto points.
    double x = -std::cos(std::numbers::pi * i / order);
    if (i > 0 && i < order) {
      for (int it = 0; it < 100; ++it) {
        double pn, dpn, pm, dpm;
        legendre(order, x, pn, dpn);
        legendre(order - 1, x, pm, dpm);
        const double dx = (x * pn - pm) / ((order + 1.0) * pn);
        x -= dx;
        if (std::fabs(dx) < 1e-16) break;
      }
    }
    q.nodes[i] = x;
  }
  // Enforce exact symmetry of the node set.
  for (int i = 0; i < n / 2; ++i) {
    const double a = 0.5 * (q.nodes[n - 1 - i] - q.nodes[i]);
    q.nodes[i] = -a;
    q.nodes[n - 1 - i] = a;
  }
  if (n % 2 == 1) q.nodes[n / 2] = 0.0;
  for (int i = 0; i < n; ++i) {
    double p, dp;
    legendre(order, q.nodes[i], p, dp);
    q.weights[i] = 2.0 / (order * (order + 1.0) * p * p);
  }
  return q;
}

std::vector<double> derivative_matrix(const Quadrature1D& q) {
  const int n = q.size();
  std::vector<double> bary(n, 1.0);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k)
      if (k != j) bary[j] *= (q.nodes[j] - q.nodes[k]);
  std::vector<double> d(static_cast<std::size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i) {
    double diag = 0.0;
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      const double v = (bary[i] / bary[j]) / (q.nodes[i] - q.nodes[j]);
      d[i * n + j] = v;
      diag -= v;
    }
    d[i * n + i] = diag;
  }
  return d;
}

Quadrature1D lgl_quadrature(int order) {
  Quadrature1D q = lgl_nodes_weights(order);
  q.derivative = derivative_matrix(q);
  return q;
}

Quadrature1D collapsed_quadrature() {
  Quadrature1D q;
  q.order = 0;
  q.nodes = {0.0};
  q.weights = {2.0};
  q.derivative = {0.0};
  return q;
}

}  // namespace dycore::specgrid
