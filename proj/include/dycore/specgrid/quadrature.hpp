#pragma once

#include <vector>

namespace dycore::specgrid {

// One-dimensional nodal basis on [-1, 1].
struct Quadrature1D {
  int order = 0;                    // polynomial degree N; 0 marks a collapsed direction
  std::vector<double> nodes;        // ascending
  std::vector<double> weights;
  std::vector<double> derivative;   // row-major, D[i * n + j] = l_j'(x_i)

  int size() const { return static_cast<int>(nodes.size()); }
  double d(int i, int j) const { return derivative[static_cast<std::size_t>(i) * nodes.size() + j]; }
};

// Legendre polynomial P_n(x) and its derivative.
void legendre(int n, double x, double& p, double& dp);

// Gauss-Lobatto-Legendre nodes and weights of degree N >= 1 (derivative left empty).
Quadrature1D lgl_nodes_weights(int order);

// Lagrange derivative matrix of the quadrature nodes.
std::vector<double> derivative_matrix(const Quadrature1D& q);

// Nodes, weights and derivative matrix together.
Quadrature1D lgl_quadrature(int order);

// Single node at 0 with weight 2 and zero derivative; used for the thin y direction of box meshes.
Quadrature1D collapsed_quadrature();

}  // namespace dycore::specgrid
