#pragma once

#include <array>
#include <vector>

namespace dycore::imexcore {

// Paired explicit/implicit Runge-Kutta coefficients, row-major s x s.
struct ButcherPair {
  int stages = 0;
  std::vector<double> a, b, c;     // explicit
  std::vector<double> at, bt, ct;  // implicit
  double diagonal = 0.0;           // shared implicit diagonal of stages >= 2

  double ae(int i, int j) const { return a[i * stages + j]; }
  double ai(int i, int j) const { return at[i * stages + j]; }

  // Checks row sums, sum(b) = 1, b = bt and the singly-diagonal structure. Throws on failure.
  void validate(double tol = 1e-14) const;

  // Second-order three-stage pair with an explicit first stage and diagonal 1 - 1/sqrt(2).
  static ButcherPair ark2();
};

// Two-step IMEX BDF: q_e = sum alpha_k q^{n-k} + chi dt sum beta_k R(q^{n-k}).
struct BdfCoefficients {
  std::array<double, 2> alpha{4.0 / 3.0, -1.0 / 3.0};
  std::array<double, 2> beta{2.0, -1.0};
  double chi = 2.0 / 3.0;
};

}  // namespace dycore::imexcore
