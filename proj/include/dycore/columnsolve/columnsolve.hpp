#pragma once

#include <Eigen/Dense>
#include <map>
#include <span>
#include <vector>

#include "dycore/imexcore/implicit_problem.hpp"

namespace dycore::columnsolve {

// Block-diagonal Jacobian of a vertical-only implicit system: one banded M x M matrix per
// column, M = levels * fields, with row/column index level * fields + field. Matrices of
// kLanes consecutive columns are interleaved for the banded LU kernels.
struct ColumnJacobian {
  int num_columns = 0;
  int levels = 0;
  int fields = 0;
  int size = 0;       // M
  int bandwidth = 0;  // A_ij = 0 for |i - j| >= bandwidth
  double lambda = 0.0;
  bool factored = false;
  std::vector<double> bands;                        // num_groups * M * (2 nb - 1) * kLanes
  std::vector<double> norms;                        // max |A_ij| per column before factoring
  std::map<int, Eigen::PartialPivLU<Eigen::MatrixXd>> pivoted;  // columns that needed pivoting

  int num_groups() const;
  std::size_t group_stride() const;
  double entry(int column, int i, int j) const;  // banded storage lookup (0 outside the band)
  // Doubles held by the factor storage.
  std::size_t storage_doubles() const { return bands.size(); }
};

// Probes the 1D left-hand side at the problem's current lambda: for every level and field,
// one application with that unknown set in all columns at once. Throws SolverError when
// a single-column probe leaks into another column (relative 1e-13 of the response).
ColumnJacobian build_column_jacobian(const imexcore::ImplicitProblem& problem);

// No-pivot banded Doolittle LU (elimination limited to min(k + nb, M)). Columns whose
// pivot falls below 1e-12 of their largest entry are refactored densely with partial
// pivoting; a singular column throws SolverError naming it.
void lu_factor_banded(ColumnJacobian& jac);

// Solves every column system; rhs and x use the problem's system layout.
void solve_columns_direct(const ColumnJacobian& jac, std::span<const double> rhs, std::span<double> x);

// Dense copy of one column matrix (before factoring) for checks.
Eigen::MatrixXd column_matrix(const ColumnJacobian& jac, int column);

}  // namespace dycore::columnsolve
