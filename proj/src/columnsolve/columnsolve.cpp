#include "dycore/columnsolve/columnsolve.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dycore/simd/kernels.hpp"

namespace dycore::columnsolve {
namespace {

constexpr int W = simd::kLanes;

// Position of unknown (level, field) of a column in the problem's flat system vector.
inline std::size_t flat_index(int fields_total_dofs, int levels, int column, int level, int field) {
  return static_cast<std::size_t>(field) * fields_total_dofs + static_cast<std::size_t>(column) * levels + level;
}

}  // namespace

int ColumnJacobian::num_groups() const { return (num_columns + W - 1) / W; }

std::size_t ColumnJacobian::group_stride() const {
  return static_cast<std::size_t>(size) * (2 * bandwidth - 1) * W;
}

double ColumnJacobian::entry(int column, int i, int j) const {
  if (std::abs(i - j) >= bandwidth) return 0.0;
  return bands[(column / W) * group_stride() + simd::band_index(bandwidth, i, j, column % W)];
}

Eigen::MatrixXd column_matrix(const ColumnJacobian& jac, int column) {
  if (jac.factored) throw Error("column matrix requested after factoring");
  Eigen::MatrixXd a(jac.size, jac.size);
  for (int i = 0; i < jac.size; ++i)
    for (int j = 0; j < jac.size; ++j) a(i, j) = jac.entry(column, i, j);
  return a;
}

ColumnJacobian build_column_jacobian(const imexcore::ImplicitProblem& problem) {
  if (problem.dim() != imexcore::ImplicitDim::k1D) throw ConfigError("column Jacobians need the vertical-only problem");
  const auto& dofs = problem.ops().disc().dofs();
  const int n = problem.num_dofs();
  ColumnJacobian jac;
  jac.levels = dofs.levels_per_column;
  jac.num_columns = n / jac.levels;
  jac.fields = problem.fields();
  jac.size = jac.levels * jac.fields;
  jac.lambda = problem.lambda();
  const int order = problem.ops().disc().mesh().order;
  // Structural bound: two assembled derivatives (Schur form) reach two elements away.
  const int nb_max = std::min(jac.size, (2 * order + 2) * jac.fields);
  const int m = jac.size, nf = jac.fields, nl = jac.levels, nc = jac.num_columns;
  const krylov::LinearMap map = problem.lhs_map();
  std::vector<double> x(map.dim, 0.0), y(map.dim);

  // Probe into a band of the structural bound, then trim to the observed bandwidth.
  const std::size_t wide_stride = static_cast<std::size_t>(m) * (2 * nb_max - 1) * W;
  std::vector<double> wide(wide_stride * ((nc + W - 1) / W), 0.0);
  jac.norms.assign(nc, 0.0);
  int nb = 1;
  for (int level = 0; level < nl; ++level) {
    for (int f = 0; f < nf; ++f) {
      for (int c = 0; c < nc; ++c) x[flat_index(n, nl, c, level, f)] = 1.0;
      map.apply(x, y);
      for (int c = 0; c < nc; ++c) x[flat_index(n, nl, c, level, f)] = 0.0;
      const int j = level * nf + f;
      for (int c = 0; c < nc; ++c) {
        for (int l2 = 0; l2 < nl; ++l2) {
          for (int f2 = 0; f2 < nf; ++f2) {
            const double v = y[flat_index(n, nl, c, l2, f2)];
            if (v == 0.0) continue;
            const int i = l2 * nf + f2;
            if (std::abs(i - j) >= nb_max)
              throw SolverError("column Jacobian entry outside the structural band in column " + std::to_string(c));
            nb = std::max(nb, std::abs(i - j) + 1);
            wide[(c / W) * wide_stride + simd::band_index(nb_max, i, j, c % W)] = v;
            jac.norms[c] = std::max(jac.norms[c], std::fabs(v));
          }
        }
      }
    }
  }

  // Leakage check with single-column probes on a sample of columns and levels.
  for (int c : {0, nc / 2, nc - 1}) {
    for (int level : {0, nl / 2, nl - 1}) {
      for (int f = 0; f < nf; ++f) {
        x[flat_index(n, nl, c, level, f)] = 1.0;
        map.apply(x, y);
        x[flat_index(n, nl, c, level, f)] = 0.0;
        double inside = 0.0, outside = 0.0;
        for (int ff = 0; ff < nf; ++ff)
          for (int d = 0; d < n; ++d) {
            const double v = std::fabs(y[static_cast<std::size_t>(ff) * n + d]);
            if (d / nl == c)
              inside = std::max(inside, v);
            else
              outside = std::max(outside, v);
          }
        if (outside > 1e-13 * inside)
          throw SolverError("vertical operator couples column " + std::to_string(c) + " to other columns");
      }
    }
  }

  jac.bandwidth = nb;
  const std::size_t stride = jac.group_stride();
  jac.bands.assign(stride * jac.num_groups(), 0.0);
  for (int g = 0; g < jac.num_groups(); ++g)
    for (int i = 0; i < m; ++i)
      for (int j = std::max(0, i - nb + 1); j < std::min(m, i + nb); ++j)
        for (int l = 0; l < W; ++l)
          jac.bands[g * stride + simd::band_index(nb, i, j, l)] =
              wide[g * wide_stride + simd::band_index(nb_max, i, j, l)];
  // Padding lanes of the last group get identity matrices.
  for (int c = nc; c < jac.num_groups() * W; ++c)
    for (int i = 0; i < m; ++i) jac.bands[(c / W) * stride + simd::band_index(nb, i, i, c % W)] = 1.0;
  return jac;
}

void lu_factor_banded(ColumnJacobian& jac) {
  if (jac.factored) throw Error("column Jacobian is already factored");
  const std::size_t stride = jac.group_stride();
  const int groups = jac.num_groups();
  const simd::KernelTable& k = simd::kernels();
  std::vector<std::vector<int>> failed(groups);
  std::vector<std::vector<double>> saved(groups);
#pragma omp parallel for schedule(dynamic)
  for (int g = 0; g < groups; ++g) {
    double* ab = jac.bands.data() + g * stride;
    std::vector<double> copy(ab, ab + stride);
    double min_pivot[W];
    k.band_lu_factor(jac.size, jac.bandwidth, ab, min_pivot);
    for (int l = 0; l < W; ++l) {
      const int c = g * W + l;
      if (c >= jac.num_columns) continue;
      if (!(min_pivot[l] >= 1e-12 * jac.norms[c])) failed[g].push_back(l);
    }
    if (!failed[g].empty()) saved[g] = std::move(copy);
  }
  for (int g = 0; g < groups; ++g) {
    for (int l : failed[g]) {
      const int c = g * W + l;
      Eigen::MatrixXd a = Eigen::MatrixXd::Zero(jac.size, jac.size);
      for (int i = 0; i < jac.size; ++i)
        for (int j = std::max(0, i - jac.bandwidth + 1); j < std::min(jac.size, i + jac.bandwidth); ++j)
          a(i, j) = saved[g][simd::band_index(jac.bandwidth, i, j, l)];
      Eigen::PartialPivLU<Eigen::MatrixXd> lu(a);
      const Eigen::MatrixXd u = lu.matrixLU().triangularView<Eigen::Upper>();
      if (!(u.diagonal().cwiseAbs().minCoeff() >= 1e-12 * jac.norms[c]))
        throw SolverError("column Jacobian " + std::to_string(c) + " is singular");
      jac.pivoted.emplace(c, std::move(lu));
    }
  }
  jac.factored = true;
}

void solve_columns_direct(const ColumnJacobian& jac, std::span<const double> rhs, std::span<double> x) {
  if (!jac.factored) throw Error("column Jacobian must be factored before solving");
  const int nl = jac.levels, nf = jac.fields, m = jac.size, nc = jac.num_columns;
  const int n = nl * nc;
  if (rhs.size() != static_cast<std::size_t>(n) * nf || x.size() != rhs.size())
    throw Error("right-hand side does not match the column Jacobian");
  const std::size_t stride = jac.group_stride();
  const simd::KernelTable& k = simd::kernels();
  const int groups = jac.num_groups();
#pragma omp parallel for schedule(static)
  for (int g = 0; g < groups; ++g) {
    thread_local std::vector<double> buf;
    buf.assign(static_cast<std::size_t>(m) * W, 0.0);
    for (int l = 0; l < W; ++l) {
      const int c = g * W + l;
      if (c >= nc) continue;
      for (int level = 0; level < nl; ++level)
        for (int f = 0; f < nf; ++f) buf[(level * nf + f) * W + l] = rhs[flat_index(n, nl, c, level, f)];
    }
    k.band_lu_solve(m, jac.bandwidth, jac.bands.data() + g * stride, buf.data());
    for (int l = 0; l < W; ++l) {
      const int c = g * W + l;
      if (c >= nc) continue;
      for (int level = 0; level < nl; ++level)
        for (int f = 0; f < nf; ++f) x[flat_index(n, nl, c, level, f)] = buf[(level * nf + f) * W + l];
    }
  }
  for (const auto& [c, lu] : jac.pivoted) {
    Eigen::VectorXd b(m);
    for (int level = 0; level < nl; ++level)
      for (int f = 0; f < nf; ++f) b(level * nf + f) = rhs[flat_index(n, nl, c, level, f)];
    const Eigen::VectorXd s = lu.solve(b);
    for (int level = 0; level < nl; ++level)
      for (int f = 0; f < nf; ++f) x[flat_index(n, nl, c, level, f)] = s(level * nf + f);
  }
}

}  // namespace dycore::columnsolve
