#include <Eigen/Dense>
#include <cmath>
#include <memory>
#include <random>

#include "doctest.h"
#include "dycore/columnsolve/columnsolve.hpp"
#include "dycore/imexcore/stepper.hpp"
#include "dycore/simd/kernels.hpp"

using namespace dycore;
using namespace dycore::columnsolve;
using namespace dycore::imexcore;
using namespace dycore::euler;
using namespace dycore::specgrid;

namespace {

struct Setup {
  std::unique_ptr<Discretization> disc;
  std::unique_ptr<ReferenceState> ref;
  std::unique_ptr<EulerOperators> ops;
  Setup(ElementMesh mesh, Galerkin kind, EquationSet set, BackgroundProfile profile = {300.0, 0.01}) {
    disc = std::make_unique<Discretization>(std::move(mesh), kind);
    ref = std::make_unique<ReferenceState>(*disc, profile, GasConstants{});
    ops = std::make_unique<EulerOperators>(*disc, *ref, set);
  }
};

std::vector<double> random_vector(int n, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> v(n);
  for (double& x : v) x = u(rng);
  return v;
}

// Multiplies by the block-diagonal column matrices using the system layout.
std::vector<double> column_product(const ColumnJacobian& jac, const std::vector<Eigen::MatrixXd>& mats,
                                   const std::vector<double>& x) {
  const int nl = jac.levels, nf = jac.fields, nc = jac.num_columns;
  const int n = nc * nl;
  std::vector<double> y(x.size(), 0.0);
  for (int c = 0; c < nc; ++c) {
    Eigen::VectorXd xc(jac.size);
    for (int l = 0; l < nl; ++l)
      for (int f = 0; f < nf; ++f) xc(l * nf + f) = x[f * n + c * nl + l];
    const Eigen::VectorXd yc = mats[c] * xc;
    for (int l = 0; l < nl; ++l)
      for (int f = 0; f < nf; ++f) y[f * n + c * nl + l] = yc(l * nf + f);
  }
  return y;
}

ColumnJacobian hand_jacobian(const Eigen::MatrixXd& a, int nb) {
  ColumnJacobian jac;
  jac.num_columns = 1;
  jac.levels = static_cast<int>(a.rows());
  jac.fields = 1;
  jac.size = jac.levels;
  jac.bandwidth = nb;
  jac.bands.assign(jac.group_stride(), 0.0);
  jac.norms.assign(1, a.cwiseAbs().maxCoeff());
  for (int l = 0; l < simd::kLanes; ++l)
    for (int i = 0; i < jac.size; ++i)
      for (int j = std::max(0, i - nb + 1); j < std::min(jac.size, i + nb); ++j)
        jac.bands[simd::band_index(nb, i, j, l)] = l == 0 ? a(i, j) : (i == j ? 1.0 : 0.0);
  return jac;
}

}  // namespace

TEST_CASE("column Jacobian probing") {
  for (auto [form, set] : {std::pair{ImplicitForm::kSchur, EquationSet::kSet2NC},
                           std::pair{ImplicitForm::kSchur, EquationSet::kSet2C},
                           std::pair{ImplicitForm::kStandard, EquationSet::kSet2NC},
                           std::pair{ImplicitForm::kStandard, EquationSet::kSet2C}}) {
    Setup s(build_box_mesh(5, 3, 5000.0, 3000.0, 3), Galerkin::kContinuous, set);
    ImplicitProblem p(*s.ops, form, ImplicitDim::k1D);
    const int nl = s.disc->dofs().levels_per_column;
    CHECK(nl == 10);

    p.set_lambda(0.0);
    ColumnJacobian id = build_column_jacobian(p);
    CHECK(id.size == (form == ImplicitForm::kSchur ? nl : 5 * nl));
    for (int c = 0; c < id.num_columns; ++c) {
      const Eigen::MatrixXd m = column_matrix(id, c);
      CHECK((m - Eigen::MatrixXd::Identity(id.size, id.size)).cwiseAbs().maxCoeff() == 0.0);
    }

    p.set_lambda(4.0);
    ColumnJacobian jac = build_column_jacobian(p);
    CHECK(jac.bandwidth <= (2 * 3 + 2) * jac.fields);
    CHECK(jac.num_columns == 16);
    std::vector<Eigen::MatrixXd> mats;
    for (int c = 0; c < jac.num_columns; ++c) mats.push_back(column_matrix(jac, c));
    // Product with the assembled matrices equals the matrix-free operator.
    const krylov::LinearMap map = p.lhs_map();
    std::vector<double> x = random_vector(map.dim, 9), y(map.dim);
    if (form == ImplicitForm::kStandard) {
      State st = s.ops->make_state();
      std::copy(x.begin(), x.end(), st.data.begin());
      s.ops->project_velocity(st);
      x = st.data;
    }
    map.apply(x, y);
    const std::vector<double> yc = column_product(jac, mats, x);
    double err = 0.0, scale = 0.0;
    for (int i = 0; i < map.dim; ++i) {
      err = std::max(err, std::fabs(y[i] - yc[i]));
      scale = std::max(scale, std::fabs(y[i]));
    }
    CHECK(err <= 1e-12 * scale);
    // Entries outside the band vanish.
    for (int i = 0; i < jac.size; ++i)
      for (int j = 0; j < jac.size; ++j)
        if (std::abs(i - j) >= jac.bandwidth) CHECK(mats[3](i, j) == 0.0);
  }
  SUBCASE("the full three-dimensional problem is rejected") {
    Setup s(build_box_mesh(2, 2, 200.0, 200.0, 2), Galerkin::kContinuous, EquationSet::kSet2C);
    ImplicitProblem p(*s.ops, ImplicitForm::kSchur, ImplicitDim::k3D);
    p.set_lambda(1.0);
    CHECK_THROWS(build_column_jacobian(p));
  }
}

TEST_CASE("banded LU against a dense oracle") {
  Eigen::MatrixXd a(3, 3);
  a << 2, 1, 0, 1, 2, 1, 0, 1, 2;
  ColumnJacobian jac = hand_jacobian(a, 2);
  lu_factor_banded(jac);
  CHECK(jac.factored);
  CHECK(jac.pivoted.empty());
  // Doolittle factors worked by hand: L21 = 1/2, U22 = 3/2, L32 = 2/3, U33 = 4/3.
  CHECK(jac.entry(0, 1, 0) == doctest::Approx(0.5));
  CHECK(jac.entry(0, 1, 1) == doctest::Approx(1.5));
  CHECK(jac.entry(0, 2, 1) == doctest::Approx(2.0 / 3.0));
  CHECK(jac.entry(0, 2, 2) == doctest::Approx(4.0 / 3.0));
  CHECK(jac.entry(0, 0, 1) == doctest::Approx(1.0));
  std::vector<double> b{1.0, 2.0, 3.0}, x(3);
  solve_columns_direct(jac, b, x);
  const Eigen::VectorXd ref = a.lu().solve(Eigen::Vector3d(1.0, 2.0, 3.0));
  for (int i = 0; i < 3; ++i) CHECK(x[i] == doctest::Approx(ref(i)).epsilon(1e-14));

  SUBCASE("random banded matrix reconstructs from its factors") {
    const int m = 12, nb = 4;
    Eigen::MatrixXd r = Eigen::MatrixXd::Zero(m, m);
    std::mt19937 rng(4);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int i = 0; i < m; ++i)
      for (int j = std::max(0, i - nb + 1); j < std::min(m, i + nb); ++j) r(i, j) = u(rng) + (i == j ? 8.0 : 0.0);
    ColumnJacobian f = hand_jacobian(r, nb);
    lu_factor_banded(f);
    Eigen::MatrixXd l = Eigen::MatrixXd::Identity(m, m), up = Eigen::MatrixXd::Zero(m, m);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) {
        if (j < i) l(i, j) = f.entry(0, i, j);
        else up(i, j) = f.entry(0, i, j);
      }
    CHECK((l * up - r).cwiseAbs().maxCoeff() <= 1e-11);
  }
  SUBCASE("a zero leading pivot falls back to partial pivoting") {
    Eigen::MatrixXd z(2, 2);
    z << 0, 1, 1, 0;
    ColumnJacobian f = hand_jacobian(z, 2);
    lu_factor_banded(f);
    CHECK(f.pivoted.count(0) == 1);
    std::vector<double> rhs{3.0, 5.0}, sol(2);
    solve_columns_direct(f, rhs, sol);
    CHECK(sol[0] == doctest::Approx(5.0));
    CHECK(sol[1] == doctest::Approx(3.0));
  }
  SUBCASE("a singular column is reported") {
    Eigen::MatrixXd z = Eigen::MatrixXd::Zero(2, 2);
    z(0, 1) = 1.0;
    ColumnJacobian f = hand_jacobian(z, 2);
    CHECK_THROWS_AS(lu_factor_banded(f), SolverError);
  }
}

TEST_CASE("direct column solves") {
  for (auto [form, set] : {std::pair{ImplicitForm::kSchur, EquationSet::kSet2NC},
                           std::pair{ImplicitForm::kStandard, EquationSet::kSet2C}}) {
    Setup s(build_box_mesh(6, 4, 6000.0, 8000.0, 3), Galerkin::kContinuous, set);
    ImplicitProblem p(*s.ops, form, ImplicitDim::k1D);
    const double lambda = 30.0;
    p.set_lambda(lambda);
    ColumnJacobian jac = build_column_jacobian(p);
    std::vector<Eigen::MatrixXd> mats;
    for (int c = 0; c < jac.num_columns; ++c) mats.push_back(column_matrix(jac, c));
    lu_factor_banded(jac);
    CHECK(jac.pivoted.empty());
    const int n = p.system_size();

    std::vector<double> zero(n, 0.0), x(n, 1.0);
    solve_columns_direct(jac, zero, x);
    for (double v : x) CHECK(v == 0.0);

    // b = A x round trip.
    const std::vector<double> xt = random_vector(n, 2);
    const std::vector<double> b = column_product(jac, mats, xt);
    solve_columns_direct(jac, b, x);
    double err = 0.0;
    for (int i = 0; i < n; ++i) err = std::max(err, std::fabs(x[i] - xt[i]));
    CHECK(err <= 1e-9);

    // Direct stage solve agrees with an iterative one.
    State qe = s.ops->make_state();
    const auto& coords = s.disc->dofs().coords;
    for (int i = 0; i < qe.num_dofs; ++i) {
      qe.field(kRho)[i] = 1e-3 * std::sin(coords[i][0] / 900.0 + coords[i][2] / 1300.0);
      qe.field(kMomZ)[i] = std::cos(coords[i][2] / 2000.0) * std::sin(coords[i][0] / 1000.0);
      qe.field(kTheta)[i] = 0.1 * std::sin(coords[i][2] / 800.0);
    }
    s.ops->project_velocity(qe);
    SolverSettings direct;
    direct.kind = SolverKind::kDirect;
    SolverSettings iter;
    iter.tol = 1e-12;
    iter.max_iter = 3000;
    iter.restart = 300;
    StageSolver sd(p, direct), si(p, iter);
    State a = qe, c = qe;
    sd.solve(qe, lambda, a);
    si.solve(qe, lambda, c);
    double scale = 0.0, diff = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i) {
      scale = std::max(scale, std::fabs(c.data[i]));
      diff = std::max(diff, std::fabs(a.data[i] - c.data[i]));
    }
    CHECK(diff <= 1e-8 * scale);
    // Factorizations are cached per lambda.
    CHECK(&sd.jacobian(lambda) == &sd.jacobian(lambda));
  }
}

TEST_CASE("storage of standard and Schur column factors") {
  Setup s(build_box_mesh(4, 4, 4000.0, 4000.0, 4), Galerkin::kContinuous, EquationSet::kSet2NC);
  ImplicitProblem ps(*s.ops, ImplicitForm::kSchur, ImplicitDim::k1D);
  ImplicitProblem pf(*s.ops, ImplicitForm::kStandard, ImplicitDim::k1D);
  ps.set_lambda(10.0);
  pf.set_lambda(10.0);
  const ColumnJacobian js = build_column_jacobian(ps), jf = build_column_jacobian(pf);
  const double ratio = static_cast<double>(jf.storage_doubles()) / js.storage_doubles();
  MESSAGE("bandwidths " << jf.bandwidth << " vs " << js.bandwidth << ", storage ratio " << ratio);
  CHECK(jf.size == 5 * js.size);
  CHECK(ratio > 5.0);
  // Dense column matrices would differ by the square of the field count.
  const double dense_ratio = static_cast<double>(jf.size) * jf.size / (static_cast<double>(js.size) * js.size);
  CHECK(dense_ratio == 25.0);
}
