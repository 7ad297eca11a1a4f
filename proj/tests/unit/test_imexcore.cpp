#include <Eigen/Dense>
#include <cmath>
#include <memory>
#include <random>

#include "doctest.h"
#include "dycore/imexcore/stepper.hpp"

using namespace dycore;
using namespace dycore::imexcore;
using namespace dycore::euler;
using namespace dycore::specgrid;

namespace {

struct Setup {
  std::unique_ptr<Discretization> disc;
  std::unique_ptr<ReferenceState> ref;
  std::unique_ptr<EulerOperators> ops;
  Setup(ElementMesh mesh, Galerkin kind, EquationSet set, BackgroundProfile profile = {}) {
    disc = std::make_unique<Discretization>(std::move(mesh), kind);
    ref = std::make_unique<ReferenceState>(*disc, profile, GasConstants{});
    ops = std::make_unique<EulerOperators>(*disc, *ref, set);
  }
};

State random_state(const EulerOperators& ops, unsigned seed, bool project = true) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  State q = ops.make_state();
  const double scale[5] = {1e-3, 1.0, 1.0, 1.0, 0.3};
  for (int f = 0; f < kNumFields; ++f)
    for (int i = 0; i < q.num_dofs; ++i) q.field(f)[i] = scale[f] * u(rng);
  if (project) ops.project_velocity(q);
  return q;
}

double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::fabs(x));
  return m;
}

double max_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::fabs(a[i] - b[i]));
  return m;
}

Eigen::MatrixXd probe(const krylov::LinearMap& m) {
  Eigen::MatrixXd a(m.dim, m.dim);
  std::vector<double> x(m.dim, 0.0), y(m.dim);
  for (int j = 0; j < m.dim; ++j) {
    x[j] = 1.0;
    m.apply(x, y);
    x[j] = 0.0;
    for (int i = 0; i < m.dim; ++i) a(i, j) = y[i];
  }
  return a;
}

// Solves the standard or Schur stage system with tight GMRES.
State solve_stage(ImplicitProblem& p, const State& qe, double lambda, double tol = 1e-12) {
  SolverSettings s;
  s.tol = tol;
  s.max_iter = 4000;
  s.restart = 200;
  StageSolver solver(p, s);
  State q = qe;
  solver.solve(qe, lambda, q);
  return q;
}

// Oracle for the explicit part of a tableau, written independently of the integrator.
void explicit_rk(std::vector<double>& q, double dt, const ButcherPair& t, const VectorFn& f) {
  const std::size_t n = q.size();
  std::vector<std::vector<double>> k(t.stages, std::vector<double>(n)), st(t.stages, std::vector<double>(n));
  for (int i = 0; i < t.stages; ++i) {
    st[i] = q;
    for (int j = 0; j < i; ++j)
      if (t.ae(i, j) != 0.0)
        for (std::size_t m = 0; m < n; ++m) st[i][m] += (dt * t.ae(i, j)) * k[j][m];
    f(st[i], k[i]);
  }
  for (int i = 0; i < t.stages; ++i)
    if (t.b[i] != 0.0)
      for (std::size_t m = 0; m < n; ++m) q[m] += (dt * t.b[i]) * k[i][m];
}

// Scalar IMEX test problem q' = -q^2 + l q with L = l.
ImexFunctions scalar_problem(double l) {
  ImexFunctions f;
  f.rhs = [l](std::span<const double> x, std::span<double> y) {
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = -x[i] * x[i] + l * x[i];
  };
  f.linear = [l](std::span<const double> x, std::span<double> y) {
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = l * x[i];
  };
  f.solve = [l](std::span<const double> qe, double lambda, std::span<double> q) {
    for (std::size_t i = 0; i < qe.size(); ++i) q[i] = qe[i] / (1.0 - lambda * l);
  };
  return f;
}

double observed_order(double e1, double e2) { return std::log2(e1 / e2); }

}  // namespace

TEST_CASE("additive tableau invariants") {
  const ButcherPair t = ButcherPair::ark2();
  CHECK_NOTHROW(t.validate());
  double sb = 0.0;
  for (int i = 0; i < 3; ++i) {
    double se = 0.0, si = 0.0;
    for (int j = 0; j < 3; ++j) {
      se += t.ae(i, j);
      si += t.ai(i, j);
    }
    CHECK(se == doctest::Approx(t.c[i]).epsilon(1e-14));
    CHECK(si == doctest::Approx(t.ct[i]).epsilon(1e-14));
    CHECK(t.b[i] == t.bt[i]);
    // Stiffly accurate implicit part.
    CHECK(t.bt[i] == doctest::Approx(t.ai(2, i)).epsilon(1e-15));
    sb += t.b[i];
  }
  CHECK(sb == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(t.ai(1, 1) == t.ai(2, 2));
  CHECK(t.diagonal == doctest::Approx(1.0 - 1.0 / std::sqrt(2.0)));
  CHECK(t.ai(0, 0) == 0.0);
  // Second-order conditions: sum b c = 1/2 for both parts.
  double bc = 0.0, bct = 0.0;
  for (int i = 0; i < 3; ++i) {
    bc += t.b[i] * t.c[i];
    bct += t.bt[i] * t.ct[i];
  }
  CHECK(bc == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(bct == doctest::Approx(0.5).epsilon(1e-14));

  // The weights with the opposite signs on the first two entries are inconsistent.
  ButcherPair bad = t;
  bad.b[0] = bad.b[1] = -1.0 / (2.0 * std::sqrt(2.0));
  bad.bt = bad.b;
  CHECK_THROWS_AS(bad.validate(), ConfigError);

  const BdfCoefficients bdf;
  CHECK(bdf.alpha[0] == doctest::Approx(4.0 / 3.0));
  CHECK(bdf.alpha[1] == doctest::Approx(-1.0 / 3.0));
  CHECK(bdf.chi == doctest::Approx(2.0 / 3.0));
  CHECK(bdf.beta[0] == 2.0);
  CHECK(bdf.beta[1] == -1.0);
  // Consistency: alpha sums to one and beta sums to one.
  CHECK(bdf.alpha[0] + bdf.alpha[1] == doctest::Approx(1.0));
  CHECK(bdf.beta[0] + bdf.beta[1] == doctest::Approx(1.0));
}

TEST_CASE("explicit SSP Runge-Kutta") {
  std::vector<double> q{1.0, -2.0, 3.5};
  const std::vector<double> q0 = q;
  rk35_step(q, 0.3, [](std::span<const double>, std::span<double> y) { std::fill(y.begin(), y.end(), 0.0); });
  for (int i = 0; i < 3; ++i) CHECK(q[i] == doctest::Approx(q0[i]).epsilon(1e-14));

  // Local error against exp for q' = lambda q, lambda dt = -0.1: O(dt^4).
  const auto local_error = [](double dt) {
    std::vector<double> x{1.0};
    const double l = -0.1 / 0.1;
    rk35_step(x, dt, [l](std::span<const double> a, std::span<double> b) { b[0] = l * a[0]; });
    return std::fabs(x[0] - std::exp(l * dt));
  };
  CHECK(local_error(0.1) < 1e-6);
  CHECK(local_error(0.1) / local_error(0.05) == doctest::Approx(16.0).epsilon(0.1));

  // Global order 3 on an oscillator.
  const auto global_error = [](int steps) {
    std::vector<double> x{1.0, 0.0};
    const double dt = 2.0 / steps;
    for (int s = 0; s < steps; ++s)
      rk35_step(x, dt, [](std::span<const double> a, std::span<double> b) {
        b[0] = a[1];
        b[1] = -a[0];
      });
    return std::hypot(x[0] - std::cos(2.0), x[1] + std::sin(2.0));
  };
  const double p = observed_order(global_error(20), global_error(40));
  CHECK(p > 2.8);
  CHECK(p < 3.2);
}

TEST_CASE("additive Runge-Kutta step") {
  SUBCASE("vanishing linear part reproduces the explicit method bitwise") {
    const ButcherPair t = ButcherPair::ark2();
    ImexFunctions f;
    f.rhs = [](std::span<const double> x, std::span<double> y) {
      for (std::size_t i = 0; i < x.size(); ++i) y[i] = std::sin(x[i]) - 0.3 * x[i] * x[i];
    };
    f.solve = [](std::span<const double> qe, double, std::span<double> q) { std::copy(qe.begin(), qe.end(), q.begin()); };
    std::vector<double> a{0.3, -1.2, 2.0, 0.7}, b = a;
    for (int s = 0; s < 5; ++s) {
      ark_imex_step(a, 0.17, t, f);
      explicit_rk(b, 0.17, t, f.rhs);
    }
    CHECK(a == b);
  }
  SUBCASE("stiff linear decay stays bounded") {
    ImexFunctions f;
    f.rhs = [](std::span<const double> x, std::span<double> y) { y[0] = -1e3 * x[0]; };
    f.linear = f.rhs;
    f.solve = [](std::span<const double> qe, double lambda, std::span<double> q) { q[0] = qe[0] / (1.0 + 1e3 * lambda); };
    std::vector<double> q{1.0};
    double prev = 1.0;
    for (int s = 0; s < 20; ++s) {
      ark_imex_step(q, 1.0, ButcherPair::ark2(), f);
      CHECK(std::fabs(q[0]) <= prev);
      prev = std::fabs(q[0]);
    }
    CHECK(std::fabs(q[0]) < 1e-3);
  }
  SUBCASE("second order on a scalar IMEX problem, ARK2 and BDF2") {
    const ImexFunctions f = scalar_problem(-5.0);
    const auto run = [&](int steps, bool bdf) {
      std::vector<double> q{1.0};
      const double dt = 1.0 / steps;
      Bdf2History h;
      for (int s = 0; s < steps; ++s) {
        if (bdf)
          bdf2_imex_step(q, dt, BdfCoefficients{}, ButcherPair::ark2(), f, h);
        else
          ark_imex_step(q, dt, ButcherPair::ark2(), f);
      }
      return q[0];
    };
    // Exact solution of the logistic-type ODE q' = -q^2 - 5 q with q(0) = 1.
    const double exact = 5.0 / ((1.0 + 5.0) * std::exp(5.0) - 1.0);
    for (bool bdf : {false, true}) {
      const double e1 = std::fabs(run(40, bdf) - exact), e2 = std::fabs(run(80, bdf) - exact),
                   e3 = std::fabs(run(160, bdf) - exact);
      const double p1 = observed_order(e1, e2), p2 = observed_order(e2, e3);
      MESSAGE((bdf ? "BDF2" : "ARK2") << " orders " << p1 << " " << p2);
      CHECK(p2 > 1.8);
      CHECK(p2 < 2.3);
    }
  }
  SUBCASE("BDF2 keeps a steady state") {
    ImexFunctions f = scalar_problem(0.0);
    f.rhs = [](std::span<const double>, std::span<double> y) { std::fill(y.begin(), y.end(), 0.0); };
    std::vector<double> q{0.7, 1.1};
    Bdf2History h;
    for (int s = 0; s < 4; ++s) bdf2_imex_step(q, 0.5, BdfCoefficients{}, ButcherPair::ark2(), f, h);
    CHECK(q[0] == doctest::Approx(0.7).epsilon(1e-15));
    CHECK(q[1] == doctest::Approx(1.1).epsilon(1e-15));
  }
}

TEST_CASE("standard-form left-hand side") {
  for (auto [kind, set] : {std::pair{Galerkin::kContinuous, EquationSet::kSet2NC},
                           std::pair{Galerkin::kContinuous, EquationSet::kSet2C},
                           std::pair{Galerkin::kDiscontinuous, EquationSet::kSet2C}}) {
    Setup s(build_box_mesh(2, 2, 200.0, 200.0, 2), kind, set, BackgroundProfile{300.0, 0.01});
    for (ImplicitDim dim : {ImplicitDim::k3D, ImplicitDim::k1D}) {
      ImplicitProblem p(*s.ops, ImplicitForm::kStandard, dim);
      const State q = random_state(*s.ops, 3, false);
      State out = s.ops->make_state();
      p.set_lambda(0.0);
      p.lhs_standard_apply(q, out);
      CHECK(out.data == q.data);
      p.set_lambda(0.7);
      // Dense probing oracle.
      const krylov::LinearMap m = p.lhs_map();
      const Eigen::MatrixXd a = probe(m);
      p.lhs_standard_apply(q, out);
      const Eigen::VectorXd ref = a * Eigen::Map<const Eigen::VectorXd>(q.data.data(), q.data.size());
      double err = 0.0;
      for (std::size_t i = 0; i < q.data.size(); ++i) err = std::max(err, std::fabs(ref(i) - out.data[i]));
      CHECK(err <= 1e-12 * max_abs(out.data));
    }
  }
  // Theta only, no velocity or density: coupling shows up only in the momentum rows.
  Setup s(build_box_mesh(3, 3, 300.0, 300.0, 3), Galerkin::kContinuous, EquationSet::kSet2C);
  ImplicitProblem p(*s.ops, ImplicitForm::kStandard, ImplicitDim::k3D);
  p.set_lambda(0.5);
  State q = s.ops->make_state(), out = s.ops->make_state();
  const auto& x = s.disc->dofs().coords;
  for (int i = 0; i < q.num_dofs; ++i) q.field(kTheta)[i] = std::sin(x[i][0] / 50.0) * std::cos(x[i][2] / 70.0);
  p.lhs_standard_apply(q, out);
  for (int i = 0; i < q.num_dofs; ++i) {
    CHECK(out.field(kRho)[i] == 0.0);
    CHECK(out.field(kTheta)[i] == q.field(kTheta)[i]);
  }
  CHECK(max_abs(std::span<const double>(out.field(kMomX), q.num_dofs)) > 0.0);
}

TEST_CASE("discontinuous surface terms") {
  // Two elements stacked vertically, linear basis.
  const double lx = 100.0, lz = 200.0;
  Setup s(build_box_mesh(1, 2, lx, lz, 1), Galerkin::kDiscontinuous, EquationSet::kSet2C);
  State q = s.ops->make_state(), l = s.ops->make_state();
  const auto& dofs = s.disc->dofs();
  // rho' = 1 in the lower element only.
  const int nl = dofs.levels_per_column;
  CHECK(nl == 4);
  for (int i = 0; i < q.num_dofs; ++i)
    if (dofs.level_of(i) < 2) q.field(kRho)[i] = 1.0;
  s.ops->linear_operator(q, l);
  const double hz = lz / 2.0;
  for (int i = 0; i < q.num_dofs; ++i) {
    const int level = dofs.level_of(i);
    const double c = s.ref->sound_speed[i];
    // Hand-computed Rusanov penalty at the shared face: -lift * (-c/2) * (0 - 1), lift = 2 / hz.
    if (level == 1) CHECK(l.field(kRho)[i] == doctest::Approx(-c / hz).epsilon(1e-12));
    if (level == 2) CHECK(l.field(kRho)[i] == doctest::Approx(c / hz).epsilon(1e-12));
    if (level == 0 || level == 3) CHECK(l.field(kRho)[i] == 0.0);
  }
  CHECK(s.ref->sound_speed[0] == doctest::Approx(347.32).epsilon(1e-3));

  // A continuous field has no jump: the only surface terms left are at walls.
  ImplicitProblem p(*s.ops, ImplicitForm::kStandard, ImplicitDim::k3D);
  p.set_lambda(2.0);
  State smooth = s.ops->make_state(), surf = s.ops->make_state();
  for (int i = 0; i < q.num_dofs; ++i) smooth.field(kTheta)[i] = 0.1 * dofs.coords[i][2];
  p.dg_surface_lhs(smooth, surf);
  for (int i = 0; i < q.num_dofs; ++i) {
    const int level = dofs.level_of(i);
    if (level == 1 || level == 2) CHECK(std::fabs(surf.field(kTheta)[i]) <= 1e-12);
  }
}

TEST_CASE("Schur form") {
  for (EquationSet set : {EquationSet::kSet2NC, EquationSet::kSet2C}) {
    for (BackgroundProfile prof : {BackgroundProfile{300.0, 0.0}, BackgroundProfile{300.0, 0.01}}) {
      Setup s(build_box_mesh(2, 2, 200.0, 200.0, 2), Galerkin::kContinuous, set, prof);
      for (ImplicitDim dim : {ImplicitDim::k3D, ImplicitDim::k1D}) {
        ImplicitProblem schur(*s.ops, ImplicitForm::kSchur, dim);
        ImplicitProblem standard(*s.ops, ImplicitForm::kStandard, dim);
        const int n = s.ops->num_dofs();
        std::vector<double> p(n), out(n);
        std::mt19937 rng(5);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        for (double& v : p) v = u(rng);
        schur.set_lambda(0.0);
        schur.lhs_schur_apply(p.data(), out.data());
        CHECK(out == p);
        schur.set_lambda(0.3);
        const Eigen::MatrixXd a = probe(schur.lhs_map());
        schur.lhs_schur_apply(p.data(), out.data());
        const Eigen::VectorXd ref = a * Eigen::Map<const Eigen::VectorXd>(p.data(), n);
        for (int i = 0; i < n; ++i) CHECK(std::fabs(ref(i) - out[i]) <= 1e-12 * max_abs(out));

        // Quadratic form stays positive at small lambda.
        schur.set_lambda(1e-3);
        for (unsigned seed = 0; seed < 5; ++seed) {
          std::mt19937 r2(seed);
          for (double& v : p) v = u(r2);
          schur.lhs_schur_apply(p.data(), out.data());
          double e = 0.0;
          for (int i = 0; i < n; ++i) e += p[i] * out[i];
          CHECK(e > 0.0);
        }

        // Zero estimate gives a zero right-hand side and a zero extracted state.
        State zero = s.ops->make_state(), ext = s.ops->make_state();
        std::vector<double> rhs(n), pz(n, 0.0);
        schur.set_lambda(0.4);
        schur.rhs_schur_build(zero, rhs.data());
        CHECK(max_abs(rhs) == 0.0);
        schur.extract_from_pressure(pz.data(), zero, ext);
        CHECK(max_abs(ext.data) == 0.0);

        // Solving Schur and extracting equals solving the standard form.
        const State qe = random_state(*s.ops, 11);
        const double lambda = 0.8;
        const State q_std = solve_stage(standard, qe, lambda);
        const State q_sch = solve_stage(schur, qe, lambda);
        const double scale = max_abs(q_std.data);
        CHECK(max_diff(q_std.data, q_sch.data) <= 1e-9 * scale);
        // Round trip through the standard operator reproduces the estimate.
        State back = s.ops->make_state();
        standard.set_lambda(lambda);
        standard.lhs_standard_apply(q_sch, back);
        CHECK(max_diff(back.data, qe.data) <= 1e-9 * max_abs(qe.data));
        if (set == EquationSet::kSet2C) {
          schur.set_lambda(lambda);
          std::vector<double> rhs2(n), sol(n), lp(n);
          schur.rhs_schur_build(qe, rhs2.data());
          for (int i = 0; i < n; ++i) sol[i] = rhs2[i] * 0.5;
          schur.extract_from_pressure(sol.data(), qe, ext);
          s.ops->linearized_pressure(ext, lp.data());
          for (int i = 0; i < n; ++i) CHECK(lp[i] == doctest::Approx(sol[i]).epsilon(1e-12));
        }
      }
    }
  }
  SUBCASE("constant background makes the buoyancy matrix the identity") {
    Setup s(build_box_mesh(2, 2, 200.0, 200.0, 2), Galerkin::kContinuous, EquationSet::kSet2C);
    ImplicitProblem schur(*s.ops, ImplicitForm::kSchur, ImplicitDim::k3D);
    schur.set_lambda(3.0);
    const Vec3 v{1.0, 2.0, 3.0};
    for (int i = 0; i < s.ops->num_dofs(); ++i) {
      const Vec3 r = schur.apply_a_inverse(i, v);
      CHECK(r == v);
    }
  }
  SUBCASE("stratified buoyancy matrix inverse") {
    Setup s(build_box_mesh(2, 2, 200.0, 200.0, 2), Galerkin::kContinuous, EquationSet::kSet2NC,
            BackgroundProfile{300.0, 0.02});
    ImplicitProblem schur(*s.ops, ImplicitForm::kSchur, ImplicitDim::k3D);
    const double lambda = 20.0;
    schur.set_lambda(lambda);
    for (int i = 0; i < s.ops->num_dofs(); ++i) {
      const Vec3 a = s.ops->project_vector(i, s.ref->up[i]);
      const Vec3& b = s.ref->grad_theta0[i];
      Eigen::Matrix3d m = Eigen::Matrix3d::Identity();
      for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) m(r, c) += lambda * lambda * 9.80616 / s.ref->theta0[i] * a[r] * b[c];
      const Vec3 v{0.3, -0.1, 0.7};
      const Vec3 x = schur.apply_a_inverse(i, v);
      const Eigen::Vector3d mv = m * Eigen::Vector3d(x[0], x[1], x[2]);
      for (int r = 0; r < 3; ++r) CHECK(mv(r) == doctest::Approx(v[r]).epsilon(1e-13));
    }
  }
  SUBCASE("spectrum concentrates at one as lambda vanishes") {
    Setup s(build_box_mesh(3, 3, 300.0, 300.0, 3), Galerkin::kContinuous, EquationSet::kSet2NC);
    ImplicitProblem schur(*s.ops, ImplicitForm::kSchur, ImplicitDim::k3D);
    schur.set_lambda(1e-7);
    const krylov::Spectrum sp = krylov::estimate_spectrum(schur.lhs_map(), 20);
    CHECK(sp.lambda_min == doctest::Approx(0.9).epsilon(1e-3));
    CHECK(sp.lambda_max == doctest::Approx(1.1).epsilon(1e-3));
  }
  SUBCASE("discontinuous Schur form is rejected") {
    Setup s(build_box_mesh(2, 2, 200.0, 200.0, 2), Galerkin::kDiscontinuous, EquationSet::kSet2C);
    CHECK_THROWS_AS(ImplicitProblem(*s.ops, ImplicitForm::kSchur, ImplicitDim::k3D), ConfigError);
  }
}

TEST_CASE("vertical and full implicit steps agree without horizontal variation") {
  for (auto [kind, set, form] : {std::tuple{Galerkin::kContinuous, EquationSet::kSet2NC, ImplicitForm::kSchur},
                                 std::tuple{Galerkin::kContinuous, EquationSet::kSet2C, ImplicitForm::kStandard},
                                 std::tuple{Galerkin::kDiscontinuous, EquationSet::kSet2C, ImplicitForm::kStandard}}) {
    Setup s(build_box_mesh(3, 4, 3000.0, 4000.0, 3), kind, set, BackgroundProfile{300.0, 0.01});
    ImplicitProblem p3(*s.ops, form, ImplicitDim::k3D), p1(*s.ops, form, ImplicitDim::k1D);
    State q = s.ops->make_state();
    for (int i = 0; i < q.num_dofs; ++i) {
      const double z = s.disc->dofs().coords[i][2];
      q.field(kRho)[i] = 1e-3 * std::sin(z / 700.0);
      q.field(kMomZ)[i] = std::sin(3.14159 * z / 4000.0);
      q.field(kTheta)[i] = 0.2 * std::cos(z / 900.0);
    }
    s.ops->project_velocity(q);
    const State a = solve_stage(p3, q, 5.0, 1e-13), b = solve_stage(p1, q, 5.0, 1e-13);
    CHECK(max_diff(a.data, b.data) <= 1e-10 * std::max(1.0, max_abs(a.data)));
  }
}
