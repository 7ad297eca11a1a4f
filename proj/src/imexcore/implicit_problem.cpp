#include "dycore/imexcore/implicit_problem.hpp"

#include <cmath>
#include <string>

namespace dycore::imexcore {

using euler::EquationSet;
using euler::State;

ImplicitProblem::ImplicitProblem(const euler::EulerOperators& ops, ImplicitForm form, ImplicitDim dim)
    : ops_(ops), ref_(ops.ref()), form_(form), dim_(dim) {
  if (form == ImplicitForm::kSchur && !ops.disc().continuous())
    throw ConfigError("the Schur form is only available for continuous Galerkin");
  const int n = ops.num_dofs();
  wall_up_.resize(n);
  for (int i = 0; i < n; ++i) wall_up_[i] = ops.project_vector(i, ref_.up[i]);
  for (auto& v : va_) v.assign(n, 0.0);
  for (auto& v : work_) v.assign(n, 0.0);
  tmp_in_ = ops.make_state();
  tmp_out_ = ops.make_state();
}

void ImplicitProblem::set_lambda(double lambda) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ConfigError("implicit coefficient must be finite and nonnegative");
  lambda_ = lambda;
}

Vec3 ImplicitProblem::apply_a_inverse(int dof, const Vec3& v) const {
  const Vec3& a = wall_up_[dof];
  const Vec3& b = ref_.grad_theta0[dof];
  const double beta = lambda_ * lambda_ * ref_.gas().gravity / ref_.theta0[dof];
  const double den = 1.0 + beta * dot3(b, a);
  if (std::fabs(den) < 1e-12)
    throw SolverError("buoyancy coupling matrix is singular at dof " + std::to_string(dof));
  const double f = beta * dot3(b, v) / den;
  return {v[0] - f * a[0], v[1] - f * a[1], v[2] - f * a[2]};
}

void ImplicitProblem::lhs_standard_apply(const State& q, State& out) const {
  ops_.linear_operator(q, out, restriction());
  for (std::size_t i = 0; i < q.data.size(); ++i) out.data[i] = q.data[i] - lambda_ * out.data[i];
}

void ImplicitProblem::dg_surface_lhs(const State& q, State& out) const {
  ops_.add_linear_surface(q, out, -lambda_, restriction());
}

void ImplicitProblem::pressure_velocity(const double* p, double* vx, double* vy, double* vz) const {
  const int n = num_dofs();
  ops_.gradient(p, vx, vy, vz, restriction());
  const double g = ref_.gas().gravity;
  const bool nc = ops_.set() == EquationSet::kSet2NC;
  for (int i = 0; i < n; ++i) {
    const Vec3& k = ref_.up[i];
    double s, c;
    if (nc) {
      s = 1.0 / ref_.rho0[i];
      c = g * p[i] / (ref_.g0_nc[i] * ref_.rho0[i]);
    } else {
      s = 1.0;
      c = g * p[i] / (ref_.f0_c[i] * ref_.g0_c[i]);
    }
    vx[i] = lambda_ * (s * vx[i] + c * k[0]);
    vy[i] = lambda_ * (s * vy[i] + c * k[1]);
    vz[i] = lambda_ * (s * vz[i] + c * k[2]);
  }
  ops_.project_velocity(vx, vy, vz);
  for (int i = 0; i < n; ++i) {
    const Vec3 v = apply_a_inverse(i, {vx[i], vy[i], vz[i]});
    vx[i] = v[0];
    vy[i] = v[1];
    vz[i] = v[2];
  }
}

void ImplicitProblem::helmholtz_coupling(const double* vx, const double* vy, const double* vz, double* out) const {
  const int n = num_dofs();
  double* dv = work_[3].data();
  ops_.divergence(vx, vy, vz, dv, restriction());
  if (ops_.set() == EquationSet::kSet2NC) {
    for (int i = 0; i < n; ++i) {
      const Vec3& f = ref_.f0_nc[i];
      out[i] = lambda_ * (f[0] * vx[i] + f[1] * vy[i] + f[2] * vz[i] + ref_.g0_nc[i] * ref_.rho0[i] * dv[i]);
    }
  } else {
    for (int i = 0; i < n; ++i) {
      const Vec3& gg = ref_.grad_theta0[i];
      out[i] = lambda_ * ref_.f0_c[i] * (ref_.g0_c[i] * dv[i] + gg[0] * vx[i] + gg[1] * vy[i] + gg[2] * vz[i]);
    }
  }
}

void ImplicitProblem::lhs_schur_apply(const double* p, double* out) const {
  const int n = num_dofs();
  double *vx = work_[0].data(), *vy = work_[1].data(), *vz = work_[2].data();
  pressure_velocity(p, vx, vy, vz);
  helmholtz_coupling(vx, vy, vz, out);
  for (int i = 0; i < n; ++i) out[i] = p[i] - out[i];
}

void ImplicitProblem::rhs_schur_build(const State& qe, double* rhs) {
  const int n = num_dofs();
  const double g = ref_.gas().gravity;
  const bool nc = ops_.set() == EquationSet::kSet2NC;
  const double *re = qe.field(euler::kRho), *te = qe.field(euler::kTheta);
  for (int i = 0; i < n; ++i) {
    // Buoyancy carried by the explicit estimate.
    const double s = nc ? lambda_ * g * te[i] / ref_.theta0[i]
                        : -lambda_ * g * (re[i] - te[i] / ref_.g0_c[i]);
    const Vec3& a = wall_up_[i];
    const Vec3 v = apply_a_inverse(i, {qe.field(euler::kMomX)[i] + s * a[0], qe.field(euler::kMomY)[i] + s * a[1],
                                       qe.field(euler::kMomZ)[i] + s * a[2]});
    va_[0][i] = v[0];
    va_[1][i] = v[1];
    va_[2][i] = v[2];
  }
  double* pe = work_[4].data();
  ops_.linearized_pressure(qe, pe);
  helmholtz_coupling(va_[0].data(), va_[1].data(), va_[2].data(), rhs);
  for (int i = 0; i < n; ++i) rhs[i] = pe[i] - rhs[i];
}

void ImplicitProblem::extract_from_pressure(const double* p, const State& qe, State& q) const {
  const int n = num_dofs();
  if (q.num_dofs != n || q.set != ops_.set()) q = ops_.make_state();
  double *vx = work_[0].data(), *vy = work_[1].data(), *vz = work_[2].data();
  pressure_velocity(p, vx, vy, vz);
  double *u = q.field(euler::kMomX), *v = q.field(euler::kMomY), *w = q.field(euler::kMomZ);
  for (int i = 0; i < n; ++i) {
    u[i] = va_[0][i] - vx[i];
    v[i] = va_[1][i] - vy[i];
    w[i] = va_[2][i] - vz[i];
  }
  double *rho = q.field(euler::kRho), *th = q.field(euler::kTheta);
  const double *re = qe.field(euler::kRho), *te = qe.field(euler::kTheta);
  for (int i = 0; i < n; ++i) {
    const Vec3& gt = ref_.grad_theta0[i];
    const double ug = u[i] * gt[0] + v[i] * gt[1] + w[i] * gt[2];
    if (ops_.set() == EquationSet::kSet2NC) {
      th[i] = te[i] - lambda_ * ug;
      rho[i] = (p[i] - ref_.h0_nc[i] * th[i]) / ref_.g0_nc[i];
    } else {
      const double g0 = ref_.g0_c[i], f0 = ref_.f0_c[i];
      th[i] = p[i] / f0;
      rho[i] = p[i] / (f0 * g0) + lambda_ / g0 * ug - te[i] / g0 + re[i];
    }
  }
}

krylov::LinearMap ImplicitProblem::lhs_map() const {
  krylov::LinearMap m;
  m.dim = system_size();
  if (form_ == ImplicitForm::kSchur) {
    m.apply = [this](std::span<const double> x, std::span<double> y) { lhs_schur_apply(x.data(), y.data()); };
  } else {
    m.apply = [this](std::span<const double> x, std::span<double> y) {
      std::copy(x.begin(), x.end(), tmp_in_.data.begin());
      lhs_standard_apply(tmp_in_, tmp_out_);
      std::copy(tmp_out_.data.begin(), tmp_out_.data.end(), y.begin());
    };
  }
  return m;
}

}  // namespace dycore::imexcore
