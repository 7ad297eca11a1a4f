#include "dycore/euler/operators.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dycore/simd/kernels.hpp"

namespace dycore::euler {
namespace {

constexpr int W = simd::kLanes;

// Per-thread work area for one element batch.
double* batch_buffer(std::size_t n) {
  thread_local std::vector<double> buf;
  if (buf.size() < n) buf.resize(n);
  return buf.data();
}

// Per-thread dof-level temporaries.
double* dof_buffer(int slot, std::size_t n) {
  thread_local std::vector<double> bufs[8];
  if (bufs[slot].size() < n) bufs[slot].resize(n);
  return bufs[slot].data();
}

}  // namespace

EulerOperators::EulerOperators(const specgrid::Discretization& disc, const ReferenceState& ref, EquationSet set)
    : disc_(disc), ref_(ref), set_(set), box_(disc.mesh().topology == specgrid::Topology::kBox) {
  if (ref.num_dofs() != disc.num_dofs()) throw Error("reference state does not match the discretization");
  if (!disc.continuous() && set == EquationSet::kSet2NC)
    throw ConfigError("discontinuous Galerkin is only available for the conservative equation set");
  std::vector<double> tmp(disc.num_dofs());
  gather_reference(ref.rho0, b_rho0_);
  gather_reference(ref.theta0, b_theta0_);
  gather_reference(ref.p0, b_p0_);
  gather_reference(ref.inv_radius, b_inv_r_);
  for (int i = 0; i < disc.num_dofs(); ++i) tmp[i] = ref.rho0[i] * ref.theta0[i];
  gather_reference(tmp, b_big_theta0_);
  for (int k = 0; k < 3; ++k) {
    for (int i = 0; i < disc.num_dofs(); ++i) tmp[i] = ref.grad_rho0[i][k];
    gather_reference(tmp, b_grad_rho0_[k]);
    for (int i = 0; i < disc.num_dofs(); ++i) tmp[i] = ref.grad_theta0[i][k];
    gather_reference(tmp, b_grad_theta0_[k]);
    for (int i = 0; i < disc.num_dofs(); ++i) tmp[i] = ref.up[i][k];
    gather_reference(tmp, b_up_[k]);
  }
  wall_offsets_.assign(disc.num_dofs() + 1, 0);
  if (disc.continuous()) {
    const auto& walls = disc.walls();
    for (const auto& w : walls) ++wall_offsets_[w.dof + 1];
    for (int i = 0; i < disc.num_dofs(); ++i) wall_offsets_[i + 1] += wall_offsets_[i];
    wall_index_.resize(walls.size());
    std::vector<int> fill(wall_offsets_.begin(), wall_offsets_.end() - 1);
    for (std::size_t w = 0; w < walls.size(); ++w) wall_index_[fill[walls[w].dof]++] = static_cast<int>(w);
  }
  // Hand-counted flops per application, summed over batches.
  const auto& sh = disc.mesh().shape;
  const std::uint64_t nodes = static_cast<std::uint64_t>(disc.local_size());
  const auto contraction = [&](int n) -> std::uint64_t { return n > 1 ? nodes * 2 * n : 0; };
  const std::uint64_t all = contraction(sh.nr) + contraction(sh.ns) + contraction(sh.nt);
  flops_gradient_ = all + nodes * (15 + 3 + 3);
  flops_divergence_ = all + nodes * (15 + 2 + 2 + 1);
  flops_vertical_ = contraction(sh.nt) + nodes * 8;
  flops_rhs_ = set == EquationSet::kSet2NC ? 6 * (all + nodes * 15) + nodes * 70 : 5 * (all + nodes * 15) + nodes * 60;
}

void EulerOperators::gather_reference(const std::vector<double>& dof, std::vector<double>& batched) const {
  const std::size_t n = disc_.local_size();
  batched.resize(n);
  const int* bd = disc_.batched_dof();
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t src = bd[i] >= 0 ? i : i - i % W;
    batched[i] = dof[bd[src]];
  }
}

void EulerOperators::gradient(const double* f, double* gx, double* gy, double* gz, Restriction restriction) const {
  const std::size_t L = disc_.local_size(), bs = disc_.batch_size();
  scratch_.resize(3 * L);
  double* E[3] = {scratch_.data(), scratch_.data() + L, scratch_.data() + 2 * L};
  const simd::KernelTable& K = simd::kernels();
  const auto& sh = disc_.mesh().shape;
  const int* bd = disc_.batched_dof();
  const double* mass = disc_.batched_mass();
  const double* vs = disc_.vertical_scale();
  const double* gm[9];
  for (int i = 0; i < 9; ++i) gm[i] = disc_.gradient_metric(i / 3, i % 3);
  const int nb = disc_.num_batches();
  const bool full = restriction == Restriction::kFull;
#pragma omp parallel for schedule(static)
  for (int b = 0; b < nb; ++b) {
    double* t = batch_buffer(4 * bs);
    double *loc = t, *a = t + bs, *s = t + 2 * bs, *c = t + 3 * bs;
    const std::size_t o = static_cast<std::size_t>(b) * bs;
    for (std::size_t i = 0; i < bs; ++i) loc[i] = bd[o + i] >= 0 ? f[bd[o + i]] : 0.0;
    if (full) {
      K.ref_gradient(sh, disc_.dr(), disc_.ds(), disc_.dt(), loc, a, s, c);
      for (std::size_t i = 0; i < bs; ++i) {
        const std::size_t x = o + i;
        for (int k = 0; k < 3; ++k) E[k][x] = mass[x] * (gm[k][x] * a[i] + gm[3 + k][x] * s[i] + gm[6 + k][x] * c[i]);
      }
    } else {
      K.ref_derivative_t(sh, disc_.dt(), loc, a);
      for (std::size_t i = 0; i < bs; ++i) {
        const std::size_t x = o + i;
        const double d = mass[x] * vs[x] * a[i];
        for (int k = 0; k < 3; ++k) E[k][x] = d * b_up_[k][x];
      }
    }
  }
  disc_.assemble(E[0], gx);
  disc_.assemble(E[1], gy);
  disc_.assemble(E[2], gz);
  counters_.flops += full ? flops_gradient_ : flops_vertical_ + 3 * L;
}

void EulerOperators::divergence(const double* vx, const double* vy, const double* vz, double* out,
                                Restriction restriction) const {
  const std::size_t L = disc_.local_size(), bs = disc_.batch_size();
  scratch_.resize(3 * L);
  double* E = scratch_.data();
  const simd::KernelTable& K = simd::kernels();
  const auto& sh = disc_.mesh().shape;
  const int* bd = disc_.batched_dof();
  const double* mass = disc_.batched_mass();
  const double* vs = disc_.vertical_scale();
  const double* invj = disc_.inv_jacobian();
  const double* ja[9];
  for (int i = 0; i < 9; ++i) ja[i] = disc_.contravariant(i / 3, i % 3);
  const int nb = disc_.num_batches();
  const bool full = restriction == Restriction::kFull;
#pragma omp parallel for schedule(static)
  for (int b = 0; b < nb; ++b) {
    double* t = batch_buffer(7 * bs);
    double *lx = t, *ly = t + bs, *lz = t + 2 * bs, *fr = t + 3 * bs, *fs = t + 4 * bs, *ft = t + 5 * bs,
           *d = t + 6 * bs;
    const std::size_t o = static_cast<std::size_t>(b) * bs;
    for (std::size_t i = 0; i < bs; ++i) {
      const int g = bd[o + i];
      lx[i] = g >= 0 ? vx[g] : 0.0;
      ly[i] = g >= 0 ? vy[g] : 0.0;
      lz[i] = g >= 0 ? vz[g] : 0.0;
    }
    if (full) {
      for (std::size_t i = 0; i < bs; ++i) {
        const std::size_t x = o + i;
        fr[i] = ja[0][x] * lx[i] + ja[1][x] * ly[i] + ja[2][x] * lz[i];
        fs[i] = ja[3][x] * lx[i] + ja[4][x] * ly[i] + ja[5][x] * lz[i];
        ft[i] = ja[6][x] * lx[i] + ja[7][x] * ly[i] + ja[8][x] * lz[i];
      }
      K.ref_divergence(sh, disc_.dr(), disc_.ds(), disc_.dt(), fr, fs, ft, d);
      for (std::size_t i = 0; i < bs; ++i) E[o + i] = mass[o + i] * (d[i] * invj[o + i]);
    } else {
      for (std::size_t i = 0; i < bs; ++i) {
        const std::size_t x = o + i;
        fr[i] = b_up_[0][x] * lx[i] + b_up_[1][x] * ly[i] + b_up_[2][x] * lz[i];
      }
      K.ref_derivative_t(sh, disc_.dt(), fr, d);
      for (std::size_t i = 0; i < bs; ++i) {
        const std::size_t x = o + i;
        // Radial divergence includes the spherical metric term 2 w / r.
        E[x] = mass[x] * (vs[x] * d[i] + 2.0 * fr[i] * b_inv_r_[x]);
      }
    }
  }
  disc_.assemble(E, out);
  counters_.flops += full ? flops_divergence_ : flops_vertical_ + 3 * L;
}

void EulerOperators::linear_operator(const State& q, State& out, Restriction restriction) const {
  const int n = num_dofs();
  if (q.set != set_ || q.num_dofs != n) throw Error("state does not match the operator");
  if (out.num_dofs != n || out.set != set_) out = State(set_, n);
  double* p = dof_buffer(0, n);
  double* g[3] = {dof_buffer(1, n), dof_buffer(2, n), dof_buffer(3, n)};
  double* dv = dof_buffer(4, n);
  linearized_pressure(q, p);
  gradient(p, g[0], g[1], g[2], restriction);
  divergence(q.field(kMomX), q.field(kMomY), q.field(kMomZ), dv, restriction);
  const double grav = ref_.gas().gravity;
  const double *r = q.field(kRho), *u = q.field(kMomX), *v = q.field(kMomY), *w = q.field(kMomZ), *th = q.field(kTheta);
  double *orho = out.field(kRho), *ou = out.field(kMomX), *ov = out.field(kMomY), *ow = out.field(kMomZ),
         *oth = out.field(kTheta);
  if (set_ == EquationSet::kSet2NC) {
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i) {
      const Vec3& gr = ref_.grad_rho0[i];
      const Vec3& gt = ref_.grad_theta0[i];
      const Vec3& k = ref_.up[i];
      const double r0 = ref_.rho0[i];
      const double buoy = r[i] / r0 * grav;
      orho[i] = -(u[i] * gr[0] + v[i] * gr[1] + w[i] * gr[2] + r0 * dv[i]);
      ou[i] = -(g[0][i] / r0 + buoy * k[0]);
      ov[i] = -(g[1][i] / r0 + buoy * k[1]);
      ow[i] = -(g[2][i] / r0 + buoy * k[2]);
      oth[i] = -(u[i] * gt[0] + v[i] * gt[1] + w[i] * gt[2]);
    }
  } else {
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i) {
      const Vec3& gt = ref_.grad_theta0[i];
      const Vec3& k = ref_.up[i];
      const double buoy = r[i] * grav;
      orho[i] = -dv[i];
      ou[i] = -(g[0][i] + buoy * k[0]);
      ov[i] = -(g[1][i] + buoy * k[1]);
      ow[i] = -(g[2][i] + buoy * k[2]);
      oth[i] = -(ref_.g0_c[i] * dv[i] + u[i] * gt[0] + v[i] * gt[1] + w[i] * gt[2]);
    }
  }
  (void)th;
  if (!disc_.continuous()) add_linear_surface(q, out, 1.0, restriction);
  project_velocity(out);
  counters_.linear_evaluations += 1;
  counters_.flops += static_cast<std::uint64_t>(n) * 25;
}

void EulerOperators::add_linear_surface(const State& q, State& out, double scale, Restriction restriction) const {
  if (disc_.continuous()) return;
  if (set_ != EquationSet::kSet2C) throw Error("linear surface terms need the conservative set");
  const auto& faces = disc_.faces();
  const auto& off = disc_.face_offsets();
  const int* bd = disc_.batched_dof();
  const double* mass = disc_.dss().mass.data();
  const double* qf[5] = {q.field(0), q.field(1), q.field(2), q.field(3), q.field(4)};
  double* of[5] = {out.field(0), out.field(1), out.field(2), out.field(3), out.field(4)};
  const int nb = disc_.num_batches();
  const bool vertical = restriction == Restriction::kVertical;
#pragma omp parallel for schedule(static)
  for (int b = 0; b < nb; ++b) {
    for (int fi = off[b]; fi < off[b + 1]; ++fi) {
      const auto& f = faces[fi];
      if (vertical && f.face < 4) continue;
      const int s = bd[f.self];
      const Vec3& n = f.normal;
      const double rm = qf[0][s], tm = qf[4][s];
      const Vec3 um{qf[1][s], qf[2][s], qf[3][s]};
      const double pm = ref_.f0_c[s] * tm, gm = ref_.g0_c[s];
      double rp, tp, pp, gp;
      Vec3 up;
      if (f.other >= 0) {
        const int o = bd[f.other];
        rp = qf[0][o];
        tp = qf[4][o];
        up = {qf[1][o], qf[2][o], qf[3][o]};
        pp = ref_.f0_c[o] * tp;
        gp = ref_.g0_c[o];
      } else {
        rp = rm;
        tp = tm;
        up = sub3(um, scale3(n, 2.0 * dot3(um, n)));
        pp = pm;
        gp = gm;
      }
      const double c = ref_.sound_speed[s];
      const double unm = dot3(um, n), unp = dot3(up, n);
      const double lift = scale * f.area / mass[s];
      of[0][s] -= lift * (0.5 * (unp - unm) - 0.5 * c * (rp - rm));
      for (int k = 0; k < 3; ++k) of[1 + k][s] -= lift * (0.5 * (pp - pm) * n[k] - 0.5 * c * (up[k] - um[k]));
      of[4][s] -= lift * (0.5 * (gp * unp - gm * unm) - 0.5 * c * (tp - tm));
    }
  }
  counters_.flops += static_cast<std::uint64_t>(faces.size()) * 45;
}

void EulerOperators::nonlinear_rhs(const State& q, State& out) const {
  const int n = num_dofs();
  if (q.set != set_ || q.num_dofs != n) throw Error("state does not match the operator");
  if (out.num_dofs != n || out.set != set_) out = State(set_, n);
  if (set_ == EquationSet::kSet2NC) {
    rhs_nc(q, out);
  } else {
    rhs_c(q, out);
    if (!disc_.continuous()) add_nonlinear_surface(q, out);
  }
  project_velocity(out);
  counters_.rhs_evaluations += 1;
  counters_.flops += flops_rhs_ + 5 * disc_.local_size();
}

void EulerOperators::rhs_nc(const State& q, State& out) const {
  const std::size_t L = disc_.local_size(), bs = disc_.batch_size();
  scratch_.resize(5 * L);
  double* E[5];
  for (int f = 0; f < 5; ++f) E[f] = scratch_.data() + f * L;
  const simd::KernelTable& K = simd::kernels();
  const auto& sh = disc_.mesh().shape;
  const int* bd = disc_.batched_dof();
  const double* mass = disc_.batched_mass();
  const double* gm[9];
  for (int i = 0; i < 9; ++i) gm[i] = disc_.gradient_metric(i / 3, i % 3);
  const double gamma = ref_.gas().gamma(), grav = ref_.gas().gravity;
  const double* qf[5] = {q.field(0), q.field(1), q.field(2), q.field(3), q.field(4)};
  const int nb = disc_.num_batches();
#pragma omp parallel for schedule(static)
  for (int b = 0; b < nb; ++b) {
    double* t = batch_buffer(24 * bs);
    double* fld[6];
    double* gr[6][3];
    for (int f = 0; f < 6; ++f) {
      fld[f] = t + f * bs;
      for (int d = 0; d < 3; ++d) gr[f][d] = t + (6 + 3 * f + d) * bs;
    }
    const std::size_t o = static_cast<std::size_t>(b) * bs;
    for (int f = 0; f < 5; ++f)
      for (std::size_t i = 0; i < bs; ++i) fld[f][i] = bd[o + i] >= 0 ? qf[f][bd[o + i]] : 0.0;
    for (std::size_t i = 0; i < bs; ++i) {
      const std::size_t x = o + i;
      const double rp = fld[0][i], tp = fld[4][i], r0 = b_rho0_[x], t0 = b_theta0_[x];
      const double rel = (rp * t0 + r0 * tp + rp * tp) / (r0 * t0);
      fld[5][i] = b_p0_[x] * std::expm1(gamma * std::log1p(rel));
    }
    for (int f = 0; f < 6; ++f) {
      K.ref_gradient(sh, disc_.dr(), disc_.ds(), disc_.dt(), fld[f], gr[f][0], gr[f][1], gr[f][2]);
      for (std::size_t i = 0; i < bs; ++i) {
        const std::size_t x = o + i;
        const double a = gr[f][0][i], s = gr[f][1][i], c = gr[f][2][i];
        for (int k = 0; k < 3; ++k) gr[f][k][i] = gm[k][x] * a + gm[3 + k][x] * s + gm[6 + k][x] * c;
      }
    }
    for (std::size_t i = 0; i < bs; ++i) {
      const std::size_t x = o + i;
      const double u = fld[1][i], v = fld[2][i], w = fld[3][i], rp = fld[0][i];
      const double rho = b_rho0_[x] + rp;
      const double div = gr[1][0][i] + gr[2][1][i] + gr[3][2][i];
      const auto adv = [&](int f) { return u * gr[f][0][i] + v * gr[f][1][i] + w * gr[f][2][i]; };
      const double m = mass[x];
      E[0][x] = -m * (adv(0) + u * b_grad_rho0_[0][x] + v * b_grad_rho0_[1][x] + w * b_grad_rho0_[2][x] + rho * div);
      const double buoy = rp / rho * grav;
      for (int k = 0; k < 3; ++k) E[1 + k][x] = -m * (adv(1 + k) + gr[5][k][i] / rho + buoy * b_up_[k][x]);
      E[4][x] = -m * (adv(4) + u * b_grad_theta0_[0][x] + v * b_grad_theta0_[1][x] + w * b_grad_theta0_[2][x]);
    }
  }
  for (int f = 0; f < 5; ++f) disc_.assemble(E[f], out.field(f));
}

void EulerOperators::rhs_c(const State& q, State& out) const {
  const std::size_t L = disc_.local_size(), bs = disc_.batch_size();
  scratch_.resize(5 * L);
  double* E[5];
  for (int f = 0; f < 5; ++f) E[f] = scratch_.data() + f * L;
  const simd::KernelTable& K = simd::kernels();
  const auto& sh = disc_.mesh().shape;
  const int* bd = disc_.batched_dof();
  const double* mass = disc_.batched_mass();
  const double* invj = disc_.inv_jacobian();
  const double* ja[9];
  for (int i = 0; i < 9; ++i) ja[i] = disc_.contravariant(i / 3, i % 3);
  const double gamma = ref_.gas().gamma(), grav = ref_.gas().gravity;
  const double* qf[5] = {q.field(0), q.field(1), q.field(2), q.field(3), q.field(4)};
  const int nb = disc_.num_batches();
#pragma omp parallel for schedule(static)
  for (int b = 0; b < nb; ++b) {
    double* t = batch_buffer(22 * bs);
    double* fld[5];
    double* flux[5][3];
    for (int f = 0; f < 5; ++f) {
      fld[f] = t + f * bs;
      for (int d = 0; d < 3; ++d) flux[f][d] = t + (5 + 3 * f + d) * bs;
    }
    double* div = t + 20 * bs;
    const std::size_t o = static_cast<std::size_t>(b) * bs;
    for (int f = 0; f < 5; ++f)
      for (std::size_t i = 0; i < bs; ++i) fld[f][i] = bd[o + i] >= 0 ? qf[f][bd[o + i]] : 0.0;
    for (std::size_t i = 0; i < bs; ++i) {
      const std::size_t x = o + i;
      const double rho = b_rho0_[x] + fld[0][i];
      const double th0 = b_big_theta0_[x];
      const double big_theta = th0 + fld[4][i];
      const double pp = b_p0_[x] * std::expm1(gamma * std::log1p(fld[4][i] / th0));
      const double U[3] = {fld[1][i], fld[2][i], fld[3][i]};
      const double u[3] = {U[0] / rho, U[1] / rho, U[2] / rho};
      double F[5][3];
      for (int k = 0; k < 3; ++k) {
        F[0][k] = U[k];
        for (int j = 0; j < 3; ++j) F[1 + j][k] = U[j] * u[k] + (j == k ? pp : 0.0);
        F[4][k] = big_theta * u[k];
      }
      for (int f = 0; f < 5; ++f)
        for (int d = 0; d < 3; ++d)
          flux[f][d][i] = ja[d * 3][x] * F[f][0] + ja[d * 3 + 1][x] * F[f][1] + ja[d * 3 + 2][x] * F[f][2];
    }
    for (int f = 0; f < 5; ++f) {
      K.ref_divergence(sh, disc_.dr(), disc_.ds(), disc_.dt(), flux[f][0], flux[f][1], flux[f][2], div);
      for (std::size_t i = 0; i < bs; ++i) {
        const std::size_t x = o + i;
        double val = -div[i] * invj[x];
        if (f >= 1 && f <= 3) val -= fld[0][i] * grav * b_up_[f - 1][x];
        E[f][x] = mass[x] * val;
      }
    }
  }
  for (int f = 0; f < 5; ++f) disc_.assemble(E[f], out.field(f));
}

void EulerOperators::add_nonlinear_surface(const State& q, State& out) const {
  const auto& faces = disc_.faces();
  const auto& off = disc_.face_offsets();
  const int* bd = disc_.batched_dof();
  const double* mass = disc_.dss().mass.data();
  const double* qf[5] = {q.field(0), q.field(1), q.field(2), q.field(3), q.field(4)};
  double* of[5] = {out.field(0), out.field(1), out.field(2), out.field(3), out.field(4)};
  const double gamma = ref_.gas().gamma();
  const int nb = disc_.num_batches();
  struct Side {
    double q[5];
    double fn[5];
    double speed;
  };
  const auto evaluate = [&](int dof, const Vec3& n, bool mirror, Side& sd) {
    for (int f = 0; f < 5; ++f) sd.q[f] = qf[f][dof];
    if (mirror) {
      const double un = sd.q[1] * n[0] + sd.q[2] * n[1] + sd.q[3] * n[2];
      for (int k = 0; k < 3; ++k) sd.q[1 + k] -= 2.0 * un * n[k];
    }
    const double rho = ref_.rho0[dof] + sd.q[0];
    const double th0 = ref_.rho0[dof] * ref_.theta0[dof];
    const double pp = ref_.p0[dof] * std::expm1(gamma * std::log1p(sd.q[4] / th0));
    const double mn = sd.q[1] * n[0] + sd.q[2] * n[1] + sd.q[3] * n[2];
    const double vn = mn / rho;
    sd.fn[0] = mn;
    for (int k = 0; k < 3; ++k) sd.fn[1 + k] = sd.q[1 + k] * vn + pp * n[k];
    sd.fn[4] = (th0 + sd.q[4]) * vn;
    sd.speed = std::fabs(vn) + std::sqrt(gamma * (ref_.p0[dof] + pp) / rho);
  };
#pragma omp parallel for schedule(static)
  for (int b = 0; b < nb; ++b) {
    for (int fi = off[b]; fi < off[b + 1]; ++fi) {
      const auto& f = faces[fi];
      const int s = bd[f.self];
      Side in, ex;
      evaluate(s, f.normal, false, in);
      if (f.other >= 0) {
        evaluate(bd[f.other], f.normal, false, ex);
      } else {
        evaluate(s, f.normal, true, ex);
      }
      const double speed = std::max(in.speed, ex.speed);
      const double lift = f.area / mass[s];
      for (int v = 0; v < 5; ++v) of[v][s] -= lift * (0.5 * (ex.fn[v] - in.fn[v]) - 0.5 * speed * (ex.q[v] - in.q[v]));
    }
  }
  counters_.flops += static_cast<std::uint64_t>(faces.size()) * 90;
}

void EulerOperators::project_velocity(double* vx, double* vy, double* vz) const {
  if (disc_.continuous()) {
    for (const auto& w : disc_.walls()) {
      const int i = w.dof;
      const double dn = vx[i] * w.normal[0] + vy[i] * w.normal[1] + vz[i] * w.normal[2];
      vx[i] -= dn * w.normal[0];
      vy[i] -= dn * w.normal[1];
      vz[i] -= dn * w.normal[2];
    }
  }
  if (box_) std::fill(vy, vy + num_dofs(), 0.0);
}

Vec3 EulerOperators::project_vector(int dof, const Vec3& v) const {
  Vec3 r = v;
  if (disc_.continuous()) {
    const auto& walls = disc_.walls();
    for (int p = wall_offsets_[dof]; p < wall_offsets_[dof + 1]; ++p) {
      const Vec3& n = walls[wall_index_[p]].normal;
      r = sub3(r, scale3(n, dot3(r, n)));
    }
  }
  if (box_) r[1] = 0.0;
  return r;
}

void EulerOperators::linearized_pressure(const State& q, double* p) const {
  const int n = num_dofs();
  if (set_ == EquationSet::kSet2NC) {
    const double *r = q.field(kRho), *t = q.field(kTheta);
    for (int i = 0; i < n; ++i) p[i] = ref_.g0_nc[i] * r[i] + ref_.h0_nc[i] * t[i];
  } else {
    const double* t = q.field(kTheta);
    for (int i = 0; i < n; ++i) p[i] = ref_.f0_c[i] * t[i];
  }
}

void EulerOperators::pressure_perturbation(const State& q, double* p) const {
  const int n = num_dofs();
  const double gamma = ref_.gas().gamma();
  const double *r = q.field(kRho), *t = q.field(kTheta);
  for (int i = 0; i < n; ++i) {
    const double r0 = ref_.rho0[i], t0 = ref_.theta0[i];
    const double rel = set_ == EquationSet::kSet2NC ? (r[i] * t0 + r0 * t[i] + r[i] * t[i]) / (r0 * t0) : t[i] / (r0 * t0);
    p[i] = ref_.p0[i] * std::expm1(gamma * std::log1p(rel));
  }
}

CourantNumbers EulerOperators::courant_numbers(const State& q, double dt) const {
  const int n = num_dofs();
  const double gamma = ref_.gas().gamma();
  std::vector<double> pp(n);
  pressure_perturbation(q, pp.data());
  double cmax = 0.0;
  for (int i = 0; i < n; ++i) {
    const double rho = ref_.rho0[i] + q.field(kRho)[i];
    Vec3 u{q.field(kMomX)[i], q.field(kMomY)[i], q.field(kMomZ)[i]};
    if (set_ == EquationSet::kSet2C) u = scale3(u, 1.0 / rho);
    cmax = std::max(cmax, norm3(u) + std::sqrt(gamma * (ref_.p0[i] + pp[i]) / rho));
  }
  CourantNumbers c;
  c.max_speed = cmax;
  c.horizontal = cmax * dt / disc_.metrics().min_spacing_horizontal;
  c.vertical = cmax * dt / disc_.metrics().min_spacing_vertical;
  return c;
}

void EulerOperators::check_state(const State& q) const {
  const int n = num_dofs();
  for (int f = 0; f < kNumFields; ++f) {
    const double* v = q.field(f);
    for (int i = 0; i < n; ++i)
      if (!std::isfinite(v[i]))
        throw NonFiniteError("non-finite value in field " + std::to_string(f) + " at dof " + std::to_string(i));
  }
  const double* r = q.field(kRho);
  for (int i = 0; i < n; ++i)
    if (!(ref_.rho0[i] + r[i] > 0.0))
      throw NonFiniteError("nonpositive total density at dof " + std::to_string(i));
}

}  // namespace dycore::euler
