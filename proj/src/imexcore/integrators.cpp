#include "dycore/imexcore/integrators.hpp"

#include <algorithm>

#include "dycore/common.hpp"

namespace dycore::imexcore {
namespace {

using Vec = std::vector<double>;

void check_stage(const std::function<void(std::span<const double>)>& check, std::span<const double> q) {
  if (check) check(q);
}

}  // namespace

void rk35_step(std::span<double> q, double dt, const VectorFn& rhs,
               const std::function<void(std::span<const double>)>& check) {
  const std::size_t n = q.size();
  Vec u0(q.begin(), q.end()), u1(n), u2(n), u3(n), f(n);
  // u1 = u0 + c1 dt F(u0)
  rhs(u0, f);
  for (std::size_t i = 0; i < n; ++i) u1[i] = u0[i] + 0.377268915331368 * dt * f[i];
  check_stage(check, u1);
  rhs(u1, f);
  for (std::size_t i = 0; i < n; ++i) u2[i] = u1[i] + 0.377268915331368 * dt * f[i];
  check_stage(check, u2);
  rhs(u2, f);
  for (std::size_t i = 0; i < n; ++i)
    u3[i] = 0.355909775063327 * u0[i] + 0.644090224936674 * u2[i] + 0.242995220537396 * dt * f[i];
  check_stage(check, u3);
  rhs(u3, f);
  // u4 reuses u1's storage.
  for (std::size_t i = 0; i < n; ++i)
    u1[i] = 0.367933791638137 * u0[i] + 0.632066208361863 * u3[i] + 0.238458932846290 * dt * f[i];
  check_stage(check, u1);
  rhs(u1, f);
  for (std::size_t i = 0; i < n; ++i)
    q[i] = 0.237593836598569 * u2[i] + 0.762406163401431 * u1[i] + 0.287632146308408 * dt * f[i];
  check_stage(check, q);
}

void ark_imex_step(std::span<double> q, double dt, const ButcherPair& t, const ImexFunctions& fns,
                   std::vector<double>* rhs_first) {
  const int s = t.stages;
  const std::size_t n = q.size();
  std::vector<Vec> stage(s, Vec(n)), r(s, Vec(n));
  Vec qe(n), shift(n), qtt_e(n), qtt(n);
  std::copy(q.begin(), q.end(), stage[0].begin());
  if (t.ai(0, 0) != 0.0) throw ConfigError("the first stage of the additive tableau must be explicit");
  fns.rhs(stage[0], r[0]);
  if (rhs_first) *rhs_first = r[0];
  for (int i = 1; i < s; ++i) {
    const double aii = t.ai(i, i);
    if (aii == 0.0) throw ConfigError("implicit stages need a nonzero diagonal");
    std::copy(q.begin(), q.end(), qe.begin());
    for (int j = 0; j < i; ++j) {
      const double w = dt * t.ae(i, j);
      if (w != 0.0)
        for (std::size_t k = 0; k < n; ++k) qe[k] += w * r[j][k];
    }
    std::fill(shift.begin(), shift.end(), 0.0);
    for (int j = 0; j < i; ++j) {
      const double w = (t.ai(i, j) - t.ae(i, j)) / aii;
      if (w != 0.0)
        for (std::size_t k = 0; k < n; ++k) shift[k] += w * stage[j][k];
    }
    for (std::size_t k = 0; k < n; ++k) qtt_e[k] = qe[k] + shift[k];
    qtt = qtt_e;
    fns.solve(qtt_e, aii * dt, qtt);
    // Stage value as predictor plus correction, so a vanishing correction leaves it untouched.
    for (std::size_t k = 0; k < n; ++k) stage[i][k] = qe[k] + (qtt[k] - qtt_e[k]);
    check_stage(fns.check, stage[i]);
    fns.rhs(stage[i], r[i]);
  }
  bool same_weights = true;
  for (int i = 0; i < s; ++i) same_weights = same_weights && t.b[i] == t.bt[i];
  for (int i = 0; i < s; ++i) {
    const double w = dt * t.b[i];
    if (w != 0.0)
      for (std::size_t k = 0; k < n; ++k) q[k] += w * r[i][k];
  }
  if (!same_weights) {
    // q += dt sum (bt_i - b_i) L(q_i)
    Vec l(n);
    for (int i = 0; i < s; ++i) {
      const double w = dt * (t.bt[i] - t.b[i]);
      if (w == 0.0) continue;
      fns.linear(stage[i], l);
      for (std::size_t k = 0; k < n; ++k) q[k] += w * l[k];
    }
  }
  check_stage(fns.check, q);
}

void bdf2_imex_step(std::span<double> q, double dt, const BdfCoefficients& c, const ButcherPair& bootstrap,
                    const ImexFunctions& fns, Bdf2History& h) {
  const std::size_t n = q.size();
  if (!h.ready || h.dt != dt || h.q_prev.size() != n) {
    Vec qn(q.begin(), q.end()), rn;
    ark_imex_step(q, dt, bootstrap, fns, &rn);
    h.q_prev = std::move(qn);
    h.rhs_prev = std::move(rn);
    h.dt = dt;
    h.ready = true;
    return;
  }
  Vec rn(n), qe(n), base(n), qtt_e(n), qtt(n);
  fns.rhs(q, rn);
  for (std::size_t k = 0; k < n; ++k) {
    qe[k] = c.alpha[0] * q[k] + c.alpha[1] * h.q_prev[k] + c.chi * dt * (c.beta[0] * rn[k] + c.beta[1] * h.rhs_prev[k]);
    base[k] = c.beta[0] * q[k] + c.beta[1] * h.q_prev[k];
    qtt_e[k] = qe[k] - base[k];
  }
  qtt = qtt_e;
  fns.solve(qtt_e, c.chi * dt, qtt);
  std::copy(q.begin(), q.end(), h.q_prev.begin());
  h.rhs_prev = std::move(rn);
  for (std::size_t k = 0; k < n; ++k) q[k] = qe[k] + (qtt[k] - qtt_e[k]);
  check_stage(fns.check, q);
}

}  // namespace dycore::imexcore
