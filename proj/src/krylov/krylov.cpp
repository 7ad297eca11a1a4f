#include "dycore/krylov/krylov.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "dycore/common.hpp"
#include "dycore/simd/kernels.hpp"

namespace dycore::krylov {
namespace {

using Vec = std::vector<double>;

void axpy(double a, std::span<const double> x, std::span<double> y) { simd::kernels().axpy(x.size(), a, x.data(), y.data()); }
void axpby(double a, std::span<const double> x, double b, std::span<double> y) {
  simd::kernels().axpby(x.size(), a, x.data(), b, y.data());
}

// Applies the map and counts the application.
struct Counted {
  const LinearMap& map;
  long& count;
  void operator()(std::span<const double> x, std::span<double> y) const {
    map.apply(x, y);
    ++count;
  }
};

void check_sizes(const LinearMap& map, std::span<const double> b, std::span<double> x) {
  if (!map.apply) throw Error("linear map has no apply function");
  if (static_cast<int>(b.size()) != map.dim || static_cast<int>(x.size()) != map.dim)
    throw Error("vector length does not match the linear map");
}

bool all_zero(std::span<const double> x) {
  return std::all_of(x.begin(), x.end(), [](double v) { return v == 0.0; });
}

double true_residual(const LinearMap& map, std::span<const double> b, std::span<const double> x, double bnorm,
                     SolveReport& rep) {
  Vec r(b.size());
  map.apply(x, r);
  ++rep.matvecs;
  axpby(1.0, b, -1.0, r);
  ++rep.dots;
  return bnorm > 0.0 ? norm2(r) / bnorm : norm2(r);
}

}  // namespace

double dot(std::span<const double> x, std::span<const double> y) { return simd::kernels().dot(x.size(), x.data(), y.data()); }
double norm2(std::span<const double> x) { return std::sqrt(dot(x, x)); }

void apply_pbno(const LinearMap& map, const PbnoPreconditioner& precon, std::span<const double> r,
                std::span<double> r_star) {
  const int p = precon.order;
  if (static_cast<int>(precon.coefficients.size()) != p + 1) throw Error("preconditioner coefficient count mismatch");
  const std::size_t n = r.size();
  Vec rs(n), m(n);
  for (std::size_t i = 0; i < n; ++i) rs[i] = precon.scale * r[i];
  for (std::size_t i = 0; i < n; ++i) r_star[i] = precon.coefficients[p] * rs[i];
  // Horner from the highest power down.
  for (int i = p - 1; i >= 0; --i) {
    map.apply(r_star, m);
    for (std::size_t k = 0; k < n; ++k) r_star[k] = precon.scale * m[k] + precon.coefficients[i] * rs[k];
  }
}

SolveReport gmres(const LinearMap& map, std::span<const double> b, std::span<double> x, const SolveOptions& opts,
                  const PbnoPreconditioner* precon) {
  check_sizes(map, b, x);
  if (!(opts.tol > 0.0)) throw Error("solver tolerance must be positive");
  SolveReport rep;
  const int n = map.dim;
  const int m = std::max(1, opts.restart);
  Counted A{map, rep.matvecs};
  const double bnorm = norm2(b);
  ++rep.dots;
  if (bnorm == 0.0) {
    std::fill(x.begin(), x.end(), 0.0);
    rep.converged = true;
    return rep;
  }
  std::vector<Vec> v(m + 1, Vec(n));
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(m + 1, m);
  Vec cs(m), sn(m), g(m + 1), w(n), z(n);
  const auto precondition = [&](std::span<const double> in, std::span<double> out) {
    if (precon) {
      apply_pbno(map, *precon, in, out);
      rep.matvecs += precon->order;
    } else {
      std::copy(in.begin(), in.end(), out.begin());
    }
  };
  bool stalled = false;
  while (true) {
    A(x, v[0]);
    axpby(1.0, b, -1.0, v[0]);
    const double beta = norm2(v[0]);
    ++rep.dots;
    rep.residual = beta / bnorm;
    if (rep.residual <= opts.tol) {
      rep.converged = true;
      break;
    }
    if (rep.iterations >= opts.max_iter || stalled) break;
    for (double& e : v[0]) e /= beta;
    std::fill(g.begin(), g.end(), 0.0);
    g[0] = beta;
    int k = 0;
    for (int j = 0; j < m && rep.iterations < opts.max_iter; ++j) {
      precondition(v[j], z);
      A(z, w);
      for (int i = 0; i <= j; ++i) {
        h(i, j) = dot(w, v[i]);
        axpy(-h(i, j), v[i], w);
      }
      h(j + 1, j) = norm2(w);
      rep.dots += j + 2;
      for (int i = 0; i < j; ++i) {
        const double t = cs[i] * h(i, j) + sn[i] * h(i + 1, j);
        h(i + 1, j) = -sn[i] * h(i, j) + cs[i] * h(i + 1, j);
        h(i, j) = t;
      }
      const double hn = h(j + 1, j);
      const double d = std::hypot(h(j, j), hn);
      if (d == 0.0) {
        rep.breakdown = true;
        break;
      }
      cs[j] = h(j, j) / d;
      sn[j] = hn / d;
      h(j, j) = d;
      h(j + 1, j) = 0.0;
      g[j + 1] = -sn[j] * g[j];
      g[j] = cs[j] * g[j];
      ++rep.iterations;
      k = j + 1;
      const double est = std::fabs(g[j + 1]) / bnorm;
      rep.history.push_back(est);
      if (hn == 0.0) {
        // Invariant subspace: the cycle solution is exact.
        stalled = est > opts.tol;
        if (stalled) rep.breakdown = true;
        break;
      }
      for (int i = 0; i < n; ++i) v[j + 1][i] = w[i] / hn;
      if (est <= opts.tol) break;
    }
    if (k == 0) break;
    Vec y(k);
    for (int i = k - 1; i >= 0; --i) {
      double s = g[i];
      for (int l = i + 1; l < k; ++l) s -= h(i, l) * y[l];
      y[i] = s / h(i, i);
    }
    std::fill(w.begin(), w.end(), 0.0);
    for (int i = 0; i < k; ++i) axpy(y[i], v[i], w);
    precondition(w, z);
    axpy(1.0, z, x);
  }
  rep.true_residual = rep.residual;
  return rep;
}

SolveReport bicgstab_pbno(const LinearMap& map, std::span<const double> b, std::span<double> x,
                          const SolveOptions& opts, const PbnoPreconditioner& precon) {
  check_sizes(map, b, x);
  if (!(opts.tol > 0.0)) throw Error("solver tolerance must be positive");
  SolveReport rep;
  const std::size_t n = b.size();
  Counted A{map, rep.matvecs};
  const auto M = [&](std::span<const double> in, std::span<double> out) {
    apply_pbno(map, precon, in, out);
    rep.matvecs += precon.order;
  };
  Vec rn(n), ro(n), p(n), t(n), ap(n), s(n), as(n), re(n);
  double ref;
  if (all_zero(x)) {
    M(b, rn);
    ref = norm2(rn);
    ++rep.dots;
  } else {
    M(b, t);
    ref = norm2(t);
    A(x, t);
    axpby(1.0, b, -1.0, t);
    M(t, rn);
    rep.dots += 1;
  }
  const double bnorm = norm2(b);
  if (ref == 0.0) {
    std::fill(x.begin(), x.end(), 0.0);
    rep.converged = true;
    return rep;
  }
  double rnorm = norm2(rn);
  ++rep.dots;
  rep.residual = rnorm / ref;
  if (rep.residual <= opts.tol) {
    rep.converged = true;
  } else {
    p = rn;
    ro = rn;
    double rho = dot(rn, ro);
    ++rep.dots;
    while (rep.iterations < opts.max_iter) {
      A(p, t);
      M(t, ap);
      const double den = dot(ap, ro);
      ++rep.dots;
      if (std::fabs(den) < 1e-300) {
        rep.breakdown = true;
        break;
      }
      const double ar = rho / den;
      for (std::size_t i = 0; i < n; ++i) s[i] = rn[i] - ar * ap[i];
      A(s, t);
      M(t, as);
      const double asas = dot(as, as);
      ++rep.dots;
      double wr = 0.0;
      if (asas > 1e-300) {
        wr = dot(as, s) / asas;
        ++rep.dots;
      }
      for (std::size_t i = 0; i < n; ++i) x[i] += ar * p[i] + wr * s[i];
      for (std::size_t i = 0; i < n; ++i) re[i] = s[i] - wr * as[i];
      rnorm = norm2(re);
      ++rep.dots;
      ++rep.iterations;
      rep.residual = rnorm / ref;
      rep.history.push_back(rep.residual);
      if (!std::isfinite(rep.residual)) {
        rep.breakdown = true;
        break;
      }
      if (rep.residual <= opts.tol) {
        rep.converged = true;
        break;
      }
      if (std::fabs(wr) < 1e-300) {
        rep.breakdown = true;
        break;
      }
      const double rho_new = dot(re, ro);
      ++rep.dots;
      const double br = rho_new / rho * (ar / wr);
      for (std::size_t i = 0; i < n; ++i) p[i] = re[i] + br * (p[i] - wr * ap[i]);
      std::swap(rn, re);
      rho = rho_new;
    }
  }
  rep.true_residual = true_residual(map, b, x, bnorm, rep);
  return rep;
}

SolveReport richardson_pbno(const LinearMap& map, std::span<const double> b, std::span<double> x,
                            const SolveOptions& opts, const PbnoPreconditioner& precon) {
  check_sizes(map, b, x);
  if (!(opts.tol > 0.0)) throw Error("solver tolerance must be positive");
  SolveReport rep;
  const std::size_t n = b.size();
  const int every = std::max(1, opts.check_every);
  Counted A{map, rep.matvecs};
  const double bnorm = norm2(b);
  ++rep.dots;
  if (bnorm == 0.0) {
    std::fill(x.begin(), x.end(), 0.0);
    rep.converged = true;
    return rep;
  }
  Vec r(n), z(n);
  A(x, r);
  axpby(1.0, b, -1.0, r);
  const double r0 = norm2(r) / bnorm;
  ++rep.dots;
  rep.residual = r0;
  if (r0 <= opts.tol) {
    rep.converged = true;
  } else {
    while (rep.iterations < opts.max_iter) {
      apply_pbno(map, precon, r, z);
      rep.matvecs += precon.order;
      axpy(1.0, z, x);
      A(x, r);
      axpby(1.0, b, -1.0, r);
      ++rep.iterations;
      if (rep.iterations % every != 0 && rep.iterations != opts.max_iter) continue;
      rep.residual = norm2(r) / bnorm;
      ++rep.dots;
      rep.history.push_back(rep.residual);
      if (rep.residual <= opts.tol) {
        rep.converged = true;
        break;
      }
      if (!std::isfinite(rep.residual) || rep.residual > 10.0 * r0) {
        rep.diverged = true;
        break;
      }
    }
  }
  rep.true_residual = rep.residual;
  return rep;
}

Spectrum estimate_spectrum(const LinearMap& map, int k_steps) {
  if (!map.apply || map.dim <= 0) throw Error("spectrum estimate needs a non-empty map");
  const int n = map.dim;
  const int k = std::clamp(k_steps, 1, n);
  std::mt19937_64 rng(20240611);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<Vec> v(k + 1, Vec(n));
  for (double& e : v[0]) e = u(rng);
  const double n0 = norm2(v[0]);
  for (double& e : v[0]) e /= n0;
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(k + 1, k);
  int m = k;
  Vec w(n);
  for (int j = 0; j < k; ++j) {
    map.apply(v[j], w);
    const double wn = norm2(w);
    // Two Gram-Schmidt passes; near-identity operators lose orthogonality otherwise.
    for (int pass = 0; pass < 2; ++pass)
      for (int i = 0; i <= j; ++i) {
        const double c = dot(w, v[i]);
        h(i, j) += c;
        axpy(-c, v[i], w);
      }
    h(j + 1, j) = norm2(w);
    if (h(j + 1, j) <= 1e-12 * std::max(wn, 1e-300)) {
      m = j + 1;
      break;
    }
    for (int i = 0; i < n; ++i) v[j + 1][i] = w[i] / h(j + 1, j);
  }
  Eigen::EigenSolver<Eigen::MatrixXd> es(h.topLeftCorner(m, m), false);
  if (es.info() != Eigen::Success) throw SolverError("Ritz value computation failed");
  double lo = 1e300, hi = -1e300, im = 0.0;
  for (int i = 0; i < m; ++i) {
    const std::complex<double> ev = es.eigenvalues()[i];
    if (!std::isfinite(ev.real()) || !std::isfinite(ev.imag())) throw SolverError("non-finite Ritz value");
    lo = std::min(lo, ev.real());
    hi = std::max(hi, ev.real());
    im = std::max(im, std::fabs(ev.imag()));
  }
  if (!(hi > 0.0)) throw SolverError("spectrum estimate is not positive");
  Spectrum s;
  s.lambda_max = 1.1 * hi;
  // The polynomial fit needs a positive lower bound.
  s.lambda_min = std::max(0.9 * lo, 1e-3 * s.lambda_max);
  s.imag_extent = 1.1 * im;
  return s;
}

PbnoPreconditioner fit_pbno_coefficients(const Spectrum& spectrum, int order, int sample_count) {
  if (order < 0) throw ConfigError("preconditioner order must be nonnegative");
  if (!(spectrum.lambda_min > 0.0) || !(spectrum.lambda_max >= spectrum.lambda_min))
    throw ConfigError("preconditioner spectrum must satisfy 0 < lambda_min <= lambda_max");
  PbnoPreconditioner pc;
  pc.order = order;
  pc.spectrum = spectrum;
  pc.scale = 2.0 / (spectrum.lambda_min + spectrum.lambda_max);
  const double ylo = pc.scale * spectrum.lambda_min, yhi = pc.scale * spectrum.lambda_max;
  const double mid = 0.5 * (ylo + yhi), half = 0.5 * (yhi - ylo);
  const double yim = pc.scale * spectrum.imag_extent;
  const int ns = std::max(sample_count, order + 1);
  const auto cheb = [](int i, int count) { return std::cos(std::numbers::pi * (i + 0.5) / count); };
  std::vector<std::complex<double>> pts;
  const bool cplx = yim > 1e-2 * yhi;
  if (cplx) {
    const int ni = 16, nr = std::max(1, ns / ni);
    for (int a = 0; a < nr; ++a)
      for (int c = 0; c < ni; ++c) pts.emplace_back(mid + half * cheb(a, nr), yim * cheb(c, ni));
  } else {
    for (int a = 0; a < ns; ++a) pts.emplace_back(mid + half * cheb(a, ns), 0.0);
  }
  const int rows = static_cast<int>(pts.size()) * (cplx ? 2 : 1);
  Eigen::MatrixXd a(rows, order + 1);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(rows);
  for (std::size_t s = 0; s < pts.size(); ++s) {
    std::complex<double> zp = pts[s];
    for (int i = 0; i <= order; ++i) {
      if (cplx) {
        a(2 * s, i) = zp.real();
        a(2 * s + 1, i) = zp.imag();
      } else {
        a(s, i) = zp.real();
      }
      zp *= pts[s];
    }
    rhs(cplx ? 2 * s : s) = 1.0;
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
  qr.setThreshold(1e-12);
  pc.coefficients.assign(order + 1, 0.0);
  if (qr.rank() == order + 1) {
    const Eigen::VectorXd c = qr.solve(rhs);
    for (int i = 0; i <= order; ++i) pc.coefficients[i] = c(i);
  }
  const bool bad = qr.rank() < order + 1 ||
                   std::any_of(pc.coefficients.begin(), pc.coefficients.end(), [](double c) { return !std::isfinite(c); });
  if (bad) {
    // Interpolate 1/y at Chebyshev points of the real interval.
    Eigen::MatrixXd vm(order + 1, order + 1);
    Eigen::VectorXd f(order + 1);
    for (int r = 0; r <= order; ++r) {
      const double y = mid + half * cheb(r, order + 1);
      double yp = 1.0;
      for (int i = 0; i <= order; ++i) {
        vm(r, i) = yp;
        yp *= y;
      }
      f(r) = 1.0 / y;
    }
    const Eigen::VectorXd c = vm.fullPivLu().solve(f);
    for (int i = 0; i <= order; ++i) pc.coefficients[i] = c(i);
    pc.chebyshev_fallback = true;
  }
  return pc;
}

}  // namespace dycore::krylov
