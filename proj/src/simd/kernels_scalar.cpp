#include <algorithm>
#include <cmath>

#include "dycore/simd/kernels.hpp"
#include "kernels_internal.hpp"

namespace dycore::simd {
namespace {

constexpr int W = kLanes;

void contract_r(const TensorShape& sh, const double* d, const double* in, double* out) {
  const int n = sh.size();
  if (sh.nr == 1) {
    std::fill(out, out + n * W, 0.0);
    return;
  }
  for (int k = 0; k < sh.nt; ++k)
    for (int j = 0; j < sh.ns; ++j) {
      const int base = sh.nr * (j + sh.ns * k);
      for (int i = 0; i < sh.nr; ++i)
        for (int l = 0; l < W; ++l) {
          double acc = 0.0;
          for (int m = 0; m < sh.nr; ++m) acc = acc + d[i * sh.nr + m] * in[(base + m) * W + l];
          out[(base + i) * W + l] = acc;
        }
    }
}

void contract_s(const TensorShape& sh, const double* d, const double* in, double* out) {
  const int n = sh.size();
  if (sh.ns == 1) {
    std::fill(out, out + n * W, 0.0);
    return;
  }
  for (int k = 0; k < sh.nt; ++k)
    for (int j = 0; j < sh.ns; ++j)
      for (int i = 0; i < sh.nr; ++i)
        for (int l = 0; l < W; ++l) {
          double acc = 0.0;
          for (int m = 0; m < sh.ns; ++m)
            acc = acc + d[j * sh.ns + m] * in[(i + sh.nr * (m + sh.ns * k)) * W + l];
          out[(i + sh.nr * (j + sh.ns * k)) * W + l] = acc;
        }
}

void contract_t(const TensorShape& sh, const double* d, const double* in, double* out) {
  const int n = sh.size();
  if (sh.nt == 1) {
    std::fill(out, out + n * W, 0.0);
    return;
  }
  const int plane = sh.nr * sh.ns;
  for (int k = 0; k < sh.nt; ++k)
    for (int p = 0; p < plane; ++p)
      for (int l = 0; l < W; ++l) {
        double acc = 0.0;
        for (int m = 0; m < sh.nt; ++m) acc = acc + d[k * sh.nt + m] * in[(p + plane * m) * W + l];
        out[(p + plane * k) * W + l] = acc;
      }
}

void ref_gradient(const TensorShape& sh, const double* dr, const double* ds, const double* dt,
                  const double* in, double* out_r, double* out_s, double* out_t) {
  contract_r(sh, dr, in, out_r);
  contract_s(sh, ds, in, out_s);
  contract_t(sh, dt, in, out_t);
}

void ref_divergence(const TensorShape& sh, const double* dr, const double* ds, const double* dt,
                    const double* fr, const double* fs, const double* ft, double* out) {
  const int n = sh.size() * W;
  thread_local std::vector<double> a, b;
  a.resize(n);
  b.resize(n);
  contract_r(sh, dr, fr, out);
  contract_s(sh, ds, fs, a.data());
  contract_t(sh, dt, ft, b.data());
  for (int i = 0; i < n; ++i) out[i] = (out[i] + a[i]) + b[i];
}

void ref_derivative_t(const TensorShape& sh, const double* dt, const double* in, double* out) {
  contract_t(sh, dt, in, out);
}

double chunk_dot(std::size_t n, const double* x, const double* y) {
  double acc[W] = {0.0, 0.0, 0.0, 0.0};
  for (std::size_t i = 0; i < n; ++i) acc[i % W] = acc[i % W] + x[i] * y[i];
  return (acc[0] + acc[1]) + (acc[2] + acc[3]);
}

double dot(std::size_t n, const double* x, const double* y) {
  return detail::chunked_dot(n, x, y, chunk_dot);
}

void axpy(std::size_t n, double a, const double* x, double* y) {
  for (std::size_t i = 0; i < n; ++i) y[i] = y[i] + a * x[i];
}

void axpby(std::size_t n, double a, const double* x, double b, double* y) {
  for (std::size_t i = 0; i < n; ++i) y[i] = a * x[i] + b * y[i];
}

void band_lu_factor(int m, int nb, double* ab, double* min_pivot) {
  for (int l = 0; l < W; ++l) {
    double mp = INFINITY;
    for (int k = 0; k < m; ++k) {
      const double piv = ab[band_index(nb, k, k, l)];
      mp = std::min(mp, std::fabs(piv));
      const int e = std::min(k + nb, m);
      for (int i = k + 1; i < e; ++i) {
        double& lik = ab[band_index(nb, i, k, l)];
        lik = lik / piv;
        for (int j = k + 1; j < e; ++j)
          ab[band_index(nb, i, j, l)] = ab[band_index(nb, i, j, l)] - lik * ab[band_index(nb, k, j, l)];
      }
    }
    min_pivot[l] = mp;
  }
}

void band_lu_solve(int m, int nb, const double* ab, double* x) {
  for (int l = 0; l < W; ++l) {
    for (int i = 0; i < m; ++i) {
      double s = x[i * W + l];
      for (int j = std::max(0, i - nb + 1); j < i; ++j) s = s - ab[band_index(nb, i, j, l)] * x[j * W + l];
      x[i * W + l] = s;
    }
    for (int i = m - 1; i >= 0; --i) {
      double s = x[i * W + l];
      const int e = std::min(i + nb, m);
      for (int j = i + 1; j < e; ++j) s = s - ab[band_index(nb, i, j, l)] * x[j * W + l];
      x[i * W + l] = s / ab[band_index(nb, i, i, l)];
    }
  }
}

}  // namespace

const KernelTable& scalar_kernels() {
  static const KernelTable table{Backend::kScalar, "scalar", ref_gradient, ref_divergence, ref_derivative_t,
                                 dot, axpy, axpby, band_lu_factor, band_lu_solve};
  return table;
}

}  // namespace dycore::simd
