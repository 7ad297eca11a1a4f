#include <immintrin.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "dycore/simd/kernels.hpp"
#include "kernels_internal.hpp"

// Same operation order as the scalar kernels; lanes map to SIMD lanes.
namespace dycore::simd {
namespace {

constexpr int W = kLanes;

void zero(double* out, int n) {
  const __m256d z = _mm256_setzero_pd();
  for (int i = 0; i < n; ++i) _mm256_storeu_pd(out + i * W, z);
}

void contract_r(const TensorShape& sh, const double* d, const double* in, double* out) {
  if (sh.nr == 1) return zero(out, sh.size());
  for (int k = 0; k < sh.nt; ++k)
    for (int j = 0; j < sh.ns; ++j) {
      const int base = sh.nr * (j + sh.ns * k);
      for (int i = 0; i < sh.nr; ++i) {
        __m256d acc = _mm256_setzero_pd();
        for (int m = 0; m < sh.nr; ++m)
          acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_set1_pd(d[i * sh.nr + m]),
                                                 _mm256_loadu_pd(in + (base + m) * W)));
        _mm256_storeu_pd(out + (base + i) * W, acc);
      }
    }
}

void contract_s(const TensorShape& sh, const double* d, const double* in, double* out) {
  if (sh.ns == 1) return zero(out, sh.size());
  for (int k = 0; k < sh.nt; ++k)
    for (int j = 0; j < sh.ns; ++j)
      for (int i = 0; i < sh.nr; ++i) {
        __m256d acc = _mm256_setzero_pd();
        for (int m = 0; m < sh.ns; ++m)
          acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_set1_pd(d[j * sh.ns + m]),
                                                 _mm256_loadu_pd(in + (i + sh.nr * (m + sh.ns * k)) * W)));
        _mm256_storeu_pd(out + (i + sh.nr * (j + sh.ns * k)) * W, acc);
      }
}

void contract_t(const TensorShape& sh, const double* d, const double* in, double* out) {
  if (sh.nt == 1) return zero(out, sh.size());
  const int plane = sh.nr * sh.ns;
  for (int k = 0; k < sh.nt; ++k)
    for (int p = 0; p < plane; ++p) {
      __m256d acc = _mm256_setzero_pd();
      for (int m = 0; m < sh.nt; ++m)
        acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_set1_pd(d[k * sh.nt + m]),
                                               _mm256_loadu_pd(in + (p + plane * m) * W)));
      _mm256_storeu_pd(out + (p + plane * k) * W, acc);
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
  const int n = sh.size();
  thread_local std::vector<double> a, b;
  a.resize(n * W);
  b.resize(n * W);
  contract_r(sh, dr, fr, out);
  contract_s(sh, ds, fs, a.data());
  contract_t(sh, dt, ft, b.data());
  for (int i = 0; i < n; ++i) {
    __m256d v = _mm256_add_pd(_mm256_loadu_pd(out + i * W), _mm256_loadu_pd(a.data() + i * W));
    _mm256_storeu_pd(out + i * W, _mm256_add_pd(v, _mm256_loadu_pd(b.data() + i * W)));
  }
}

void ref_derivative_t(const TensorShape& sh, const double* dt, const double* in, double* out) {
  contract_t(sh, dt, in, out);
}

double chunk_dot(std::size_t n, const double* x, const double* y) {
  __m256d acc = _mm256_setzero_pd();
  const std::size_t full = n - n % W;
  for (std::size_t i = 0; i < full; i += W)
    acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  alignas(32) double lanes[W];
  _mm256_store_pd(lanes, acc);
  for (std::size_t i = full; i < n; ++i) lanes[i % W] = lanes[i % W] + x[i] * y[i];
  return (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
}

double dot(std::size_t n, const double* x, const double* y) {
  return detail::chunked_dot(n, x, y, chunk_dot);
}

void axpy(std::size_t n, double a, const double* x, double* y) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + W <= n; i += W)
    _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_loadu_pd(y + i), _mm256_mul_pd(va, _mm256_loadu_pd(x + i))));
  for (; i < n; ++i) y[i] = y[i] + a * x[i];
}

void axpby(std::size_t n, double a, const double* x, double b, double* y) {
  const __m256d va = _mm256_set1_pd(a);
  const __m256d vb = _mm256_set1_pd(b);
  std::size_t i = 0;
  for (; i + W <= n; i += W)
    _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_mul_pd(va, _mm256_loadu_pd(x + i)),
                                          _mm256_mul_pd(vb, _mm256_loadu_pd(y + i))));
  for (; i < n; ++i) y[i] = a * x[i] + b * y[i];
}

void band_lu_factor(int m, int nb, double* ab, double* min_pivot) {
  const __m256d sign = _mm256_set1_pd(-0.0);
  double mp[W];
  std::fill(mp, mp + W, INFINITY);
  for (int k = 0; k < m; ++k) {
    const __m256d piv = _mm256_loadu_pd(ab + band_index(nb, k, k, 0));
    alignas(32) double ap[W];
    _mm256_store_pd(ap, _mm256_andnot_pd(sign, piv));
    for (int l = 0; l < W; ++l) mp[l] = std::min(mp[l], ap[l]);
    const int e = std::min(k + nb, m);
    for (int i = k + 1; i < e; ++i) {
      double* pik = ab + band_index(nb, i, k, 0);
      const __m256d lik = _mm256_div_pd(_mm256_loadu_pd(pik), piv);
      _mm256_storeu_pd(pik, lik);
      for (int j = k + 1; j < e; ++j) {
        double* pij = ab + band_index(nb, i, j, 0);
        const __m256d ukj = _mm256_loadu_pd(ab + band_index(nb, k, j, 0));
        _mm256_storeu_pd(pij, _mm256_sub_pd(_mm256_loadu_pd(pij), _mm256_mul_pd(lik, ukj)));
      }
    }
  }
  std::copy(mp, mp + W, min_pivot);
}

void band_lu_solve(int m, int nb, const double* ab, double* x) {
  for (int i = 0; i < m; ++i) {
    __m256d s = _mm256_loadu_pd(x + i * W);
    for (int j = std::max(0, i - nb + 1); j < i; ++j)
      s = _mm256_sub_pd(s, _mm256_mul_pd(_mm256_loadu_pd(ab + band_index(nb, i, j, 0)), _mm256_loadu_pd(x + j * W)));
    _mm256_storeu_pd(x + i * W, s);
  }
  for (int i = m - 1; i >= 0; --i) {
    __m256d s = _mm256_loadu_pd(x + i * W);
    const int e = std::min(i + nb, m);
    for (int j = i + 1; j < e; ++j)
      s = _mm256_sub_pd(s, _mm256_mul_pd(_mm256_loadu_pd(ab + band_index(nb, i, j, 0)), _mm256_loadu_pd(x + j * W)));
    _mm256_storeu_pd(x + i * W, _mm256_div_pd(s, _mm256_loadu_pd(ab + band_index(nb, i, i, 0))));
  }
}

}  // namespace

const KernelTable* avx2_table_unchecked() {
  static const KernelTable table{Backend::kAvx2, "avx2", ref_gradient, ref_divergence, ref_derivative_t,
                                 dot, axpy, axpby, band_lu_factor, band_lu_solve};
  return &table;
}

}  // namespace dycore::simd
