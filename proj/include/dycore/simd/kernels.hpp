#pragma once

#include <cstddef>

// Runtime-dispatched numerical kernels. Every kernel has a portable scalar
// reference and an AVX2 variant that performs the same operations in the same
// order, so both produce bitwise identical results.
namespace dycore::simd {

// Element batches interleave this many elements (one per SIMD lane).
inline constexpr int kLanes = 4;

// Nodes of a tensor-product element: index = i + nr * (j + ns * k).
struct TensorShape {
  int nr = 1;
  int ns = 1;
  int nt = 1;
  int size() const { return nr * ns * nt; }
};

enum class Backend { kScalar, kAvx2 };

struct KernelTable {
  Backend backend;
  const char* name;
  // out_x[node, lane] = sum_m Dx[i_x, m] in[node with i_x -> m, lane] for x in {r, s, t}.
  // A direction with a single node yields zero.
  void (*ref_gradient)(const TensorShape& shape, const double* dr, const double* ds, const double* dt,
                       const double* in, double* out_r, double* out_s, double* out_t);
  // out = Dr fr + Ds fs + Dt ft (reference-space divergence of a lane-batched vector field).
  void (*ref_divergence)(const TensorShape& shape, const double* dr, const double* ds, const double* dt,
                         const double* fr, const double* fs, const double* ft, double* out);
  // Derivative along t only.
  void (*ref_derivative_t)(const TensorShape& shape, const double* dt, const double* in, double* out);
  double (*dot)(std::size_t n, const double* x, const double* y);
  // y += a x
  void (*axpy)(std::size_t n, double a, const double* x, double* y);
  // y = a x + b y
  void (*axpby)(std::size_t n, double a, const double* x, double b, double* y);
  // In-place no-pivot LU of kLanes banded matrices stored row-band interleaved:
  // entry (i, j) of lane l lives at ((i * (2 nb - 1) + j - i + nb - 1) * kLanes + l).
  // A_ij must vanish for |i - j| >= nb. min_pivot receives min_k |U_kk| per lane.
  void (*band_lu_factor)(int m, int nb, double* ab, double* min_pivot);
  // Forward and back substitution with factors from band_lu_factor; x is [i * kLanes + l].
  void (*band_lu_solve)(int m, int nb, const double* ab, double* x);
};

const KernelTable& kernels();
const KernelTable& scalar_kernels();
// Null when the CPU lacks AVX2.
const KernelTable* avx2_kernels();
bool avx2_supported();

// Selects the active table. Requesting AVX2 on a machine without it throws.
// The initial choice is AVX2 when available unless DYCORE_SIMD=scalar.
void select_backend(Backend backend);
Backend active_backend();

// Index of a band entry for the banded LU kernels.
inline std::size_t band_index(int nb, int i, int j, int lane) {
  return (static_cast<std::size_t>(i) * (2 * nb - 1) + (j - i + nb - 1)) * kLanes + lane;
}

// Fixed-order reduction helpers shared by all backends.
namespace detail {
inline constexpr std::size_t kDotChunk = 256;
double pairwise_sum(const double* partial, std::size_t count);
}  // namespace detail

}  // namespace dycore::simd
