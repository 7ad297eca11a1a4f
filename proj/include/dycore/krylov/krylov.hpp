#pragma once

#include <functional>
#include <span>
#include <vector>

namespace dycore::krylov {

// Matrix-free linear operator y = A x.
struct LinearMap {
  int dim = 0;
  std::function<void(std::span<const double> x, std::span<double> y)> apply;
};

struct SolveReport {
  int iterations = 0;
  double residual = 0.0;       // final relative residual used by the stopping test
  double true_residual = 0.0;  // ||b - A x|| / ||b|| evaluated once at exit
  bool converged = false;
  bool breakdown = false;
  bool diverged = false;
  long matvecs = 0;
  long dots = 0;  // dot products and norms
  std::vector<double> history;  // residual after every iteration (GMRES: within-cycle estimate)
};

struct SolveOptions {
  double tol = 1e-8;
  int max_iter = 1000;
  int restart = 50;     // GMRES
  int check_every = 1;  // Richardson: norm evaluated every k iterations
};

// Spectrum bounds with the safety margin already applied. imag_extent is the largest
// |Im| of the Ritz values (zero for real spectra).
struct Spectrum {
  double lambda_min = 1.0;
  double lambda_max = 1.0;
  double imag_extent = 0.0;
};

// s(A) = sum_i c_i (scale A)^i applied to scale * r.
struct PbnoPreconditioner {
  int order = 0;
  std::vector<double> coefficients{1.0};  // c_0 .. c_P
  double scale = 1.0;                     // 2 / (lambda_min + lambda_max)
  Spectrum spectrum;
  bool chebyshev_fallback = false;
};

// r_star = s(scale A)(scale r); exactly `order` map applications.
void apply_pbno(const LinearMap& map, const PbnoPreconditioner& precon, std::span<const double> r,
                std::span<double> r_star);

// Restarted GMRES with right preconditioning, modified Gram-Schmidt and Givens rotations.
// x holds the initial guess on entry. The stopping test uses ||b - A x|| / ||b||.
SolveReport gmres(const LinearMap& map, std::span<const double> b, std::span<double> x, const SolveOptions& opts,
                  const PbnoPreconditioner* precon = nullptr);

// Left PBNO-preconditioned BiCGstab. Stops when ||s(A) r|| / ||s(A) b|| <= tol.
SolveReport bicgstab_pbno(const LinearMap& map, std::span<const double> b, std::span<double> x,
                          const SolveOptions& opts, const PbnoPreconditioner& precon);

// x <- x + s(A) (b - A x). Only the convergence check, every check_every iterations,
// takes a norm. Reports divergence when the residual exceeds 10x the initial one.
SolveReport richardson_pbno(const LinearMap& map, std::span<const double> b, std::span<double> x,
                            const SolveOptions& opts, const PbnoPreconditioner& precon);

// Ritz-value bounds from k_steps of Arnoldi started from a fixed pseudo-random vector,
// widened by 10% (lower bound * 0.9, upper bound * 1.1). Throws on non-finite values.
Spectrum estimate_spectrum(const LinearMap& map, int k_steps);

// Least-squares fit of 1 - s(y) y over sample_count Chebyshev-distributed points of the
// scaled spectrum (a grid over the rectangle when the spectrum has an imaginary extent).
PbnoPreconditioner fit_pbno_coefficients(const Spectrum& spectrum, int order, int sample_count = 256);

// Parallel-safe helpers on the active SIMD backend with fixed reduction order.
double dot(std::span<const double> x, std::span<const double> y);
double norm2(std::span<const double> x);

}  // namespace dycore::krylov
