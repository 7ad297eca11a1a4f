#pragma once

#include <functional>
#include <span>
#include <vector>

#include "dycore/imexcore/tableau.hpp"

namespace dycore::imexcore {

using VectorFn = std::function<void(std::span<const double> in, std::span<double> out)>;

// Callbacks an IMEX integrator needs on a flat state vector.
struct ImexFunctions {
  VectorFn rhs;     // full tendency R(q)
  VectorFn linear;  // implicit part L(q); only used when b differs from bt
  // Solves q_tt - lambda L(q_tt) = q_tt_e; q_tt holds the initial guess (q_tt_e) on entry.
  std::function<void(std::span<const double> q_tt_e, double lambda, std::span<double> q_tt)> solve;
  // Optional validity check of each stage value (throws on failure).
  std::function<void(std::span<const double> q)> check;
};

// One SSPRK(5,3) step in Shu-Osher form.
void rk35_step(std::span<double> q, double dt, const VectorFn& rhs,
               const std::function<void(std::span<const double>)>& check = {});

// One additive Runge-Kutta step. Every stage after the first solves
// q_tt = q_tt_e + lambda L(q_tt) with lambda = diagonal * dt for the shifted variable
// q_tt = q_i + sum_j ((at_ij - a_ij) / at_ii) q_j. When rhs_first is given it receives R(q^n).
void ark_imex_step(std::span<double> q, double dt, const ButcherPair& tableau, const ImexFunctions& fns,
                   std::vector<double>* rhs_first = nullptr);

// State carried between BDF2 steps.
struct Bdf2History {
  bool ready = false;
  double dt = 0.0;
  std::vector<double> q_prev, rhs_prev;
  void reset() { ready = false; }
};

// One IMEX BDF2 step. The first step (or a step with a different dt) is bootstrapped
// with the given additive Runge-Kutta pair.
void bdf2_imex_step(std::span<double> q, double dt, const BdfCoefficients& coeffs, const ButcherPair& bootstrap,
                    const ImexFunctions& fns, Bdf2History& history);

}  // namespace dycore::imexcore
