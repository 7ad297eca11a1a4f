#pragma once

#include <map>
#include <memory>

#include "dycore/columnsolve/columnsolve.hpp"
#include "dycore/imexcore/implicit_problem.hpp"
#include "dycore/imexcore/integrators.hpp"
#include "dycore/krylov/krylov.hpp"

namespace dycore::imexcore {

enum class SolverKind { kGmres, kBicgstab, kRichardson, kDirect };

struct SolverSettings {
  SolverKind kind = SolverKind::kGmres;
  int pbno_order = -1;  // negative: no preconditioner
  double tol = 1e-6;
  int max_iter = 500;
  int restart = 50;
  int check_every = 1;
  int spectrum_steps = 30;
  bool fail_on_nonconvergence = true;
};

struct SolveStats {
  long solves = 0;
  long iterations = 0;
  long matvecs = 0;
  long dots = 0;
  long failures = 0;
  double max_residual = 0.0;
  double seconds = 0.0;        // time inside implicit solves, setup excluded
  double setup_seconds = 0.0;  // spectrum estimates, polynomial fits, factorizations
};

// Solves the implicit stage systems of one ImplicitProblem, caching preconditioners
// and column factorizations per lambda.
class StageSolver {
 public:
  StageSolver(ImplicitProblem& problem, SolverSettings settings);

  // q_tt - lambda L(q_tt) = q_tt_e. q_tt holds the initial guess on entry (usually q_tt_e).
  // Throws SolverError on non-convergence unless disabled in the settings.
  krylov::SolveReport solve(const euler::State& q_tt_e, double lambda, euler::State& q_tt);

  ImplicitProblem& problem() { return problem_; }
  const SolverSettings& settings() const { return settings_; }
  SolveStats& stats() { return stats_; }
  const SolveStats& stats() const { return stats_; }

  // Cached setup for a lambda (builds it on first use).
  const krylov::PbnoPreconditioner* preconditioner(double lambda);
  const columnsolve::ColumnJacobian& jacobian(double lambda);

 private:
  struct Setup {
    bool has_precon = false;
    krylov::PbnoPreconditioner precon;
    std::unique_ptr<columnsolve::ColumnJacobian> jacobian;
  };
  Setup& setup(double lambda);

  ImplicitProblem& problem_;
  SolverSettings settings_;
  SolveStats stats_;
  std::map<double, Setup> cache_;
  std::vector<double> rhs_, x_;
};

enum class Method { kRk35, kArk2, kBdf2 };

// Advances Euler states with an explicit or IMEX method.
class TimeStepper {
 public:
  // solver may be null for the explicit method.
  TimeStepper(const euler::EulerOperators& ops, Method method, StageSolver* solver = nullptr);

  void step(euler::State& q, double dt);
  Method method() const { return method_; }
  // Forget multistep history (needed after changing dt or the state externally).
  void reset() { history_.reset(); }

 private:
  const euler::EulerOperators& ops_;
  Method method_;
  StageSolver* solver_;
  ButcherPair tableau_;
  BdfCoefficients bdf_;
  Bdf2History history_;
  ImexFunctions fns_;
  euler::State in_, out_, guess_;
};

}  // namespace dycore::imexcore
