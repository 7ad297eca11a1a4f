#include "dycore/imexcore/stepper.hpp"

#include <chrono>
#include <sstream>

namespace dycore::imexcore {
namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

StageSolver::StageSolver(ImplicitProblem& problem, SolverSettings settings) : problem_(problem), settings_(settings) {
  if (settings.kind == SolverKind::kDirect && problem.dim() != ImplicitDim::k1D)
    throw ConfigError("the direct column solver needs the vertical-only implicit problem");
  if (!(settings.tol > 0.0)) throw ConfigError("solver tolerance must be positive");
  if (settings.max_iter < 1) throw ConfigError("solver iteration limit must be positive");
  if (settings.kind == SolverKind::kRichardson && settings.pbno_order < 0)
    throw ConfigError("Richardson iteration needs a polynomial preconditioner (order >= 0)");
}

StageSolver::Setup& StageSolver::setup(double lambda) {
  auto it = cache_.find(lambda);
  if (it != cache_.end()) return it->second;
  const auto t0 = std::chrono::steady_clock::now();
  problem_.set_lambda(lambda);
  Setup s;
  if (settings_.kind == SolverKind::kDirect) {
    s.jacobian = std::make_unique<columnsolve::ColumnJacobian>(columnsolve::build_column_jacobian(problem_));
    columnsolve::lu_factor_banded(*s.jacobian);
  } else if (settings_.pbno_order >= 0) {
    const krylov::LinearMap map = problem_.lhs_map();
    const krylov::Spectrum spec = krylov::estimate_spectrum(map, settings_.spectrum_steps);
    s.precon = krylov::fit_pbno_coefficients(spec, settings_.pbno_order);
    s.has_precon = true;
  }
  stats_.setup_seconds += seconds_since(t0);
  return cache_.emplace(lambda, std::move(s)).first->second;
}

const krylov::PbnoPreconditioner* StageSolver::preconditioner(double lambda) {
  Setup& s = setup(lambda);
  return s.has_precon ? &s.precon : nullptr;
}

const columnsolve::ColumnJacobian& StageSolver::jacobian(double lambda) {
  Setup& s = setup(lambda);
  if (!s.jacobian) throw Error("no column factorization for this solver");
  return *s.jacobian;
}

krylov::SolveReport StageSolver::solve(const euler::State& qe, double lambda, euler::State& q) {
  Setup& s = setup(lambda);
  problem_.set_lambda(lambda);
  const auto t0 = std::chrono::steady_clock::now();
  krylov::SolveReport rep;
  if (q.num_dofs != qe.num_dofs) q = qe;
  if (lambda == 0.0) {
    q = qe;
    rep.converged = true;
    return rep;
  }
  const bool schur = problem_.form() == ImplicitForm::kSchur;
  const int n = problem_.system_size();
  rhs_.resize(n);
  x_.resize(n);
  if (schur) {
    problem_.rhs_schur_build(qe, rhs_.data());
    problem_.ops().linearized_pressure(q, x_.data());
  } else {
    std::copy(qe.data.begin(), qe.data.end(), rhs_.begin());
    std::copy(q.data.begin(), q.data.end(), x_.begin());
  }
  krylov::SolveOptions opts;
  opts.tol = settings_.tol;
  opts.max_iter = settings_.max_iter;
  opts.restart = settings_.restart;
  opts.check_every = settings_.check_every;
  const krylov::PbnoPreconditioner identity;
  const krylov::PbnoPreconditioner& pc = s.has_precon ? s.precon : identity;
  switch (settings_.kind) {
    case SolverKind::kDirect:
      columnsolve::solve_columns_direct(*s.jacobian, rhs_, x_);
      rep.converged = true;
      break;
    case SolverKind::kGmres:
      rep = krylov::gmres(problem_.lhs_map(), rhs_, x_, opts, s.has_precon ? &s.precon : nullptr);
      break;
    case SolverKind::kBicgstab:
      rep = krylov::bicgstab_pbno(problem_.lhs_map(), rhs_, x_, opts, pc);
      break;
    case SolverKind::kRichardson:
      rep = krylov::richardson_pbno(problem_.lhs_map(), rhs_, x_, opts, pc);
      break;
  }
  if (schur) {
    problem_.extract_from_pressure(x_.data(), qe, q);
  } else {
    std::copy(x_.begin(), x_.end(), q.data.begin());
  }
  stats_.seconds += seconds_since(t0);
  stats_.solves += 1;
  stats_.iterations += rep.iterations;
  stats_.matvecs += rep.matvecs;
  stats_.dots += rep.dots;
  stats_.max_residual = std::max(stats_.max_residual, rep.residual);
  if (!rep.converged) {
    stats_.failures += 1;
    if (settings_.fail_on_nonconvergence) {
      std::ostringstream msg;
      msg << "implicit solve did not converge after " << rep.iterations << " iterations (relative residual "
          << rep.residual << (rep.breakdown ? ", breakdown" : "") << (rep.diverged ? ", diverged" : "") << ")";
      throw SolverError(msg.str());
    }
  }
  return rep;
}

TimeStepper::TimeStepper(const euler::EulerOperators& ops, Method method, StageSolver* solver)
    : ops_(ops), method_(method), solver_(solver), tableau_(ButcherPair::ark2()) {
  if (method != Method::kRk35 && !solver) throw ConfigError("IMEX methods need an implicit solver");
  tableau_.validate();
  in_ = ops.make_state();
  out_ = ops.make_state();
  guess_ = ops.make_state();
  fns_.rhs = [this](std::span<const double> x, std::span<double> y) {
    std::copy(x.begin(), x.end(), in_.data.begin());
    ops_.nonlinear_rhs(in_, out_);
    std::copy(out_.data.begin(), out_.data.end(), y.begin());
  };
  fns_.check = [this](std::span<const double> x) {
    std::copy(x.begin(), x.end(), in_.data.begin());
    ops_.check_state(in_);
  };
  if (solver_) {
    const euler::Restriction r = solver_->problem().restriction();
    fns_.linear = [this, r](std::span<const double> x, std::span<double> y) {
      std::copy(x.begin(), x.end(), in_.data.begin());
      ops_.linear_operator(in_, out_, r);
      std::copy(out_.data.begin(), out_.data.end(), y.begin());
    };
    fns_.solve = [this](std::span<const double> qe, double lambda, std::span<double> q) {
      std::copy(qe.begin(), qe.end(), in_.data.begin());
      std::copy(q.begin(), q.end(), guess_.data.begin());
      solver_->solve(in_, lambda, guess_);
      std::copy(guess_.data.begin(), guess_.data.end(), q.begin());
    };
  }
}

void TimeStepper::step(euler::State& q, double dt) {
  if (!(dt > 0.0)) throw ConfigError("time step must be positive");
  switch (method_) {
    case Method::kRk35:
      rk35_step(q.data, dt, fns_.rhs, fns_.check);
      break;
    case Method::kArk2:
      ark_imex_step(q.data, dt, tableau_, fns_);
      break;
    case Method::kBdf2:
      bdf2_imex_step(q.data, dt, bdf_, tableau_, fns_, history_);
      break;
  }
}

}  // namespace dycore::imexcore
