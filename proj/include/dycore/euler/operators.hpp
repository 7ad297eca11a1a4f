#pragma once

#include <cstdint>
#include <vector>

#include "dycore/euler/reference.hpp"
#include "dycore/euler/state.hpp"
#include "dycore/specgrid/discretization.hpp"

namespace dycore::euler {

// Which derivatives an operator uses: all directions or only the vertical (radial) one.
enum class Restriction { kFull, kVertical };

// Hand-counted operation tallies.
struct OpCounters {
  std::uint64_t flops = 0;
  std::uint64_t rhs_evaluations = 0;
  std::uint64_t linear_evaluations = 0;
};

struct CourantNumbers {
  double horizontal = 0.0;
  double vertical = 0.0;
  double max_speed = 0.0;
};

// Spatial operators of one equation set on one discretization. Continuous Galerkin
// results are assembled (mass-weighted average) and have the no-flux condition applied;
// discontinuous Galerkin results include Rusanov surface terms with mirrored wall states.
//
// An instance keeps scratch buffers and must not be used from several threads at once.
class EulerOperators {
 public:
  EulerOperators(const specgrid::Discretization& disc, const ReferenceState& ref, EquationSet set);

  const specgrid::Discretization& disc() const { return disc_; }
  const ReferenceState& ref() const { return ref_; }
  EquationSet set() const { return set_; }
  int num_dofs() const { return disc_.num_dofs(); }
  State make_state() const { return State(set_, num_dofs()); }

  // Full nonlinear tendency R(q).
  void nonlinear_rhs(const State& q, State& out) const;
  // Linear acoustic/gravity part L(q) (or its vertical restriction L_V).
  void linear_operator(const State& q, State& out, Restriction restriction = Restriction::kFull) const;
  void vertical_restriction(const State& q, State& out) const { linear_operator(q, out, Restriction::kVertical); }

  // Assembled derivatives of dof fields (volume terms only for discontinuous Galerkin).
  void gradient(const double* f, double* gx, double* gy, double* gz, Restriction restriction) const;
  void divergence(const double* vx, const double* vy, const double* vz, double* out, Restriction restriction) const;

  // Adds scale * (lifted linear Rusanov surface terms) of q to out (discontinuous only).
  // The lifted term is -L (n.F* - n.F-) per face node, i.e. the surface part of linear_operator.
  void add_linear_surface(const State& q, State& out, double scale, Restriction restriction) const;

  // Removes constrained velocity components: wall-normal components (continuous Galerkin)
  // and the y component on box meshes.
  void project_velocity(double* vx, double* vy, double* vz) const;
  void project_velocity(State& q) const {
    project_velocity(q.field(kMomX), q.field(kMomY), q.field(kMomZ));
  }
  // Projection of one vector at one dof.
  Vec3 project_vector(int dof, const Vec3& v) const;

  // P^tt = G0 rho + H0 theta (Set2NC) or F0 Theta (Set2C).
  void linearized_pressure(const State& q, double* p) const;
  // Exact perturbation pressure from the equation of state.
  void pressure_perturbation(const State& q, double* p) const;

  CourantNumbers courant_numbers(const State& q, double dt) const;

  // Throws NonFiniteError when a value is not finite or the total density is not positive.
  void check_state(const State& q) const;

  OpCounters& counters() const { return counters_; }

 private:
  void rhs_nc(const State& q, State& out) const;
  void rhs_c(const State& q, State& out) const;
  void add_nonlinear_surface(const State& q, State& out) const;
  void gather_reference(const std::vector<double>& dof, std::vector<double>& batched) const;

  const specgrid::Discretization& disc_;
  const ReferenceState& ref_;
  EquationSet set_;
  bool box_;
  // Batched copies of reference data; padding lanes replicate lane 0.
  std::vector<double> b_rho0_, b_theta0_, b_p0_, b_big_theta0_, b_inv_r_;
  std::vector<double> b_grad_rho0_[3], b_grad_theta0_[3], b_up_[3];
  std::vector<int> wall_offsets_, wall_index_;
  mutable OpCounters counters_;
  std::uint64_t flops_gradient_ = 0, flops_divergence_ = 0, flops_vertical_ = 0;
  std::uint64_t flops_rhs_ = 0;
  mutable std::vector<double> scratch_;
};

}  // namespace dycore::euler
