#pragma once

#include <vector>

#include "dycore/euler/operators.hpp"
#include "dycore/krylov/krylov.hpp"

namespace dycore::imexcore {

enum class ImplicitForm { kStandard, kSchur };
// Which part of the linear operator is implicit: all of it, or only the vertical part.
enum class ImplicitDim { k3D, k1D };

// The linear implicit system q_tt - lambda L(q_tt) = q_tt_e of one stage, in standard
// form (all five fields) or reduced to a pressure Helmholtz problem (Schur form).
//
// With wall constraints the vertical direction entering the buoyancy coupling is the
// wall-projected one, so both forms describe exactly the same discrete system.
class ImplicitProblem {
 public:
  ImplicitProblem(const euler::EulerOperators& ops, ImplicitForm form, ImplicitDim dim);

  const euler::EulerOperators& ops() const { return ops_; }
  ImplicitForm form() const { return form_; }
  ImplicitDim dim() const { return dim_; }
  euler::Restriction restriction() const {
    return dim_ == ImplicitDim::k1D ? euler::Restriction::kVertical : euler::Restriction::kFull;
  }
  int num_dofs() const { return ops_.num_dofs(); }
  // Unknowns per dof of the solved system: 5 (standard) or 1 (Schur).
  int fields() const { return form_ == ImplicitForm::kSchur ? 1 : euler::kNumFields; }
  int system_size() const { return fields() * num_dofs(); }

  void set_lambda(double lambda);
  double lambda() const { return lambda_; }

  // (I - lambda L) q.
  void lhs_standard_apply(const euler::State& q, euler::State& out) const;
  // Adds the implicit surface contribution lambda * lift * (n.F* - n.F-) (discontinuous only).
  void dg_surface_lhs(const euler::State& q, euler::State& out) const;

  // Pressure right-hand side of the Helmholtz problem; keeps the velocity part for extraction.
  void rhs_schur_build(const euler::State& q_tt_e, double* rhs);
  void lhs_schur_apply(const double* p, double* out) const;
  // Recovers all fields from the pressure solution and the stored estimate.
  void extract_from_pressure(const double* p, const euler::State& q_tt_e, euler::State& q_tt) const;

  // Rank-one inverse (I + beta a b^T)^{-1} v at one dof for the current lambda.
  Vec3 apply_a_inverse(int dof, const Vec3& v) const;

  // Matrix-free operator of the solved system (standard or Schur).
  krylov::LinearMap lhs_map() const;

 private:
  // u_p (Set2NC) or U_p (Set2C) for pressure p, written to the three velocity arrays.
  void pressure_velocity(const double* p, double* vx, double* vy, double* vz) const;
  // Helmholtz operator part: p + lambda * (coupling of the velocity field).
  void helmholtz_coupling(const double* vx, const double* vy, const double* vz, double* out) const;

  const euler::EulerOperators& ops_;
  const euler::ReferenceState& ref_;
  ImplicitForm form_;
  ImplicitDim dim_;
  double lambda_ = 0.0;
  std::vector<Vec3> wall_up_;  // wall-projected vertical direction
  mutable std::vector<double> va_[3];
  mutable std::vector<double> work_[5];
  mutable euler::State tmp_in_, tmp_out_;
};

}  // namespace dycore::imexcore
