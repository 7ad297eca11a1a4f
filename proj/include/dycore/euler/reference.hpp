#pragma once

#include <vector>

#include "dycore/common.hpp"
#include "dycore/euler/gas.hpp"
#include "dycore/euler/state.hpp"
#include "dycore/specgrid/discretization.hpp"

namespace dycore::euler {

// Background potential temperature profile theta0(h).
struct BackgroundProfile {
  double theta_surface = 300.0;
  double brunt_vaisala = 0.0;  // N in 1/s; zero gives constant theta
};

// Hydrostatic background on the dofs of a discretization. All fields are analytic
// functions of height, so the background is balanced to round-off.
class ReferenceState {
 public:
  ReferenceState(const specgrid::Discretization& disc, const BackgroundProfile& profile, const GasConstants& gas);

  const GasConstants& gas() const { return gas_; }
  const BackgroundProfile& profile() const { return profile_; }
  int num_dofs() const { return static_cast<int>(rho0.size()); }

  // Per dof.
  std::vector<double> rho0, theta0, p0, exner;
  std::vector<Vec3> up;          // unit vertical direction; gravity acts along -up
  std::vector<Vec3> grad_rho0, grad_theta0;
  std::vector<double> inv_radius;  // 1/r on the sphere, 0 on boxes
  // Linearization coefficients of the non-conservative set.
  std::vector<double> g0_nc, h0_nc;  // gamma P0 / rho0, gamma P0 / theta0
  std::vector<Vec3> f0_nc;            // g0 grad rho0 + h0 grad theta0
  // Conservative set: P' = f0_c Theta', g0_c = Theta0 / rho0 = theta0.
  std::vector<double> f0_c, g0_c;
  std::vector<double> sound_speed;    // sqrt(gamma P0 / rho0)

  // Background value of the fifth prognostic variable (theta0 or rho0 theta0).
  double theta_background(EquationSet set, int dof) const { return set == EquationSet::kSet2NC ? theta0[dof] : rho0[dof] * theta0[dof]; }

 private:
  GasConstants gas_;
  BackgroundProfile profile_;
};

// Constant potential temperature theta_bg. Throws if the Exner function reaches zero.
ReferenceState hydrostatic_reference(const specgrid::Discretization& disc, double theta_bg, const GasConstants& gas);

// Profile values at height h: theta0, d theta0/dh, Exner pi.
void background_at(const BackgroundProfile& profile, const GasConstants& gas, double h, double& theta, double& dtheta,
                   double& exner);

}  // namespace dycore::euler
