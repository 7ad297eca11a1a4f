#include "dycore/euler/reference.hpp"

#include <cmath>

namespace dycore::euler {

void background_at(const BackgroundProfile& profile, const GasConstants& gas, double h, double& theta, double& dtheta,
                   double& exner) {
  const double g = gas.gravity, ts = profile.theta_surface;
  const double n2 = profile.brunt_vaisala * profile.brunt_vaisala;
  if (n2 == 0.0) {
    theta = ts;
    dtheta = 0.0;
    exner = 1.0 - g * h / (gas.cp * ts);
  } else {
    theta = ts * std::exp(n2 * h / g);
    dtheta = theta * n2 / g;
    exner = 1.0 + g * g / (gas.cp * ts * n2) * std::expm1(-n2 * h / g);
  }
}

ReferenceState::ReferenceState(const specgrid::Discretization& disc, const BackgroundProfile& profile,
                               const GasConstants& gas)
    : gas_(gas), profile_(profile) {
  gas.validate();
  if (!(profile.theta_surface > 0.0)) throw ConfigError("background potential temperature must be positive");
  const int n = disc.num_dofs();
  rho0.resize(n);
  theta0.resize(n);
  p0.resize(n);
  exner.resize(n);
  up = disc.vertical();
  grad_rho0.resize(n);
  grad_theta0.resize(n);
  inv_radius.assign(n, 0.0);
  g0_nc.resize(n);
  h0_nc.resize(n);
  f0_nc.resize(n);
  f0_c.resize(n);
  g0_c.resize(n);
  sound_speed.resize(n);
  const double R = gas.R(), gamma = gas.gamma();
  for (int i = 0; i < n; ++i) {
    const double h = disc.height()[i];
    double th, dth, pi;
    background_at(profile, gas, h, th, dth, pi);
    if (!(pi > 0.0)) throw ConfigError("domain too tall for the background state: Exner function reaches zero");
    const double dpi = -gas.gravity / (gas.cp * th);
    const double pcv = std::pow(pi, gas.cv / R);
    theta0[i] = th;
    exner[i] = pi;
    p0[i] = gas.p_ref * std::pow(pi, gas.cp / R);
    rho0[i] = gas.p_ref * pcv / (R * th);
    const double drho =
        gas.p_ref / R * ((gas.cv / R) * std::pow(pi, gas.cv / R - 1.0) * dpi / th - pcv * dth / (th * th));
    grad_rho0[i] = scale3(up[i], drho);
    grad_theta0[i] = scale3(up[i], dth);
    if (disc.mesh().topology == specgrid::Topology::kCubedSphere) inv_radius[i] = 1.0 / norm3(disc.dofs().coords[i]);
    g0_nc[i] = gamma * p0[i] / rho0[i];
    h0_nc[i] = gamma * p0[i] / theta0[i];
    f0_nc[i] = add3(scale3(grad_rho0[i], g0_nc[i]), scale3(grad_theta0[i], h0_nc[i]));
    f0_c[i] = gamma * p0[i] / (rho0[i] * theta0[i]);
    g0_c[i] = theta0[i];
    sound_speed[i] = std::sqrt(gamma * p0[i] / rho0[i]);
  }
}

ReferenceState hydrostatic_reference(const specgrid::Discretization& disc, double theta_bg, const GasConstants& gas) {
  BackgroundProfile p;
  p.theta_surface = theta_bg;
  return ReferenceState(disc, p, gas);
}

}  // namespace dycore::euler
