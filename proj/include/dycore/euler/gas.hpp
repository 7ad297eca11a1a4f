#pragma once

namespace dycore::euler {

// Dry-air constants.
struct GasConstants {
  double cp = 1004.5;
  double cv = 717.5;
  double p_ref = 1.0e5;
  double gravity = 9.80616;

  double R() const { return cp - cv; }
  double gamma() const { return cp / cv; }
  // Throws ConfigError unless cp > cv > 0, p_ref > 0 and gravity >= 0.
  void validate() const;
};

// Full pressure P = p_ref (rho R theta / p_ref)^gamma. Throws for nonpositive inputs.
double equation_of_state(double rho, double theta, const GasConstants& gas);

}  // namespace dycore::euler
