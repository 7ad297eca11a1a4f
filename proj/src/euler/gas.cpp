#include "dycore/euler/gas.hpp"

#include <cmath>

#include "dycore/common.hpp"

namespace dycore::euler {

void GasConstants::validate() const {
  if (!(cv > 0.0) || !(cp > cv)) throw ConfigError("gas constants need cp > cv > 0");
  if (!(p_ref > 0.0)) throw ConfigError("reference pressure must be positive");
  if (!(gravity >= 0.0)) throw ConfigError("gravity must be nonnegative");
}

double equation_of_state(double rho, double theta, const GasConstants& gas) {
  if (!(rho > 0.0) || !(theta > 0.0)) throw Error("equation of state needs positive density and potential temperature");
  return gas.p_ref * std::pow(rho * gas.R() * theta / gas.p_ref, gas.gamma());
}

}  // namespace dycore::euler
