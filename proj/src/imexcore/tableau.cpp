#include "dycore/imexcore/tableau.hpp"

#include <cmath>
#include <string>

#include "dycore/common.hpp"

namespace dycore::imexcore {

void ButcherPair::validate(double tol) const {
  const auto n = static_cast<std::size_t>(stages);
  if (stages < 1 || a.size() != n * n || at.size() != n * n || b.size() != n || bt.size() != n || c.size() != n ||
      ct.size() != n)
    throw ConfigError("tableau has inconsistent sizes");
  double sb = 0.0;
  for (int i = 0; i < stages; ++i) {
    double se = 0.0, si = 0.0;
    for (int j = 0; j < stages; ++j) {
      se += ae(i, j);
      si += ai(i, j);
      if (j >= i && ae(i, j) != 0.0) throw ConfigError("explicit tableau is not strictly lower triangular");
      if (j > i && ai(i, j) != 0.0) throw ConfigError("implicit tableau is not lower triangular");
    }
    if (std::fabs(se - c[i]) > tol || std::fabs(si - ct[i]) > tol)
      throw ConfigError("tableau row sums differ from the abscissae in row " + std::to_string(i));
    if (std::fabs(b[i] - bt[i]) > tol) throw ConfigError("explicit and implicit weights differ");
    if (i >= 1 && ai(i, i) != 0.0 && std::fabs(ai(i, i) - diagonal) > tol)
      throw ConfigError("implicit diagonal is not constant");
    sb += b[i];
  }
  if (std::fabs(sb - 1.0) > tol) throw ConfigError("tableau weights do not sum to one");
}

ButcherPair ButcherPair::ark2() {
  const double r2 = std::sqrt(2.0);
  const double d = 1.0 - 1.0 / r2;
  const double a32 = (3.0 + 2.0 * r2) / 6.0;
  const double w = 1.0 / (2.0 * r2);
  ButcherPair p;
  p.stages = 3;
  p.c = {0.0, 2.0 - r2, 1.0};
  p.ct = p.c;
  p.a = {0.0, 0.0, 0.0,  //
         2.0 - r2, 0.0, 0.0,  //
         1.0 - a32, a32, 0.0};
  // Weights with the signs that satisfy sum(b) = 1; the implicit tableau is stiffly accurate.
  p.at = {0.0, 0.0, 0.0,  //
          d, d, 0.0,      //
          w, w, d};
  p.b = {w, w, d};
  p.bt = p.b;
  p.diagonal = d;
  return p;
}

}  // namespace dycore::imexcore
