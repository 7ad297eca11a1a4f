#pragma once

#include <span>
#include <vector>

namespace dycore::euler {

enum class EquationSet {
  kSet2NC,  // (rho', u, v, w, theta')
  kSet2C,   // (rho', U, V, W, Theta') with U = rho u, Theta = rho theta
};

inline constexpr int kNumFields = 5;
enum Field : int { kRho = 0, kMomX = 1, kMomY = 2, kMomZ = 3, kTheta = 4 };

// Perturbation fields stored field-major: data[field * num_dofs + dof].
struct State {
  EquationSet set = EquationSet::kSet2NC;
  int num_dofs = 0;
  std::vector<double> data;

  State() = default;
  State(EquationSet s, int n) : set(s), num_dofs(n), data(static_cast<std::size_t>(kNumFields) * n, 0.0) {}

  double* field(int f) { return data.data() + static_cast<std::size_t>(f) * num_dofs; }
  const double* field(int f) const { return data.data() + static_cast<std::size_t>(f) * num_dofs; }
  std::span<double> span() { return data; }
  std::span<const double> span() const { return data; }
  std::size_t size() const { return data.size(); }
};

}  // namespace dycore::euler
