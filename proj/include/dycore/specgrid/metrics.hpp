#pragma once

#include <array>
#include <vector>

#include "dycore/specgrid/mesh.hpp"

namespace dycore::specgrid {

// Geometry of one face node.
struct FaceNodeGeometry {
  int element = 0;
  int face = 0;
  int node = 0;               // node index inside the element
  int neighbor_element = -1;  // -1 on a boundary
  int neighbor_node = -1;
  FaceTag tag = FaceTag::kInterior;
  Vec3 normal{0, 0, 0};       // outward unit normal
  double area = 0.0;          // surface quadrature weight times surface Jacobian
  double lift = 0.0;          // area / (volume quadrature weight times J)
};

struct MetricTerms {
  // Per local node (element-major).
  std::vector<double> jacobian;
  // [i * 3 + k] = d xi_i / d x_k in 1/m; exact inverse of the interpolated map, used for gradients.
  std::vector<std::array<double, 9>> dxi_dx;
  // [i * 3 + k] = (J grad xi_i)_k in curl-invariant form, used for divergences and face normals
  // so that constant fields have zero discrete divergence on curved elements.
  std::vector<std::array<double, 9>> contravariant_curl;
  std::vector<double> vertical_scale;         // 1 / |dx/dt|, converts d/dt to d/dh
  std::vector<double> mass;                   // quadrature weight times J
  // Face nodes grouped by element; face_offsets has num_elements + 1 entries.
  std::vector<FaceNodeGeometry> face_nodes;
  std::vector<int> face_offsets;
  double min_spacing_horizontal = 0.0;
  double min_spacing_vertical = 0.0;

  double contravariant(std::size_t local, int i, int k) const { return contravariant_curl[local][i * 3 + k]; }
};

// Metric terms in curl-invariant form (cross-product form when a direction is collapsed).
// Throws with the element id when an element has nonpositive volume.
MetricTerms compute_metrics(const ElementMesh& mesh);

// Derivative of a nodal field along one reference axis of a single element.
void element_derivative(const ElementMesh& mesh, int axis, const double* in, double* out);

}  // namespace dycore::specgrid
