#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "dycore/common.hpp"
#include "dycore/simd/kernels.hpp"
#include "dycore/specgrid/quadrature.hpp"

namespace dycore::specgrid {

enum class Topology { kBox, kCubedSphere };

enum class FaceTag : std::uint8_t { kInterior, kBottom, kTop, kLateral, kCollapsed };

// Faces are numbered 0/1 for r = -1/+1, 2/3 for s = -1/+1, 4 (bottom) and 5 (top) for t = -1/+1.
inline constexpr int kFacesPerElement = 6;

struct FaceLink {
  FaceTag tag = FaceTag::kInterior;
  int neighbor = -1;
  int neighbor_face = -1;
  // trace[a] = node index inside the neighbor that coincides with face node a.
  std::vector<int> trace;
};

// Hexahedral spectral elements. The t direction is always vertical (radial) and
// elements are stored column by column: element = horizontal_element * ne_vert + v.
struct ElementMesh {
  Topology topology = Topology::kBox;
  int order = 1;
  std::array<Quadrature1D, 3> quad;
  simd::TensorShape shape;
  int num_elements = 0;
  int num_horizontal_elements = 0;
  int num_vertical_elements = 0;

  double extent_x = 0.0, extent_z = 0.0;             // box
  double inner_radius = 0.0, shell_depth = 0.0;      // cubed sphere
  Vec3 collapsed_axis{0.0, 0.0, 0.0};                // dx/ds for a single-node s direction

  // Per local node, index = element * nodes_per_element + node.
  std::vector<Vec3> coords;
  std::vector<int> horizontal_id;  // shared by nodes on the same vertical line
  std::vector<int> level;          // 0 at the bottom surface
  int num_horizontal_points = 0;
  int levels_per_column = 0;       // continuous levels: ne_vert * N + 1

  std::vector<std::array<FaceLink, kFacesPerElement>> faces;

  int nodes_per_element() const { return shape.size(); }
  std::size_t local_index(int element, int node) const {
    return static_cast<std::size_t>(element) * shape.size() + node;
  }
  // Identifier of the continuous node a local node belongs to.
  int continuous_id(std::size_t local) const { return horizontal_id[local] * levels_per_column + level[local]; }
  int num_continuous_nodes() const { return num_horizontal_points * levels_per_column; }
};

// Node indices of one element face, ordered with the lower remaining axis fastest.
std::vector<int> face_nodes(const simd::TensorShape& shape, int face);

// Box in the x-z plane, one element thick in y (single node, 1 m).
ElementMesh build_box_mesh(int nx, int nz, double lx, double lz, int order);

// Equiangular gnomonic cubed-sphere shell between radius r_e and r_e + r_t.
ElementMesh build_cubed_sphere_mesh(int ne_panel, int ne_vert, double r_e, double r_t, int order);

// Cubed-sphere panel frame: center direction and the two tangent axes.
struct PanelFrame {
  Vec3 center, e1, e2;
};
const std::array<PanelFrame, 6>& cubed_sphere_panels();

}  // namespace dycore::specgrid
