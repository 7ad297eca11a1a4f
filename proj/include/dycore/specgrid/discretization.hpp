#pragma once

#include <array>
#include <span>
#include <vector>

#include "dycore/specgrid/mesh.hpp"
#include "dycore/specgrid/metrics.hpp"

namespace dycore::specgrid {

enum class Galerkin { kContinuous, kDiscontinuous };

// Numbering of the degrees of freedom. Columns are contiguous: column c owns
// dofs [c * levels_per_column, (c + 1) * levels_per_column), ordered bottom to top.
struct DofMap {
  Galerkin kind = Galerkin::kContinuous;
  int num_dofs = 0;
  int num_columns = 0;
  int levels_per_column = 0;
  std::vector<int> local_to_dof;  // per local node (element-major)
  std::vector<Vec3> coords;       // per dof

  int column_of(int dof) const { return dof / levels_per_column; }
  int level_of(int dof) const { return dof % levels_per_column; }
};

DofMap build_dof_map(const ElementMesh& mesh, Galerkin kind);

// Assembly lists: for each dof, the local nodes (element-major) that coincide with it.
struct DssMap {
  std::vector<int> offsets;  // num_dofs + 1
  std::vector<int> entries;
  std::vector<int> multiplicity;
  std::vector<double> mass;      // assembled diagonal mass
  std::vector<double> inv_mass;
};

DssMap build_dss_map(const ElementMesh& mesh, const MetricTerms& metrics, const DofMap& dofs);

// Replaces the values at coincident local nodes by their mass-weighted average.
void apply_dss(std::span<double> local_field, const DssMap& map, const MetricTerms& metrics);

// Per-dof rotation into (zonal, meridional, radial) components; identity on box meshes.
struct RotationField {
  std::vector<std::array<double, 9>> matrix;  // row-major, rows are the local unit vectors

  Vec3 to_local(int dof, const Vec3& v) const;
  Vec3 to_cartesian(int dof, const Vec3& v) const;
};

RotationField build_rotation_matrices(const ElementMesh& mesh, const DofMap& dofs);

// A wall constraint: the velocity component along `normal` vanishes at `dof`.
struct WallConstraint {
  int dof;
  Vec3 normal;
};

// Mesh, metrics and numbering bundled in the element-batched layout used by the
// operator kernels: local index (element e, node n) lives at
// ((e / kLanes) * npe + n) * kLanes + e % kLanes.
class Discretization {
 public:
  Discretization(ElementMesh mesh, Galerkin kind);

  const ElementMesh& mesh() const { return mesh_; }
  const MetricTerms& metrics() const { return metrics_; }
  const DofMap& dofs() const { return dofs_; }
  const DssMap& dss() const { return dss_; }
  const RotationField& rotations() const { return rotations_; }
  Galerkin kind() const { return kind_; }
  bool continuous() const { return kind_ == Galerkin::kContinuous; }

  int num_dofs() const { return dofs_.num_dofs; }
  int num_batches() const { return num_batches_; }
  int nodes_per_element() const { return mesh_.nodes_per_element(); }
  std::size_t batch_size() const { return static_cast<std::size_t>(nodes_per_element()) * simd::kLanes; }
  std::size_t local_size() const { return batch_size() * num_batches_; }
  std::size_t batched_index(int element, int node) const {
    return (static_cast<std::size_t>(element / simd::kLanes) * nodes_per_element() + node) * simd::kLanes +
           element % simd::kLanes;
  }

  // Batched geometry (padding lanes replicate a real element).
  const double* contravariant(int i, int k) const { return ja_[i * 3 + k].data(); }  // J grad(xi_i)_k
  const double* gradient_metric(int i, int k) const { return gm_[i * 3 + k].data(); }  // d xi_i / d x_k
  const double* inv_jacobian() const { return inv_j_.data(); }
  const double* vertical_scale() const { return vscale_.data(); }
  const int* batched_dof() const { return bdof_.data(); }  // -1 for padding lanes
  const double* dr() const { return mesh_.quad[0].derivative.data(); }
  const double* ds() const { return mesh_.quad[1].derivative.data(); }
  const double* dt() const { return mesh_.quad[2].derivative.data(); }

  // local[b] = dof_field[dof(b)], zero on padding lanes.
  void gather(const double* dof_field, double* local) const;
  // dof_out[g] = inv_mass[g] * sum of weighted_local over the nodes of g.
  // The caller supplies mass-weighted element values.
  void assemble(const double* weighted_local, double* dof_out) const;
  // Mass weight of each batched node (w J); zero on padding lanes.
  const double* batched_mass() const { return bmass_.data(); }

  // Face nodes in batched indexing, grouped by batch.
  struct Face {
    int self;    // batched index of the interior node
    int other;   // batched index of the exterior node, -1 on walls
    FaceTag tag;
    int face;
    Vec3 normal;
    double area;
  };
  const std::vector<Face>& faces() const { return faces_; }
  const std::vector<int>& face_offsets() const { return face_offsets_; }  // per batch

  // Wall constraints for continuous discretizations.
  const std::vector<WallConstraint>& walls() const { return walls_; }
  // Unit vertical direction per dof (z on box meshes, radial on the sphere).
  const std::vector<Vec3>& vertical() const { return vertical_; }
  // Height above the bottom surface per dof.
  const std::vector<double>& height() const { return height_; }

 private:
  ElementMesh mesh_;
  Galerkin kind_;
  MetricTerms metrics_;
  DofMap dofs_;
  DssMap dss_;
  RotationField rotations_;
  int num_batches_ = 0;
  std::array<std::vector<double>, 9> ja_, gm_;
  std::vector<double> inv_j_, vscale_, bmass_;
  std::vector<int> bdof_;
  std::vector<int> dss_offsets_, dss_entries_;
  std::vector<Face> faces_;
  std::vector<int> face_offsets_;
  std::vector<WallConstraint> walls_;
  std::vector<Vec3> vertical_;
  std::vector<double> height_;
};

// One line per dof: `node_id column_id x y z`.
void write_mesh_dump(const Discretization& disc, std::ostream& out);

}  // namespace dycore::specgrid
