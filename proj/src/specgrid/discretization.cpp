#include "dycore/specgrid/discretization.hpp"

#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>
#include <set>

namespace dycore::specgrid {

DofMap build_dof_map(const ElementMesh& mesh, Galerkin kind) {
  DofMap d;
  d.kind = kind;
  const int npe = mesh.nodes_per_element();
  const std::size_t total = static_cast<std::size_t>(mesh.num_elements) * npe;
  d.local_to_dof.resize(total);
  const auto& sh = mesh.shape;
  if (kind == Galerkin::kContinuous) {
    d.levels_per_column = mesh.levels_per_column;
    d.num_columns = mesh.num_horizontal_points;
    for (std::size_t l = 0; l < total; ++l) d.local_to_dof[l] = mesh.continuous_id(l);
  } else {
    d.levels_per_column = mesh.num_vertical_elements * sh.nt;
    d.num_columns = mesh.num_horizontal_elements * sh.nr * sh.ns;
    for (int e = 0; e < mesh.num_elements; ++e) {
      const int h = e / mesh.num_vertical_elements, v = e % mesh.num_vertical_elements;
      for (int k = 0; k < sh.nt; ++k)
        for (int j = 0; j < sh.ns; ++j)
          for (int i = 0; i < sh.nr; ++i) {
            const int col = h * sh.nr * sh.ns + i + sh.nr * j;
            d.local_to_dof[mesh.local_index(e, i + sh.nr * (j + sh.ns * k))] =
                col * d.levels_per_column + v * sh.nt + k;
          }
    }
  }
  d.num_dofs = d.num_columns * d.levels_per_column;
  d.coords.assign(d.num_dofs, Vec3{0, 0, 0});
  std::vector<char> seen(d.num_dofs, 0);
  for (std::size_t l = 0; l < total; ++l) {
    const int g = d.local_to_dof[l];
    if (!seen[g]) d.coords[g] = mesh.coords[l];
    seen[g] = 1;
  }
  for (char s : seen)
    if (!s) throw Error("dof numbering leaves unreferenced degrees of freedom");
  return d;
}

DssMap build_dss_map(const ElementMesh& mesh, const MetricTerms& metrics, const DofMap& dofs) {
  if (dofs.local_to_dof.size() != metrics.mass.size() ||
      dofs.local_to_dof.size() != static_cast<std::size_t>(mesh.num_elements) * mesh.nodes_per_element())
    throw Error("assembly map does not match the mesh");
  DssMap m;
  m.multiplicity.assign(dofs.num_dofs, 0);
  for (int g : dofs.local_to_dof) ++m.multiplicity[g];
  m.offsets.assign(dofs.num_dofs + 1, 0);
  for (int g = 0; g < dofs.num_dofs; ++g) m.offsets[g + 1] = m.offsets[g] + m.multiplicity[g];
  m.entries.resize(dofs.local_to_dof.size());
  std::vector<int> fill(m.offsets.begin(), m.offsets.end() - 1);
  for (std::size_t l = 0; l < dofs.local_to_dof.size(); ++l)
    m.entries[fill[dofs.local_to_dof[l]]++] = static_cast<int>(l);
  m.mass.assign(dofs.num_dofs, 0.0);
  m.inv_mass.resize(dofs.num_dofs);
  for (int g = 0; g < dofs.num_dofs; ++g) {
    for (int p = m.offsets[g]; p < m.offsets[g + 1]; ++p) m.mass[g] += metrics.mass[m.entries[p]];
    m.inv_mass[g] = 1.0 / m.mass[g];
  }
  return m;
}

void apply_dss(std::span<double> local_field, const DssMap& map, const MetricTerms& metrics) {
  if (local_field.size() != map.entries.size()) throw Error("field size does not match the assembly map");
  const int ndofs = static_cast<int>(map.mass.size());
#pragma omp parallel for schedule(static)
  for (int g = 0; g < ndofs; ++g) {
    double s = 0.0;
    for (int p = map.offsets[g]; p < map.offsets[g + 1]; ++p) s += metrics.mass[map.entries[p]] * local_field[map.entries[p]];
    const double avg = s * map.inv_mass[g];
    for (int p = map.offsets[g]; p < map.offsets[g + 1]; ++p) local_field[map.entries[p]] = avg;
  }
}

Vec3 RotationField::to_local(int dof, const Vec3& v) const {
  const auto& a = matrix[dof];
  return {a[0] * v[0] + a[1] * v[1] + a[2] * v[2], a[3] * v[0] + a[4] * v[1] + a[5] * v[2],
          a[6] * v[0] + a[7] * v[1] + a[8] * v[2]};
}

Vec3 RotationField::to_cartesian(int dof, const Vec3& v) const {
  const auto& a = matrix[dof];
  return {a[0] * v[0] + a[3] * v[1] + a[6] * v[2], a[1] * v[0] + a[4] * v[1] + a[7] * v[2],
          a[2] * v[0] + a[5] * v[1] + a[8] * v[2]};
}

RotationField build_rotation_matrices(const ElementMesh& mesh, const DofMap& dofs) {
  RotationField rf;
  rf.matrix.resize(dofs.num_dofs);
  for (int g = 0; g < dofs.num_dofs; ++g) {
    if (mesh.topology == Topology::kBox) {
      rf.matrix[g] = {1, 0, 0, 0, 1, 0, 0, 0, 1};
      continue;
    }
    const Vec3& p = dofs.coords[g];
    const double r = norm3(p);
    if (!(r > 0.0)) throw Error("rotation requested for a node at the origin");
    const double lon = std::atan2(p[1], p[0]);
    const double lat = std::atan2(p[2], std::hypot(p[0], p[1]));
    const double sl = std::sin(lon), cl = std::cos(lon), sp = std::sin(lat), cp = std::cos(lat);
    rf.matrix[g] = {-sl, cl, 0.0, -sp * cl, -sp * sl, cp, cp * cl, cp * sl, sp};
  }
  return rf;
}

Discretization::Discretization(ElementMesh mesh, Galerkin kind)
    : mesh_(std::move(mesh)), kind_(kind), metrics_(compute_metrics(mesh_)), dofs_(build_dof_map(mesh_, kind)),
      dss_(build_dss_map(mesh_, metrics_, dofs_)), rotations_(build_rotation_matrices(mesh_, dofs_)) {
  constexpr int W = simd::kLanes;
  const int ne = mesh_.num_elements, npe = nodes_per_element();
  num_batches_ = (ne + W - 1) / W;
  const std::size_t n = local_size();
  for (auto& v : ja_) v.resize(n);
  for (auto& v : gm_) v.resize(n);
  inv_j_.resize(n);
  vscale_.resize(n);
  bmass_.resize(n);
  bdof_.resize(n);
  for (int b = 0; b < num_batches_; ++b)
    for (int lane = 0; lane < W; ++lane) {
      const int e = b * W + lane;
      const bool real = e < ne;
      const int src = real ? e : b * W;
      for (int node = 0; node < npe; ++node) {
        const std::size_t at = (static_cast<std::size_t>(b) * npe + node) * W + lane;
        const std::size_t l = mesh_.local_index(src, node);
        for (int i = 0; i < 3; ++i)
          for (int k = 0; k < 3; ++k) {
            ja_[i * 3 + k][at] = metrics_.contravariant(l, i, k);
            gm_[i * 3 + k][at] = metrics_.dxi_dx[l][i * 3 + k];
          }
        inv_j_[at] = 1.0 / metrics_.jacobian[l];
        vscale_[at] = metrics_.vertical_scale[l];
        bmass_[at] = real ? metrics_.mass[l] : 0.0;
        bdof_[at] = real ? dofs_.local_to_dof[l] : -1;
      }
    }
  dss_offsets_ = dss_.offsets;
  dss_entries_.resize(dss_.entries.size());
  for (std::size_t p = 0; p < dss_.entries.size(); ++p) {
    const int l = dss_.entries[p];
    dss_entries_[p] = static_cast<int>(batched_index(l / npe, l % npe));
  }

  face_offsets_.assign(num_batches_ + 1, 0);
  for (int b = 0; b < num_batches_; ++b) {
    for (int lane = 0; lane < W; ++lane) {
      const int e = b * W + lane;
      if (e >= ne) continue;
      for (int p = metrics_.face_offsets[e]; p < metrics_.face_offsets[e + 1]; ++p) {
        const FaceNodeGeometry& g = metrics_.face_nodes[p];
        Face f;
        f.self = static_cast<int>(batched_index(e, g.node));
        f.other = g.neighbor_element >= 0 ? static_cast<int>(batched_index(g.neighbor_element, g.neighbor_node)) : -1;
        f.tag = g.tag;
        f.face = g.face;
        f.normal = g.normal;
        f.area = g.area;
        faces_.push_back(f);
      }
    }
    face_offsets_[b + 1] = static_cast<int>(faces_.size());
  }

  vertical_.resize(dofs_.num_dofs);
  height_.resize(dofs_.num_dofs);
  for (int g = 0; g < dofs_.num_dofs; ++g) {
    const Vec3& p = dofs_.coords[g];
    if (mesh_.topology == Topology::kBox) {
      vertical_[g] = {0.0, 0.0, 1.0};
      height_[g] = p[2];
    } else {
      const double r = norm3(p);
      vertical_[g] = scale3(p, 1.0 / r);
      height_[g] = r - mesh_.inner_radius;
    }
  }

  // Walls: vertical normal on bottom/top, face normal on lateral faces. One entry per dof and class.
  std::set<std::pair<int, int>> seen;
  for (const FaceNodeGeometry& g : metrics_.face_nodes) {
    if (g.tag == FaceTag::kInterior || g.tag == FaceTag::kCollapsed) continue;
    const int dof = dofs_.local_to_dof[mesh_.local_index(g.element, g.node)];
    const int cls = (g.tag == FaceTag::kLateral) ? 1 : 0;
    if (!seen.insert({dof, cls}).second) continue;
    walls_.push_back({dof, cls == 0 ? vertical_[dof] : g.normal});
  }
}

void Discretization::gather(const double* dof_field, double* local) const {
  const std::size_t n = local_size();
  const int* bd = bdof_.data();
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < n; ++i) local[i] = bd[i] >= 0 ? dof_field[bd[i]] : 0.0;
}

void Discretization::assemble(const double* weighted_local, double* dof_out) const {
  const int ndofs = dofs_.num_dofs;
  const int* off = dss_offsets_.data();
  const int* ent = dss_entries_.data();
  const double* im = dss_.inv_mass.data();
#pragma omp parallel for schedule(static)
  for (int g = 0; g < ndofs; ++g) {
    double s = 0.0;
    for (int p = off[g]; p < off[g + 1]; ++p) s += weighted_local[ent[p]];
    dof_out[g] = s * im[g];
  }
}

void write_mesh_dump(const Discretization& disc, std::ostream& out) {
  const DofMap& d = disc.dofs();
  char buf[160];
  for (int g = 0; g < d.num_dofs; ++g) {
    const Vec3& p = d.coords[g];
    std::snprintf(buf, sizeof buf, "%d %d %.10e %.10e %.10e\n", g, d.column_of(g), p[0], p[1], p[2]);
    out << buf;
  }
}

}  // namespace dycore::specgrid
