#include "dycore/specgrid/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace dycore::specgrid {

void element_derivative(const ElementMesh& mesh, int axis, const double* in, double* out) {
  const auto& sh = mesh.shape;
  const int n[3] = {sh.nr, sh.ns, sh.nt};
  const Quadrature1D& q = mesh.quad[axis];
  for (int k = 0; k < sh.nt; ++k)
    for (int j = 0; j < sh.ns; ++j)
      for (int i = 0; i < sh.nr; ++i) {
        int idx[3] = {i, j, k};
        const int row = idx[axis];
        double acc = 0.0;
        for (int m = 0; m < n[axis]; ++m) {
          idx[axis] = m;
          acc += q.d(row, m) * in[idx[0] + sh.nr * (idx[1] + sh.ns * idx[2])];
        }
        out[i + sh.nr * (j + sh.ns * k)] = acc;
      }
}

MetricTerms compute_metrics(const ElementMesh& mesh) {
  const auto& sh = mesh.shape;
  const int npe = sh.size();
  const bool collapsed = sh.nr == 1 || sh.ns == 1 || sh.nt == 1;
  if (sh.nr == 1 || sh.nt == 1) throw Error("only the s direction may be collapsed");
  MetricTerms mt;
  const std::size_t total = static_cast<std::size_t>(mesh.num_elements) * npe;
  mt.jacobian.resize(total);
  mt.dxi_dx.resize(total);
  mt.contravariant_curl.resize(total);
  mt.vertical_scale.resize(total);
  mt.mass.resize(total);
  mt.min_spacing_horizontal = std::numeric_limits<double>::infinity();
  mt.min_spacing_vertical = std::numeric_limits<double>::infinity();

  std::vector<double> X[3], dX[3][3], tmp(npe), prod(npe), curl(npe);
  for (auto& v : X) v.resize(npe);
  for (auto& row : dX)
    for (auto& v : row) v.resize(npe);
  std::vector<std::array<Vec3, 3>> ja(npe);  // ja[node][i] = J grad(xi_i)

  for (int e = 0; e < mesh.num_elements; ++e) {
    for (int n = 0; n < npe; ++n)
      for (int c = 0; c < 3; ++c) X[c][n] = mesh.coords[mesh.local_index(e, n)][c];
    // dX[axis][component]
    for (int axis = 0; axis < 3; ++axis)
      for (int c = 0; c < 3; ++c) {
        if (axis == 1 && sh.ns == 1) {
          std::fill(dX[axis][c].begin(), dX[axis][c].end(), mesh.collapsed_axis[c]);
        } else {
          element_derivative(mesh, axis, X[c].data(), dX[axis][c].data());
        }
      }
    const auto a = [&](int axis, int n) { return Vec3{dX[axis][0][n], dX[axis][1][n], dX[axis][2][n]}; };
    if (collapsed) {
      for (int n = 0; n < npe; ++n) {
        ja[n][0] = cross3(a(1, n), a(2, n));
        ja[n][1] = cross3(a(2, n), a(0, n));
        ja[n][2] = cross3(a(0, n), a(1, n));
      }
    } else {
      // (J grad xi_i)_c = -xhat_i . curl_xi(X_l grad_xi X_m), (c, m, l) cyclic.
      for (int c = 0; c < 3; ++c) {
        const int mm = (c + 1) % 3, ll = (c + 2) % 3;
        // V_axis = X_l * d X_m / d axis
        std::vector<double> V[3];
        for (int axis = 0; axis < 3; ++axis) {
          V[axis].resize(npe);
          for (int n = 0; n < npe; ++n) V[axis][n] = X[ll][n] * dX[axis][mm][n];
        }
        std::vector<double> dV(npe);
        for (int n = 0; n < npe; ++n)
          for (int i = 0; i < 3; ++i) ja[n][i][c] = 0.0;
        // curl components: r: d_s V_t - d_t V_s; s: d_t V_r - d_r V_t; t: d_r V_s - d_s V_r
        const int terms[3][2][2] = {{{1, 2}, {2, 1}}, {{2, 0}, {0, 2}}, {{0, 1}, {1, 0}}};
        for (int i = 0; i < 3; ++i) {
          element_derivative(mesh, terms[i][0][0], V[terms[i][0][1]].data(), tmp.data());
          element_derivative(mesh, terms[i][1][0], V[terms[i][1][1]].data(), dV.data());
          for (int n = 0; n < npe; ++n) ja[n][i][c] = -(tmp[n] - dV[n]);
        }
      }
    }
    for (int k = 0; k < sh.nt; ++k)
      for (int j = 0; j < sh.ns; ++j)
        for (int i = 0; i < sh.nr; ++i) {
          const int n = i + sh.nr * (j + sh.ns * k);
          const std::size_t l = mesh.local_index(e, n);
          const double jac = dot3(a(0, n), cross3(a(1, n), a(2, n)));
          if (!(jac > 0.0)) throw Error("element " + std::to_string(e) + " has nonpositive volume");
          mt.jacobian[l] = jac;
          const Vec3 cross_form[3] = {cross3(a(1, n), a(2, n)), cross3(a(2, n), a(0, n)), cross3(a(0, n), a(1, n))};
          for (int ii = 0; ii < 3; ++ii)
            for (int c = 0; c < 3; ++c) {
              mt.dxi_dx[l][ii * 3 + c] = cross_form[ii][c] / jac;
              mt.contravariant_curl[l][ii * 3 + c] = ja[n][ii][c];
            }
          mt.vertical_scale[l] = 1.0 / norm3(a(2, n));
          mt.mass[l] = mesh.quad[0].weights[i] * mesh.quad[1].weights[j] * mesh.quad[2].weights[k] * jac;
        }
    // Internodal spacing.
    for (int k = 0; k < sh.nt; ++k)
      for (int j = 0; j < sh.ns; ++j)
        for (int i = 0; i < sh.nr; ++i) {
          const auto& p = mesh.coords[mesh.local_index(e, i + sh.nr * (j + sh.ns * k))];
          if (i + 1 < sh.nr)
            mt.min_spacing_horizontal = std::min(
                mt.min_spacing_horizontal, norm3(sub3(mesh.coords[mesh.local_index(e, i + 1 + sh.nr * (j + sh.ns * k))], p)));
          if (j + 1 < sh.ns)
            mt.min_spacing_horizontal = std::min(
                mt.min_spacing_horizontal, norm3(sub3(mesh.coords[mesh.local_index(e, i + sh.nr * (j + 1 + sh.ns * k))], p)));
          if (k + 1 < sh.nt)
            mt.min_spacing_vertical = std::min(
                mt.min_spacing_vertical, norm3(sub3(mesh.coords[mesh.local_index(e, i + sh.nr * (j + sh.ns * (k + 1)))], p)));
        }
    // Faces.
    mt.face_offsets.push_back(static_cast<int>(mt.face_nodes.size()));
    for (int f = 0; f < kFacesPerElement; ++f) {
      const FaceLink& link = mesh.faces[e][f];
      if (link.tag == FaceTag::kCollapsed) continue;
      const int dir = f / 2;
      const double sign = (f % 2 == 0) ? -1.0 : 1.0;
      const auto nodes = face_nodes(sh, f);
      for (std::size_t a_idx = 0; a_idx < nodes.size(); ++a_idx) {
        const int n = nodes[a_idx];
        const int ijk[3] = {n % sh.nr, (n / sh.nr) % sh.ns, n / (sh.nr * sh.ns)};
        const Vec3 jv = ja[n][dir];
        const double mag = norm3(jv);
        double w_other = 1.0;
        for (int ax = 0; ax < 3; ++ax)
          if (ax != dir) w_other *= mesh.quad[ax].weights[ijk[ax]];
        FaceNodeGeometry g;
        g.element = e;
        g.face = f;
        g.node = n;
        g.tag = link.tag;
        if (link.tag == FaceTag::kInterior) {
          g.neighbor_element = link.neighbor;
          g.neighbor_node = link.trace[a_idx];
        }
        g.normal = scale3(jv, sign / mag);
        g.area = w_other * mag;
        g.lift = mag / (mesh.quad[dir].weights[ijk[dir]] * mt.jacobian[mesh.local_index(e, n)]);
        mt.face_nodes.push_back(g);
      }
    }
  }
  mt.face_offsets.push_back(static_cast<int>(mt.face_nodes.size()));
  return mt;
}

}  // namespace dycore::specgrid
