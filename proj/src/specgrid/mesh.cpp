#include "dycore/specgrid/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <unordered_map>

namespace dycore::specgrid {
namespace {

// Identifies points that coincide up to round-off. Cells of width h are hashed;
// a query inspects the neighbouring cells so points near a cell border still match.
class PointRegistry {
 public:
  explicit PointRegistry(double tol) : h_(tol * 100.0), tol_(tol) {}

  int find_or_insert(const Vec3& p) {
    const long cx = std::lround(std::floor(p[0] / h_)), cy = std::lround(std::floor(p[1] / h_)),
               cz = std::lround(std::floor(p[2] / h_));
    for (long dx = -1; dx <= 1; ++dx)
      for (long dy = -1; dy <= 1; ++dy)
        for (long dz = -1; dz <= 1; ++dz) {
          auto it = cells_.find(key(cx + dx, cy + dy, cz + dz));
          if (it == cells_.end()) continue;
          for (int id : it->second)
            if (norm3(sub3(points_[id], p)) <= tol_) return id;
        }
    const int id = static_cast<int>(points_.size());
    points_.push_back(p);
    cells_[key(cx, cy, cz)].push_back(id);
    return id;
  }

  int size() const { return static_cast<int>(points_.size()); }

 private:
  static std::uint64_t key(long x, long y, long z) {
    const auto m = [](long v) { return static_cast<std::uint64_t>(v) & 0x1FFFFFu; };
    return (m(x) << 42) | (m(y) << 21) | m(z);
  }
  double h_, tol_;
  std::vector<Vec3> points_;
  std::unordered_map<std::uint64_t, std::vector<int>> cells_;
};

void check_sizes(int a, int b, int order) {
  if (a < 1 || b < 1) throw ConfigError("element counts must be positive");
  if (order < 1) throw ConfigError("polynomial degree must be at least 1");
}

// Fills faces, neighbors and traces from continuous node ids.
void connect_faces(ElementMesh& m) {
  const int npe = m.nodes_per_element();
  m.faces.assign(m.num_elements, {});
  std::map<std::vector<int>, std::vector<std::pair<int, int>>> by_signature;
  std::array<std::vector<int>, kFacesPerElement> fnodes;
  for (int f = 0; f < kFacesPerElement; ++f) fnodes[f] = face_nodes(m.shape, f);
  const int dims[3] = {m.shape.nr, m.shape.ns, m.shape.nt};
  for (int e = 0; e < m.num_elements; ++e) {
    for (int f = 0; f < kFacesPerElement; ++f) {
      if (dims[f / 2] == 1) {
        m.faces[e][f].tag = FaceTag::kCollapsed;
        continue;
      }
      std::vector<int> sig;
      for (int node : fnodes[f]) sig.push_back(m.continuous_id(m.local_index(e, node)));
      std::sort(sig.begin(), sig.end());
      sig.erase(std::unique(sig.begin(), sig.end()), sig.end());
      by_signature[sig].emplace_back(e, f);
    }
  }
  for (const auto& [sig, owners] : by_signature) {
    if (owners.size() > 2) throw Error("mesh face shared by more than two elements");
    if (owners.size() == 1) {
      const auto [e, f] = owners[0];
      m.faces[e][f].tag = (f == 4) ? FaceTag::kBottom : (f == 5) ? FaceTag::kTop : FaceTag::kLateral;
      continue;
    }
    for (int side = 0; side < 2; ++side) {
      const auto [e, f] = owners[side];
      const auto [ne, nf] = owners[1 - side];
      FaceLink& link = m.faces[e][f];
      link.tag = FaceTag::kInterior;
      link.neighbor = ne;
      link.neighbor_face = nf;
      std::unordered_map<int, int> other;
      for (int node : fnodes[nf]) other[m.continuous_id(m.local_index(ne, node))] = node;
      for (int node : fnodes[f]) {
        auto it = other.find(m.continuous_id(m.local_index(e, node)));
        if (it == other.end()) throw Error("face trace mismatch at element " + std::to_string(e));
        link.trace.push_back(it->second);
      }
    }
  }
  (void)npe;
}

}  // namespace

std::vector<int> face_nodes(const simd::TensorShape& sh, int face) {
  std::vector<int> out;
  const auto idx = [&](int i, int j, int k) { return i + sh.nr * (j + sh.ns * k); };
  switch (face / 2) {
    case 0: {
      const int i = (face % 2 == 0) ? 0 : sh.nr - 1;
      for (int k = 0; k < sh.nt; ++k)
        for (int j = 0; j < sh.ns; ++j) out.push_back(idx(i, j, k));
      break;
    }
    case 1: {
      const int j = (face % 2 == 0) ? 0 : sh.ns - 1;
      for (int k = 0; k < sh.nt; ++k)
        for (int i = 0; i < sh.nr; ++i) out.push_back(idx(i, j, k));
      break;
    }
    default: {
      const int k = (face % 2 == 0) ? 0 : sh.nt - 1;
      for (int j = 0; j < sh.ns; ++j)
        for (int i = 0; i < sh.nr; ++i) out.push_back(idx(i, j, k));
    }
  }
  return out;
}

ElementMesh build_box_mesh(int nx, int nz, double lx, double lz, int order) {
  check_sizes(nx, nz, order);
  if (!(lx > 0.0) || !(lz > 0.0)) throw ConfigError("box extents must be positive");
  ElementMesh m;
  m.topology = Topology::kBox;
  m.order = order;
  m.quad = {lgl_quadrature(order), collapsed_quadrature(), lgl_quadrature(order)};
  m.shape = {order + 1, 1, order + 1};
  m.num_horizontal_elements = nx;
  m.num_vertical_elements = nz;
  m.num_elements = nx * nz;
  m.extent_x = lx;
  m.extent_z = lz;
  m.collapsed_axis = {0.0, 0.5, 0.0};
  m.levels_per_column = nz * order + 1;
  const int npe = m.nodes_per_element();
  m.coords.resize(static_cast<std::size_t>(m.num_elements) * npe);
  m.horizontal_id.resize(m.coords.size());
  m.level.resize(m.coords.size());
  const double dx = lx / nx, dz = lz / nz;
  const auto& xi = m.quad[0].nodes;
  for (int ex = 0; ex < nx; ++ex)
    for (int ez = 0; ez < nz; ++ez) {
      const int e = ex * nz + ez;
      for (int k = 0; k <= order; ++k)
        for (int i = 0; i <= order; ++i) {
          const int node = i + m.shape.nr * k;
          const std::size_t l = m.local_index(e, node);
          // Interior nodes use the affine map; element edges are pinned to exact grid lines.
          const double x = (i == 0) ? ex * dx : (i == order) ? (ex + 1) * dx : (ex + 0.5 * (xi[i] + 1.0)) * dx;
          const double z = (k == 0) ? ez * dz : (k == order) ? (ez + 1) * dz : (ez + 0.5 * (xi[k] + 1.0)) * dz;
          m.coords[l] = {x, 0.0, z};
          m.horizontal_id[l] = ex * order + i;
          m.level[l] = ez * order + k;
        }
    }
  m.num_horizontal_points = nx * order + 1;
  connect_faces(m);
  return m;
}

const std::array<PanelFrame, 6>& cubed_sphere_panels() {
  static const std::array<PanelFrame, 6> panels{{
      {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}},
      {{0, 1, 0}, {-1, 0, 0}, {0, 0, 1}},
      {{-1, 0, 0}, {0, -1, 0}, {0, 0, 1}},
      {{0, -1, 0}, {1, 0, 0}, {0, 0, 1}},
      {{0, 0, 1}, {0, 1, 0}, {-1, 0, 0}},
      {{0, 0, -1}, {0, 1, 0}, {1, 0, 0}},
  }};
  return panels;
}

ElementMesh build_cubed_sphere_mesh(int ne_panel, int ne_vert, double r_e, double r_t, int order) {
  check_sizes(ne_panel, ne_vert, order);
  if (!(r_e > 0.0) || !(r_t > 0.0)) throw ConfigError("sphere radius and shell depth must be positive");
  ElementMesh m;
  m.topology = Topology::kCubedSphere;
  m.order = order;
  m.quad = {lgl_quadrature(order), lgl_quadrature(order), lgl_quadrature(order)};
  m.shape = {order + 1, order + 1, order + 1};
  m.num_horizontal_elements = 6 * ne_panel * ne_panel;
  m.num_vertical_elements = ne_vert;
  m.num_elements = m.num_horizontal_elements * ne_vert;
  m.inner_radius = r_e;
  m.shell_depth = r_t;
  m.levels_per_column = ne_vert * order + 1;
  const int npe = m.nodes_per_element();
  m.coords.resize(static_cast<std::size_t>(m.num_elements) * npe);
  m.horizontal_id.resize(m.coords.size());
  m.level.resize(m.coords.size());
  const auto& xi = m.quad[0].nodes;
  const double dang = (std::numbers::pi / 2.0) / ne_panel;
  const double dr = r_t / ne_vert;
  PointRegistry registry(1e-10);
  const auto angle = [&](int cell, int node) {
    if (node == 0) return -std::numbers::pi / 4.0 + cell * dang;
    if (node == order) return -std::numbers::pi / 4.0 + (cell + 1) * dang;
    return -std::numbers::pi / 4.0 + (cell + 0.5 * (xi[node] + 1.0)) * dang;
  };
  for (int p = 0; p < 6; ++p) {
    const PanelFrame& fr = cubed_sphere_panels()[p];
    for (int b = 0; b < ne_panel; ++b)
      for (int a = 0; a < ne_panel; ++a) {
        const int h = (p * ne_panel + b) * ne_panel + a;
        for (int j = 0; j <= order; ++j)
          for (int i = 0; i <= order; ++i) {
            const double ta = std::tan(angle(a, i)), tb = std::tan(angle(b, j));
            Vec3 dir = add3(fr.center, add3(scale3(fr.e1, ta), scale3(fr.e2, tb)));
            dir = scale3(dir, 1.0 / norm3(dir));
            const int hid = registry.find_or_insert(dir);
            for (int v = 0; v < ne_vert; ++v) {
              const int e = h * ne_vert + v;
              for (int k = 0; k <= order; ++k) {
                const double r = (k == 0)       ? r_e + v * dr
                                 : (k == order) ? r_e + (v + 1) * dr
                                                : r_e + (v + 0.5 * (xi[k] + 1.0)) * dr;
                const std::size_t l = m.local_index(e, i + m.shape.nr * (j + m.shape.ns * k));
                m.coords[l] = scale3(dir, r);
                m.horizontal_id[l] = hid;
                m.level[l] = v * order + k;
              }
            }
          }
      }
  }
  m.num_horizontal_points = registry.size();
  connect_faces(m);
  return m;
}

}  // namespace dycore::specgrid
