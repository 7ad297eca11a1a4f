#include "dycore/bench/bench.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

namespace dycore::bench {

using euler::EquationSet;
using euler::kMomX;
using euler::kMomY;
using euler::kMomZ;
using euler::kRho;
using euler::kTheta;
using euler::State;

void AcousticWaveConfig::validate() const {
  if (!(r_e > 0.0)) throw ConfigError("acoustic wave: earth radius must be positive");
  if (!(r_t > 0.0)) throw ConfigError("acoustic wave: shell depth r_t must be positive");
  if (!(r_c > 0.0) || r_c > kPi * r_e) throw ConfigError("acoustic wave: pulse radius must lie in (0, pi r_e]");
  if (vertical_mode < 0) throw ConfigError("acoustic wave: vertical mode must be nonnegative");
  if (!(theta0 > 0.0)) throw ConfigError("acoustic wave: theta0 must be positive");
  if (ne_panel < 1 || ne_vert < 1 || order < 1) throw ConfigError("acoustic wave: invalid mesh size");
}

void RisingBubbleConfig::validate() const {
  if (!(lx > 0.0) || !(lz > 0.0)) throw ConfigError("rising bubble: domain extents must be positive");
  if (!(radius > 0.0)) throw ConfigError("rising bubble: radius must be positive");
  if (xc - radius < 0.0 || xc + radius > lx || zc - radius < 0.0 || zc + radius > lz)
    throw ConfigError("rising bubble: the bubble must lie inside the domain");
  if (!(theta0 > 0.0)) throw ConfigError("rising bubble: theta0 must be positive");
  if (nx < 1 || nz < 1 || order < 1) throw ConfigError("rising bubble: invalid mesh size");
}

LonLat lon_lat(const Vec3& x) {
  const double r = norm3(x);
  return {std::atan2(x[1], x[0]), std::asin(std::clamp(x[2] / r, -1.0, 1.0))};
}

Vec3 sphere_point(double lon, double lat, double radius) {
  return {radius * std::cos(lat) * std::cos(lon), radius * std::cos(lat) * std::sin(lon), radius * std::sin(lat)};
}

double great_circle_distance(double lon0, double lat0, double lon1, double lat1, double r) {
  const double c = std::sin(lat0) * std::sin(lat1) + std::cos(lat0) * std::cos(lat1) * std::cos(lon1 - lon0);
  return r * std::acos(std::clamp(c, -1.0, 1.0));
}

LonLat point_at_angle(double lon0, double lat0, double angle) {
  // Rotate the origin about the axis perpendicular to it and to the local east direction.
  const Vec3 p = sphere_point(lon0, lat0, 1.0);
  const Vec3 east{-std::sin(lon0), std::cos(lon0), 0.0};
  const Vec3 q = add3(scale3(p, std::cos(angle)), scale3(east, std::sin(angle)));
  return lon_lat(q);
}

euler::BackgroundProfile isothermal_profile(double t0, const euler::GasConstants& gas) {
  if (!(t0 > 0.0)) throw ConfigError("isothermal background needs a positive temperature");
  return {t0, gas.gravity / std::sqrt(gas.cp * t0)};
}

double acoustic_pressure(const AcousticWaveConfig& cfg, double lon, double lat, double height) {
  const double r = great_circle_distance(cfg.lon0, cfg.lat0, lon, lat, cfg.r_e);
  if (r > cfg.r_c) return 0.0;
  const double f = 0.5 * cfg.delta_p * (1.0 + std::cos(kPi * r / cfg.r_c));
  return f * std::sin(cfg.vertical_mode * kPi * height / cfg.r_t);
}

State init_acoustic_wave(const AcousticWaveConfig& cfg, const euler::EulerOperators& ops) {
  cfg.validate();
  const auto& disc = ops.disc();
  if (disc.mesh().topology != specgrid::Topology::kCubedSphere)
    throw ConfigError("acoustic wave needs a cubed-sphere mesh");
  const auto& ref = ops.ref();
  const double gamma = ref.gas().gamma();
  State q = ops.make_state();
  for (int i = 0; i < q.num_dofs; ++i) {
    const LonLat ll = lon_lat(disc.dofs().coords[i]);
    const double pp = acoustic_pressure(cfg, ll.lon, ll.lat, disc.height()[i]);
    if (pp == 0.0) continue;
    // Linearized equation of state about the reference.
    if (cfg.perturb_density) {
      const double rho = pp / (ref.sound_speed[i] * ref.sound_speed[i]);
      q.field(kRho)[i] = rho;
      q.field(kTheta)[i] = ops.set() == EquationSet::kSet2C ? ref.theta0[i] * rho : 0.0;
    } else {
      const double theta = pp * ref.theta0[i] / (gamma * ref.p0[i]);
      q.field(kTheta)[i] = ops.set() == EquationSet::kSet2C ? ref.rho0[i] * theta : theta;
    }
  }
  return q;
}

double bubble_theta(const RisingBubbleConfig& cfg, double x, double z) {
  const double r = std::hypot(x - cfg.xc, z - cfg.zc);
  if (r > cfg.radius) return 0.0;
  return 0.5 * cfg.theta_c * (1.0 + std::cos(kPi * r / cfg.radius));
}

State init_rising_bubble(const RisingBubbleConfig& cfg, const euler::EulerOperators& ops) {
  cfg.validate();
  const auto& disc = ops.disc();
  if (disc.mesh().topology != specgrid::Topology::kBox) throw ConfigError("rising bubble needs a box mesh");
  const auto& ref = ops.ref();
  State q = ops.make_state();
  for (int i = 0; i < q.num_dofs; ++i) {
    const Vec3& x = disc.dofs().coords[i];
    const double tp = bubble_theta(cfg, x[0], x[2]);
    if (tp == 0.0) continue;
    // rho theta is unchanged, so the pressure perturbation vanishes.
    const double rho_theta = ref.rho0[i] * ref.theta0[i];
    q.field(kRho)[i] = rho_theta / (ref.theta0[i] + tp) - ref.rho0[i];
    q.field(kTheta)[i] = ops.set() == EquationSet::kSet2C ? 0.0 : tp;
  }
  return q;
}

double total_mass(const State& q, const euler::EulerOperators& ops) {
  const auto& mass = ops.disc().dss().mass;
  const auto& rho0 = ops.ref().rho0;
  const double* rho = q.field(kRho);
  double m = 0.0;
  for (int i = 0; i < q.num_dofs; ++i) m += mass[i] * (rho0[i] + rho[i]);
  return m;
}

int nearest_dof(const specgrid::Discretization& disc, const Vec3& point) {
  int best = -1;
  double d = std::numeric_limits<double>::infinity();
  const auto& c = disc.dofs().coords;
  for (int i = 0; i < disc.num_dofs(); ++i) {
    const double di = norm3(sub3(c[i], point));
    if (di < d) {
      d = di;
      best = i;
    }
  }
  return best;
}

void Diagnostics::record(double t, const State& q, const euler::EulerOperators& ops) {
  if (!time_.empty() && !(t > time_.back()))
    throw Error("diagnostics timestamps must be strictly increasing");
  time_.push_back(t);
  mass_.push_back(total_mass(q, ops));
  double mr = 0.0, mt = 0.0;
  for (int i = 0; i < q.num_dofs; ++i) {
    mr = std::max(mr, std::fabs(q.field(kRho)[i]));
    mt = std::max(mt, std::fabs(q.field(kTheta)[i]));
  }
  max_rho_.push_back(mr);
  max_theta_.push_back(mt);
  if (!probes_.empty()) {
    std::vector<double> pp(q.num_dofs);
    ops.pressure_perturbation(q, pp.data());
    probe_values_.resize(probes_.size());
    for (std::size_t k = 0; k < probes_.size(); ++k) probe_values_[k].push_back(pp[probes_[k].dof]);
  }
}

namespace {
void put(std::ostream& out, double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out << buf;
}
}  // namespace

void Diagnostics::write_csv(std::ostream& out) const {
  out << "time,mass,max_rho_p,max_theta_p";
  for (const Probe& p : probes_) out << ',' << p.name;
  out << '\n';
  for (std::size_t r = 0; r < time_.size(); ++r) {
    put(out, time_[r]);
    for (double v : {mass_[r], max_rho_[r], max_theta_[r]}) {
      out << ',';
      put(out, v);
    }
    for (std::size_t k = 0; k < probes_.size(); ++k) {
      out << ',';
      put(out, probe_values_[k][r]);
    }
    out << '\n';
  }
}

void write_snapshot(std::ostream& out, const State& q, const euler::EulerOperators& ops, double time,
                    const std::string& metadata) {
  const auto& ref = ops.ref();
  const auto& coords = ops.disc().dofs().coords;
  out << "# time=";
  put(out, time);
  if (!metadata.empty()) out << ' ' << metadata;
  out << '\n';
  const bool cons = ops.set() == EquationSet::kSet2C;
  for (int i = 0; i < q.num_dofs; ++i) {
    const double rho = ref.rho0[i] + q.field(kRho)[i];
    const double s = cons ? 1.0 / rho : 1.0;
    const double theta_p =
        cons ? (ref.rho0[i] * ref.theta0[i] + q.field(kTheta)[i]) / rho - ref.theta0[i] : q.field(kTheta)[i];
    const double row[8] = {coords[i][0],         coords[i][1],         coords[i][2],         q.field(kRho)[i],
                           q.field(kMomX)[i] * s, q.field(kMomY)[i] * s, q.field(kMomZ)[i] * s, theta_p};
    for (int k = 0; k < 8; ++k) {
      if (k) out << ' ';
      put(out, row[k]);
    }
    out << '\n';
  }
}

namespace {

// Index of the first |v| local maximum reaching `fraction` of the series maximum.
std::size_t first_peak(std::span<const double> t, std::span<const double> v, double fraction) {
  if (t.size() != v.size()) throw Error("arrival time: series lengths differ");
  double vmax = 0.0;
  for (double x : v) vmax = std::max(vmax, std::fabs(x));
  if (!(vmax > 0.0)) throw Error("arrival time: the probe series is identically zero");
  for (std::size_t k = 1; k + 1 < v.size(); ++k) {
    const double a = std::fabs(v[k - 1]), b = std::fabs(v[k]), c = std::fabs(v[k + 1]);
    if (b >= fraction * vmax && b >= a && b >= c) return k;
  }
  throw Error("arrival time: no extremum found within the series");
}

}  // namespace

double arrival_time(std::span<const double> t, std::span<const double> v, double fraction) {
  const std::size_t k = first_peak(t, v, fraction);
  const double a = std::fabs(v[k - 1]), b = std::fabs(v[k]), c = std::fabs(v[k + 1]);
  // Parabola through the three samples (nonuniform spacing allowed).
  const double t0 = t[k - 1], t1 = t[k], t2 = t[k + 1];
  const double d1 = (b - a) / (t1 - t0), d2 = (c - b) / (t2 - t1);
  const double curv = (d2 - d1) / (t2 - t0);
  if (curv >= 0.0) return t1;
  // Vertex of a + d1 (t - t0) + curv (t - t0)(t - t1).
  return 0.5 * (t0 + t1) - d1 / (2.0 * curv);
}

double focus_crossing_time(std::span<const double> t, std::span<const double> v, double fraction) {
  const std::size_t k = first_peak(t, v, fraction);
  for (std::size_t j = k; j + 1 < v.size(); ++j) {
    if ((v[j] > 0.0) == (v[j + 1] > 0.0)) continue;
    return t[j] + (t[j + 1] - t[j]) * v[j] / (v[j] - v[j + 1]);
  }
  throw Error("focus crossing: no sign change after the first peak");
}

double wavefront_speed(std::span<const double> t, std::span<const double> v, double distance) {
  const double ta = arrival_time(t, v);
  if (!(ta > 0.0)) throw Error("wavefront speed: nonpositive arrival time");
  return distance / ta;
}

double differential_wavefront_speed(std::span<const double> t, std::span<const double> v1, double d1,
                                    std::span<const double> v2, double d2) {
  const double t1 = arrival_time(t, v1), t2 = arrival_time(t, v2);
  if (!(t2 > t1)) throw Error("wavefront speed: the far probe does not see the front later");
  return (d2 - d1) / (t2 - t1);
}

double log_log_slope(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  if (n < 2 || y.size() != n) throw Error("slope needs at least two matching points");
  double sx = 0.0, sy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sx += std::log(x[i]);
    sy += std::log(y[i]);
  }
  sx /= n;
  sy /= n;
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = std::log(x[i]) - sx;
    num += dx * (std::log(y[i]) - sy);
    den += dx * dx;
  }
  return num / den;
}

ConvergenceResult convergence_order(std::span<const double> dts, const std::vector<std::vector<double>>& solutions) {
  const std::size_t n = dts.size();
  if (n < 3) throw ConfigError("convergence study needs at least three time steps");
  if (solutions.size() != n) throw Error("convergence study: one solution per time step expected");
  for (std::size_t k = 1; k < n; ++k)
    if (std::fabs(dts[k] - 0.5 * dts[k - 1]) > 1e-12 * dts[k - 1])
      throw ConfigError("convergence study: each time step must be half the previous");
  const auto max_diff = [](const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) throw Error("convergence study: solution sizes differ");
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::fabs(a[i] - b[i]));
    return m;
  };
  ConvergenceResult r;
  r.dts.assign(dts.begin(), dts.end());
  double scale = 0.0;
  for (double v : solutions.back()) scale = std::max(scale, std::fabs(v));
  for (std::size_t k = 0; k < n; ++k) r.error_vs_finest.push_back(max_diff(solutions[k], solutions.back()));
  for (std::size_t k = 0; k + 1 < n; ++k) r.differences.push_back(max_diff(solutions[k], solutions[k + 1]));

  const double floor = 1e-13 * std::max(scale, 1e-300);
  for (double d : r.differences)
    if (d <= floor) {
      r.saturated = true;
      r.note = "differences at round-off level";
      return r;
    }
  for (std::size_t k = 1; k < r.differences.size(); ++k)
    if (!(r.differences[k] < r.differences[k - 1])) {
      r.note = "non-monotone differences";
      return r;
    }
  r.order = log_log_slope(std::span<const double>(dts.data(), n - 1), r.differences);
  r.has_order = true;
  return r;
}

}  // namespace dycore::bench
