#include <cmath>
#include <memory>
#include <sstream>

#include "doctest.h"
#include "dycore/bench/bench.hpp"
#include "dycore/imexcore/stepper.hpp"

using namespace dycore;
using namespace dycore::bench;
using namespace dycore::euler;
using namespace dycore::specgrid;

namespace {

struct Setup {
  std::unique_ptr<Discretization> disc;
  std::unique_ptr<ReferenceState> ref;
  std::unique_ptr<EulerOperators> ops;
  Setup(ElementMesh mesh, Galerkin kind, EquationSet set, BackgroundProfile profile = {}) {
    disc = std::make_unique<Discretization>(std::move(mesh), kind);
    ref = std::make_unique<ReferenceState>(*disc, profile, GasConstants{});
    ops = std::make_unique<EulerOperators>(*disc, *ref, set);
  }
};

Setup small_sphere(EquationSet set = EquationSet::kSet2NC, int ne = 2, int order = 4) {
  return Setup(build_cubed_sphere_mesh(ne, 2, kEarthRadius, 10000.0, order), Galerkin::kContinuous, set,
               isothermal_profile(300.0));
}

double max_abs(const double* v, int n) {
  double m = 0.0;
  for (int i = 0; i < n; ++i) m = std::max(m, std::fabs(v[i]));
  return m;
}

// Theta'-weighted centroid height of the bubble.
double bubble_height(const State& q, const EulerOperators& ops) {
  const auto& mass = ops.disc().dss().mass;
  double num = 0.0, den = 0.0;
  for (int i = 0; i < q.num_dofs; ++i) {
    const double w = mass[i] * std::max(0.0, q.field(kTheta)[i]);
    num += w * ops.disc().dofs().coords[i][2];
    den += w;
  }
  return num / den;
}

}  // namespace

TEST_CASE("sphere geometry helpers") {
  CHECK(great_circle_distance(0.0, 0.0, kPi / 2, 0.0, kEarthRadius) == doctest::Approx(kPi * kEarthRadius / 2));
  CHECK(great_circle_distance(0.3, 0.2, 0.3, 0.2, 1.0) == 0.0);
  CHECK(great_circle_distance(0.0, kPi / 2, 1.0, -kPi / 2, 1.0) == doctest::Approx(kPi));
  for (double ang : {0.1, 0.7, kPi / 2, 2.5}) {
    const LonLat p = point_at_angle(0.4, 0.3, ang);
    CHECK(great_circle_distance(0.4, 0.3, p.lon, p.lat, 1.0) == doctest::Approx(ang).epsilon(1e-12));
  }
  const Vec3 x = sphere_point(1.1, -0.4, 7.0);
  CHECK(norm3(x) == doctest::Approx(7.0));
  const LonLat ll = lon_lat(x);
  CHECK(ll.lon == doctest::Approx(1.1));
  CHECK(ll.lat == doctest::Approx(-0.4));
}

TEST_CASE("acoustic pulse") {
  AcousticWaveConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  CHECK(cfg.r_c == doctest::Approx(kEarthRadius / 3));
  // Antipode, pulse center at mid height, and the surface.
  CHECK(acoustic_pressure(cfg, kPi, 0.0, 5000.0) == 0.0);
  CHECK(acoustic_pressure(cfg, 0.0, 0.0, 5000.0) == doctest::Approx(100.0).epsilon(1e-14));
  CHECK(acoustic_pressure(cfg, 0.0, 0.0, 0.0) == 0.0);
  CHECK(std::fabs(acoustic_pressure(cfg, 0.0, 0.0, 10000.0)) < 1e-12);
  for (double lon = -3.0; lon < 3.0; lon += 0.07)
    for (double h = 0.0; h <= 10000.0; h += 500.0) {
      const double p = acoustic_pressure(cfg, lon, 0.1, h);
      CHECK(p >= 0.0);
      CHECK(p <= 100.0 * std::sin(kPi * h / 1e4) + 1e-12);
    }

  AcousticWaveConfig bad = cfg;
  bad.r_t = 0.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = cfg;
  bad.r_c = 4.0 * kEarthRadius;
  CHECK_THROWS_AS(bad.validate(), ConfigError);

  for (EquationSet set : {EquationSet::kSet2NC, EquationSet::kSet2C})
    for (bool dens : {true, false}) {
      Setup s = small_sphere(set);
      AcousticWaveConfig c = cfg;
      c.perturb_density = dens;
      const State q = init_acoustic_wave(c, *s.ops);
      std::vector<double> pp(q.num_dofs), pl(q.num_dofs);
      s.ops->pressure_perturbation(q, pp.data());
      s.ops->linearized_pressure(q, pl.data());
      double pmax = 0.0;
      for (int i = 0; i < q.num_dofs; ++i) {
        const LonLat ll = lon_lat(s.disc->dofs().coords[i]);
        const double target = acoustic_pressure(c, ll.lon, ll.lat, s.disc->height()[i]);
        CHECK(pl[i] == doctest::Approx(target).epsilon(1e-12).scale(1.0));
        // Nonlinear pressure differs at second order in P'/P0.
        CHECK(std::fabs(pp[i] - target) <= 1e-3 * std::fabs(target) + 1e-12);
        pmax = std::max(pmax, pp[i]);
        if (dens) CHECK(q.field(kRho)[i] == doctest::Approx(target / std::pow(s.ref->sound_speed[i], 2)));
        else CHECK(q.field(kRho)[i] == 0.0);
        for (int f : {kMomX, kMomY, kMomZ}) CHECK(q.field(f)[i] == 0.0);
      }
      CHECK(pmax > 50.0);
    }
  Setup box(build_box_mesh(2, 2, 100.0, 100.0, 2), Galerkin::kContinuous, EquationSet::kSet2NC);
  CHECK_THROWS_AS(init_acoustic_wave(cfg, *box.ops), ConfigError);
}

TEST_CASE("isothermal background") {
  Setup s = small_sphere();
  const double t0 = 300.0, rg = 287.0;
  for (int i = 0; i < s.disc->num_dofs(); ++i) {
    CHECK(s.ref->theta0[i] * s.ref->exner[i] == doctest::Approx(t0).epsilon(1e-12));
    CHECK(s.ref->sound_speed[i] == doctest::Approx(std::sqrt(1004.5 / 717.5 * rg * t0)).epsilon(1e-12));
  }
  CHECK_THROWS_AS(isothermal_profile(0.0), ConfigError);
}

TEST_CASE("rising bubble") {
  RisingBubbleConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  CHECK(bubble_theta(cfg, 500.0, 350.0) == doctest::Approx(0.5));
  CHECK(bubble_theta(cfg, 500.0, 601.0) == 0.0);
  CHECK(bubble_theta(cfg, 100.0, 900.0) == 0.0);
  CHECK(bubble_theta(cfg, 625.0, 350.0) == doctest::Approx(0.25));
  RisingBubbleConfig bad = cfg;
  bad.zc = 100.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);

  for (EquationSet set : {EquationSet::kSet2NC, EquationSet::kSet2C}) {
    Setup s(build_box_mesh(8, 8, 1000.0, 1000.0, 4), Galerkin::kContinuous, set);
    const State q = init_rising_bubble(cfg, *s.ops);
    std::vector<double> pp(q.num_dofs);
    s.ops->pressure_perturbation(q, pp.data());
    CHECK(max_abs(pp.data(), q.num_dofs) <= 1e-9);
    // Primitive theta' reproduces the bubble.
    std::ostringstream snap;
    write_snapshot(snap, q, *s.ops, 0.0, "case=bubble");
    std::istringstream in(snap.str());
    std::string header;
    std::getline(in, header);
    CHECK(header == "# time=0 case=bubble");
    int rows = 0;
    double x, y, z, r, u, v, w, th;
    while (in >> x >> y >> z >> r >> u >> v >> w >> th) {
      CHECK(th == doctest::Approx(bubble_theta(cfg, x, z)).epsilon(1e-12).scale(1.0));
      CHECK(u == 0.0);
      ++rows;
    }
    CHECK(rows == q.num_dofs);
  }

  SUBCASE("warm air rises under the explicit scheme") {
    Setup s(build_box_mesh(10, 10, 1000.0, 1000.0, 4), Galerkin::kContinuous, EquationSet::kSet2NC);
    State q = init_rising_bubble(cfg, *s.ops);
    imexcore::TimeStepper stepper(*s.ops, imexcore::Method::kRk35);
    const double dt = 0.5 * s.disc->metrics().min_spacing_vertical / 347.0;
    const double h0 = bubble_height(q, *s.ops);
    double prev = h0;
    for (int k = 0; k < 100; ++k) {
      stepper.step(q, dt);
      if (k % 25 == 24) {
        const double h = bubble_height(q, *s.ops);
        CHECK(h > prev);
        prev = h;
      }
    }
    double wmax = 0.0;
    for (int i = 0; i < q.num_dofs; ++i) wmax = std::max(wmax, q.field(kMomZ)[i]);
    CHECK(wmax > 0.0);
  }
}

TEST_CASE("mass integral") {
  SUBCASE("box background against the analytic integral") {
    const double lx = 1000.0, lz = 1000.0, th = 300.0;
    Setup s(build_box_mesh(6, 6, lx, lz, 5), Galerkin::kContinuous, EquationSet::kSet2NC);
    const GasConstants gas;
    const double a = gas.gravity / (gas.cp * th), k = gas.cv / gas.R();
    const double exact =
        lx * 1.0 * gas.p_ref / (gas.R() * th) * (1.0 - std::pow(1.0 - a * lz, k + 1.0)) / (a * (k + 1.0));
    const State q = s.ops->make_state();
    CHECK(std::fabs(total_mass(q, *s.ops) - exact) <= 1e-6 * exact);
  }
  SUBCASE("isothermal shell against the analytic integral") {
    Setup s = small_sphere(EquationSet::kSet2NC, 3, 6);
    const GasConstants gas;
    const double t0 = 300.0, hs = gas.R() * t0 / gas.gravity, re = kEarthRadius, d = 10000.0;
    // Integral of 4 pi (re + h)^2 exp(-h / hs) over [0, d].
    const auto prim = [&](double h) {
      const double r = re + h;
      return -hs * std::exp(-h / hs) * (r * r + 2.0 * hs * r + 2.0 * hs * hs);
    };
    const double exact = 4.0 * kPi * gas.p_ref / (gas.R() * t0) * (prim(d) - prim(0.0));
    const double m = total_mass(s.ops->make_state(), *s.ops);
    MESSAGE("shell mass relative error " << (m - exact) / exact);
    CHECK(std::fabs(m - exact) <= 1e-6 * exact);
  }
  SUBCASE("zero-mean perturbation leaves the mass unchanged") {
    Setup s(build_box_mesh(5, 5, 1000.0, 1000.0, 4), Galerkin::kContinuous, EquationSet::kSet2C);
    State q = s.ops->make_state();
    const auto& mass = s.disc->dss().mass;
    double sum = 0.0, vol = 0.0;
    for (int i = 0; i < q.num_dofs; ++i) {
      q.field(kRho)[i] = 1e-3 * std::sin(s.disc->dofs().coords[i][0] / 97.0);
      sum += mass[i] * q.field(kRho)[i];
      vol += mass[i];
    }
    for (int i = 0; i < q.num_dofs; ++i) q.field(kRho)[i] -= sum / vol;
    const double m0 = total_mass(s.ops->make_state(), *s.ops);
    CHECK(std::fabs(total_mass(q, *s.ops) - m0) <= 1e-13 * m0);
  }
  SUBCASE("conservative set keeps its mass over 100 steps") {
    for (Galerkin kind : {Galerkin::kContinuous, Galerkin::kDiscontinuous})
      for (imexcore::Method method : {imexcore::Method::kRk35, imexcore::Method::kArk2}) {
        Setup s(build_box_mesh(4, 4, 1000.0, 1000.0, 4), kind, EquationSet::kSet2C);
        State q = init_rising_bubble(RisingBubbleConfig{}, *s.ops);
        imexcore::ImplicitProblem p(*s.ops, imexcore::ImplicitForm::kStandard, imexcore::ImplicitDim::k3D);
        imexcore::SolverSettings set;
        set.tol = 1e-6;
        imexcore::StageSolver solver(p, set);
        imexcore::TimeStepper stepper(*s.ops, method, method == imexcore::Method::kRk35 ? nullptr : &solver);
        const double c = method == imexcore::Method::kRk35 ? 0.5 : 4.0;
        const double dt = c * s.disc->metrics().min_spacing_vertical / 347.0;
        const double m0 = total_mass(q, *s.ops);
        for (int k = 0; k < 100; ++k) stepper.step(q, dt);
        CHECK(std::fabs(total_mass(q, *s.ops) - m0) <= 1e-11 * m0);
      }
  }
}

TEST_CASE("diagnostics series and output") {
  Setup s(build_box_mesh(3, 3, 300.0, 300.0, 2), Galerkin::kContinuous, EquationSet::kSet2NC);
  Diagnostics d({{"probe_1", 0}, {"probe_2", nearest_dof(*s.disc, {150.0, 0.0, 150.0})}});
  CHECK(d.probes()[1].dof >= 0);
  const Vec3 at = s.disc->dofs().coords[d.probes()[1].dof];
  CHECK(at[0] == doctest::Approx(150.0));
  CHECK(at[2] == doctest::Approx(150.0));
  State q = s.ops->make_state();
  d.record(0.0, q, *s.ops);
  q.field(kRho)[3] = -2e-3;
  q.field(kTheta)[4] = 0.5;
  d.record(1.0, q, *s.ops);
  CHECK_THROWS_AS(d.record(1.0, q, *s.ops), Error);
  CHECK(d.max_rho()[1] == 2e-3);
  CHECK(d.max_theta()[1] == 0.5);
  CHECK(d.max_rho()[0] == 0.0);
  CHECK(d.mass()[1] < d.mass()[0]);
  std::ostringstream csv;
  d.write_csv(csv);
  std::istringstream in(csv.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "time,mass,max_rho_p,max_theta_p,probe_1,probe_2");
  int rows = 0;
  while (std::getline(in, line)) {
    CHECK(std::count(line.begin(), line.end(), ',') == 5);
    ++rows;
  }
  CHECK(rows == 2);
}

TEST_CASE("hydrostatic rest state stays at rest") {
  Setup s(build_box_mesh(10, 10, 1000.0, 1000.0, 4), Galerkin::kContinuous, EquationSet::kSet2NC);
  State q = s.ops->make_state();
  imexcore::TimeStepper stepper(*s.ops, imexcore::Method::kRk35);
  const double dt = 0.5 * s.disc->metrics().min_spacing_vertical / 347.0;
  for (int k = 0; k < 1000; ++k) stepper.step(q, dt);
  for (int i = 0; i < q.num_dofs; ++i) {
    CHECK(std::fabs(q.field(kRho)[i]) <= 1e-7 * s.ref->rho0[i]);
    CHECK(std::fabs(q.field(kTheta)[i]) <= 1e-7 * s.ref->theta0[i]);
  }
  // Velocities relative to the sound speed.
  CHECK(max_abs(q.field(kMomZ), q.num_dofs) <= 1e-7 * 347.0);
}

TEST_CASE("wavefront speed") {
  const double c = 347.32, d = 1.0e7, sigma = 600.0;
  std::vector<double> t, v, v2;
  for (double s = 0.0; s <= 70000.0; s += 10.0) {
    t.push_back(s);
    v.push_back(-std::exp(-std::pow((s - d / c) / sigma, 2)));
    v2.push_back(std::exp(-std::pow((s - 2 * d / c) / sigma, 2)));
  }
  CHECK(wavefront_speed(t, v, d) == doctest::Approx(c).epsilon(0.005));
  CHECK(differential_wavefront_speed(t, v, d, v2, 2 * d) == doctest::Approx(c).epsilon(0.005));
  // Parabolic refinement beats the sample grid.
  CHECK(std::fabs(arrival_time(t, v) - d / c) < 1.0);
  // Small ringing before the front is skipped.
  std::vector<double> ring = v;
  ring[10] = 0.01;
  CHECK(arrival_time(t, ring) == doctest::Approx(d / c).epsilon(1e-3));

  std::vector<double> mono(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) mono[i] = t[i];
  CHECK_THROWS_AS(arrival_time(t, mono), Error);
  CHECK_THROWS_AS(arrival_time(t, std::vector<double>(t.size(), 0.0)), Error);
}

TEST_CASE("focus crossing time") {
  // Derivative of a Gaussian: lobes of opposite sign around the focus time.
  const double tf = 57600.0, sigma = 900.0;
  std::vector<double> t, v;
  for (double s = 0.0; s <= 70000.0; s += 10.0) {
    t.push_back(s);
    const double x = (s - tf) / sigma;
    v.push_back(x * std::exp(-x * x));
  }
  CHECK(focus_crossing_time(t, v) == doctest::Approx(tf).epsilon(1e-6));
  // A peak that never changes sign has no crossing.
  std::vector<double> bump(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) bump[i] = std::exp(-std::pow((t[i] - tf) / sigma, 2));
  CHECK_THROWS_AS(focus_crossing_time(t, bump), Error);
}

TEST_CASE("convergence order estimate") {
  const std::vector<double> dts{2.0, 1.0, 0.5, 0.25};
  for (int p : {2, 3}) {
    std::vector<std::vector<double>> sol;
    for (double dt : dts) sol.push_back({1.0 + 0.1 * std::pow(dt, p), -2.0 + 0.03 * std::pow(dt, p)});
    const ConvergenceResult r = convergence_order(dts, sol);
    CHECK(r.has_order);
    CHECK(r.order == doctest::Approx(p).epsilon(1e-10));
    CHECK(r.error_vs_finest.back() == 0.0);
    CHECK(r.differences.size() == 3);
  }
  std::vector<std::vector<double>> exact(3, std::vector<double>{1.0, 2.0});
  const ConvergenceResult sat = convergence_order(std::vector<double>{2.0, 1.0, 0.5}, exact);
  CHECK(sat.saturated);
  CHECK_FALSE(sat.has_order);
  const ConvergenceResult nm =
      convergence_order(std::vector<double>{2.0, 1.0, 0.5}, {{1.0}, {1.1}, {1.3}});
  CHECK_FALSE(nm.has_order);
  CHECK(nm.note == "non-monotone differences");
  CHECK_THROWS_AS(convergence_order(std::vector<double>{2.0, 1.0}, {{1.0}, {1.0}}), ConfigError);
  CHECK_THROWS_AS(convergence_order(std::vector<double>{2.0, 1.5, 0.5}, {{1.0}, {1.0}, {1.0}}), ConfigError);
  CHECK(log_log_slope(std::vector<double>{1.0, 2.0, 4.0}, std::vector<double>{3.0, 12.0, 48.0}) ==
        doctest::Approx(2.0));
}
