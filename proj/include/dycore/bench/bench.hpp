#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "dycore/euler/operators.hpp"

namespace dycore::bench {

inline constexpr double kEarthRadius = 6371000.0;
inline constexpr double kPi = 3.14159265358979323846;

// Pressure pulse on a spherical shell: P' = f(geodesic distance) g(height).
struct AcousticWaveConfig {
  double delta_p = 100.0;        // Pa
  int vertical_mode = 1;
  double r_e = kEarthRadius;
  double r_c = kEarthRadius / 3.0;
  double r_t = 10000.0;          // shell depth
  double lon0 = 0.0, lat0 = 0.0;  // pulse origin, radians
  double theta0 = 300.0;  // surface value; the background is isothermal at this temperature
  int ne_panel = 6, ne_vert = 3, order = 4;
  // true: density carries the perturbation at fixed theta; false: theta at fixed density.
  bool perturb_density = true;

  void validate() const;
};

// Warm cosine bubble in a neutral 2D box.
struct RisingBubbleConfig {
  double lx = 1000.0, lz = 1000.0;
  double theta_c = 0.5;  // K
  double radius = 250.0;
  double xc = 500.0, zc = 350.0;
  double theta0 = 300.0;
  int nx = 20, nz = 20, order = 7;

  void validate() const;
};

// Longitude/latitude of a Cartesian point, radians.
struct LonLat {
  double lon, lat;
};
LonLat lon_lat(const Vec3& x);
Vec3 sphere_point(double lon, double lat, double radius);
// Great-circle distance on a sphere of radius r.
double great_circle_distance(double lon0, double lat0, double lon1, double lat1, double r);
// Point at angular distance `angle` from (lon0, lat0) along the equatorward/eastward direction.
LonLat point_at_angle(double lon0, double lat0, double angle);

// Isothermal background at temperature t0: constant Brunt-Vaisala frequency g / sqrt(cp t0).
euler::BackgroundProfile isothermal_profile(double t0, const euler::GasConstants& gas = {});

double acoustic_pressure(const AcousticWaveConfig& cfg, double lon, double lat, double height);
euler::State init_acoustic_wave(const AcousticWaveConfig& cfg, const euler::EulerOperators& ops);

double bubble_theta(const RisingBubbleConfig& cfg, double x, double z);
euler::State init_rising_bubble(const RisingBubbleConfig& cfg, const euler::EulerOperators& ops);

// Integral of the total density, sum of w J (rho0 + rho').
double total_mass(const euler::State& q, const euler::EulerOperators& ops);

// Dof nearest to a point (ties broken by lowest index).
int nearest_dof(const specgrid::Discretization& disc, const Vec3& point);

struct Probe {
  std::string name;
  int dof;
};

// Time series of integral and pointwise diagnostics. Probes record the pressure perturbation.
class Diagnostics {
 public:
  explicit Diagnostics(std::vector<Probe> probes = {}) : probes_(std::move(probes)) {}

  // Throws Error when t is not strictly after the previous record.
  void record(double t, const euler::State& q, const euler::EulerOperators& ops);

  const std::vector<Probe>& probes() const { return probes_; }
  const std::vector<double>& time() const { return time_; }
  const std::vector<double>& mass() const { return mass_; }
  const std::vector<double>& max_rho() const { return max_rho_; }
  const std::vector<double>& max_theta() const { return max_theta_; }
  const std::vector<double>& probe_series(std::size_t i) const { return probe_values_[i]; }

  // `time,mass,max_rho_p,max_theta_p,<probe names>` and one row per record.
  void write_csv(std::ostream& out) const;

 private:
  std::vector<Probe> probes_;
  std::vector<double> time_, mass_, max_rho_, max_theta_;
  std::vector<std::vector<double>> probe_values_;
};

// One header line `# time=<t> <metadata>` then `x y z rho_p u v w theta_p` per dof, with
// velocities and theta' in primitive form for both equation sets.
void write_snapshot(std::ostream& out, const euler::State& q, const euler::EulerOperators& ops, double time,
                    const std::string& metadata);

// Time of the first |v| maximum that reaches `fraction` of the series maximum, refined by a
// parabola through the neighboring samples. Throws Error if there is no interior maximum.
double arrival_time(std::span<const double> t, std::span<const double> v, double fraction = 0.5);
double wavefront_speed(std::span<const double> t, std::span<const double> v, double distance);
// Sign change that follows the first peak, linearly interpolated. At a focal point (the antipode
// of a pulse on a sphere) the converging and diverging lobes have opposite signs and the
// crossing marks the focus time. Throws Error if the series never changes sign after the peak.
double focus_crossing_time(std::span<const double> t, std::span<const double> v, double fraction = 0.5);
// Speed from the arrival difference between two probes at distances d1 < d2.
double differential_wavefront_speed(std::span<const double> t, std::span<const double> v1, double d1,
                                    std::span<const double> v2, double d2);

struct ConvergenceResult {
  std::vector<double> dts;
  std::vector<double> error_vs_finest;  // per dt (the finest entry is 0)
  std::vector<double> differences;      // ||q(dt_k) - q(dt_k+1)||
  bool has_order = false;
  bool saturated = false;
  double order = 0.0;
  std::string note;
};

// Observed order from solutions at successively halved time steps: least-squares slope of
// log ||q(dt_k) - q(dt_{k+1})|| against log dt_k. Needs at least three steps, each half the
// previous; non-monotone or round-off level differences yield no order.
ConvergenceResult convergence_order(std::span<const double> dts, const std::vector<std::vector<double>>& solutions);

// Least-squares slope of log y against log x.
double log_log_slope(std::span<const double> x, std::span<const double> y);

}  // namespace dycore::bench
