#include "dycore/cli/driver.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace dycore::cli {

using euler::State;

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e)) return kExitConfig;
  if (dynamic_cast<const SolverError*>(&e)) return kExitSolver;
  if (dynamic_cast<const NonFiniteError*>(&e)) return kExitNonFinite;
  return kExitOther;
}

double time_step_for_courant(const euler::EulerOperators& ops, const State& q, double courant) {
  const euler::CourantNumbers unit = ops.courant_numbers(q, 1.0);
  const double per_second = std::max(unit.horizontal, unit.vertical);
  if (!(per_second > 0.0)) throw ConfigError("cannot derive a time step: zero wave speed");
  return courant / per_second;
}

Simulation::Simulation(const RunConfig& cfg) : cfg_(cfg) {
  validate(cfg_);
#ifdef _OPENMP
  omp_set_num_threads(cfg_.threads);
#endif
  specgrid::ElementMesh mesh = cfg_.topology == Topology::kBox
                                   ? specgrid::build_box_mesh(cfg_.nx, cfg_.nz, cfg_.lx, cfg_.lz, cfg_.order)
                                   : specgrid::build_cubed_sphere_mesh(cfg_.ne_panel, cfg_.ne_vert, cfg_.radius,
                                                                       cfg_.depth, cfg_.order);
  disc_ = std::make_unique<specgrid::Discretization>(std::move(mesh), cfg_.disc);
  euler::BackgroundProfile profile{cfg_.theta0, 0.0};
  if (cfg_.brunt >= 0.0)
    profile.brunt_vaisala = cfg_.brunt;
  else if (cfg_.topology == Topology::kSphere)
    profile = bench::isothermal_profile(cfg_.theta0);
  ref_ = std::make_unique<euler::ReferenceState>(*disc_, profile, euler::GasConstants{});
  ops_ = std::make_unique<euler::EulerOperators>(*disc_, *ref_, cfg_.set);

  switch (cfg_.case_kind) {
    case CaseKind::kAcoustic:
      q_ = bench::init_acoustic_wave(cfg_.acoustic, *ops_);
      break;
    case CaseKind::kBubble:
      q_ = bench::init_rising_bubble(cfg_.bubble, *ops_);
      break;
    case CaseKind::kRestState:
      q_ = ops_->make_state();
      break;
  }

  dt_ = cfg_.dt > 0.0 ? cfg_.dt : time_step_for_courant(*ops_, q_, cfg_.courant);
  if (cfg_.end_time > 0.0) {
    steps_ = std::max(1, static_cast<int>(std::ceil(cfg_.end_time / dt_ - 1e-9)));
    dt_ = cfg_.end_time / steps_;
  } else {
    steps_ = cfg_.steps;
  }

  if (cfg_.imex != ImexMode::kNone) {
    problem_ = std::make_unique<imexcore::ImplicitProblem>(
        *ops_, cfg_.form, cfg_.imex == ImexMode::k3D ? imexcore::ImplicitDim::k3D : imexcore::ImplicitDim::k1D);
    imexcore::SolverSettings s;
    s.kind = cfg_.solver;
    s.pbno_order = cfg_.precond_order;
    s.tol = cfg_.tol;
    s.max_iter = cfg_.max_iter;
    s.restart = cfg_.restart;
    s.check_every = cfg_.check_every;
    solver_ = std::make_unique<imexcore::StageSolver>(*problem_, s);
  }
  stepper_ = std::make_unique<imexcore::TimeStepper>(*ops_, cfg_.integrator, solver_.get());

  std::vector<bench::Probe> probes;
  for (std::size_t k = 0; k < cfg_.probes.size(); ++k) {
    const std::string name = "probe_" + std::to_string(k + 1);
    if (cfg_.topology == Topology::kSphere) {
      const double angle = parse_number_list(cfg_.probes[k]).at(0) * bench::kPi / 180.0;
      const bench::LonLat ll = bench::point_at_angle(cfg_.acoustic.lon0, cfg_.acoustic.lat0, angle);
      const int dof =
          bench::nearest_dof(*disc_, bench::sphere_point(ll.lon, ll.lat, cfg_.radius + 0.5 * cfg_.depth));
      const bench::LonLat at = bench::lon_lat(disc_->dofs().coords[dof]);
      probes.push_back({name, dof});
      probe_distance_.push_back(
          bench::great_circle_distance(cfg_.acoustic.lon0, cfg_.acoustic.lat0, at.lon, at.lat, cfg_.radius));
    } else {
      const auto colon = cfg_.probes[k].find(':');
      const double x = parse_number_list(cfg_.probes[k].substr(0, colon)).at(0);
      const double z = parse_number_list(cfg_.probes[k].substr(colon + 1)).at(0);
      probes.push_back({name, bench::nearest_dof(*disc_, {x, disc_->dofs().coords[0][1], z})});
      probe_distance_.push_back(0.0);
    }
  }
  diag_ = bench::Diagnostics(std::move(probes));
}

Simulation::~Simulation() = default;

namespace {

std::string snapshot_name(int step) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "snapshot_%06d.txt", step);
  return buf;
}

void write_snapshot_file(const std::filesystem::path& path, const State& q, const euler::EulerOperators& ops,
                         double time, const std::string& meta) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  bench::write_snapshot(out, q, ops, time, meta);
}

}  // namespace

void Simulation::write_outputs(int step, bool final_snapshot) const {
  if (cfg_.output_dir.empty()) return;
  const std::filesystem::path dir(cfg_.output_dir);
  const bool periodic = cfg_.snapshot_interval > 0 && step % cfg_.snapshot_interval == 0;
  if (periodic || final_snapshot || step == 0)
    write_snapshot_file(dir / snapshot_name(step), q_, *ops_, step * dt_, "step=" + std::to_string(step) + " " + describe(cfg_));
}

RunReport Simulation::run(std::ostream* log) {
  RunReport r;
  r.dt = dt_;
  r.courant = ops_->courant_numbers(q_, dt_);
  if (!cfg_.output_dir.empty()) {
    std::filesystem::create_directories(cfg_.output_dir);
    std::ofstream mesh(std::filesystem::path(cfg_.output_dir) / "mesh.txt");
    specgrid::write_mesh_dump(*disc_, mesh);
  }
  const std::uint64_t flops0 = ops_->counters().flops;
  diag_.record(0.0, q_, *ops_);
  r.mass_initial = diag_.mass().back();
  write_outputs(0, false);
  if (log && !cfg_.quiet)
    *log << describe(cfg_) << " dofs=" << disc_->num_dofs() << " dt=" << dt_ << " steps=" << steps_ << '\n';

  State last_good = q_;
  const auto t0 = std::chrono::steady_clock::now();
  const int report_every = std::max(1, steps_ / 10);
  try {
    for (int k = 0; k < steps_; ++k) {
      last_good.data = q_.data;
      stepper_->step(q_, dt_);
      ops_->check_state(q_);
      r.steps = k + 1;
      const bool last = k + 1 == steps_;
      if ((k + 1) % cfg_.diag_interval == 0 || last) diag_.record((k + 1) * dt_, q_, *ops_);
      write_outputs(k + 1, last);
      if (log && !cfg_.quiet && ((k + 1) % report_every == 0))
        *log << "step " << k + 1 << "/" << steps_ << " t=" << (k + 1) * dt_ << " max|rho'|=" << diag_.max_rho().back()
             << '\n';
    }
  } catch (const std::exception& e) {
    r.exit_code = exit_code_for(e);
    r.message = e.what();
    if (!cfg_.output_dir.empty()) {
      const std::filesystem::path p = std::filesystem::path(cfg_.output_dir) / "snapshot_last_good.txt";
      try {
        write_snapshot_file(p, last_good, *ops_, r.steps * dt_, "step=" + std::to_string(r.steps) + " last-good");
        r.last_good_snapshot = p.string();
      } catch (const std::exception&) {
      }
    }
  }
  r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  r.time = r.steps * dt_;
  if (solver_) {
    const imexcore::SolveStats& s = solver_->stats();
    r.implicit_solves = s.solves;
    r.iterations = s.iterations;
    r.matvecs = s.matvecs;
    r.dots = s.dots;
    r.solve_seconds = s.seconds;
    r.setup_seconds = s.setup_seconds;
    r.mean_iterations = s.solves > 0 ? static_cast<double>(s.iterations) / s.solves : 0.0;
  }
  r.flops = ops_->counters().flops - flops0;
  r.mass_final = diag_.mass().back();
  r.max_rho = diag_.max_rho().back();
  r.max_theta = diag_.max_theta().back();
  if (cfg_.topology == Topology::kSphere && cfg_.case_kind == CaseKind::kAcoustic) {
    for (std::size_t k = 0; k < diag_.probes().size(); ++k) {
      double c = std::numeric_limits<double>::quiet_NaN();
      try {
        c = bench::wavefront_speed(diag_.time(), diag_.probe_series(k), probe_distance_[k]);
      } catch (const Error&) {
      }
      r.wave_speeds.push_back(c);
    }
  }
  if (!cfg_.output_dir.empty()) {
    std::ofstream csv(std::filesystem::path(cfg_.output_dir) / "timeseries.csv");
    diag_.write_csv(csv);
  }
  return r;
}

void print_summary(const RunReport& r, std::ostream& out) {
  out << "steps: " << r.steps << '\n'
      << "simulated time: " << r.time << " s\n"
      << "dt: " << r.dt << " s\n"
      << "courant numbers: horizontal " << r.courant.horizontal << ", vertical " << r.courant.vertical << '\n'
      << "wall time: " << r.wall_seconds << " s\n"
      << "implicit solves: " << r.implicit_solves << '\n'
      << "mean solver iterations per implicit stage: " << r.mean_iterations << '\n'
      << "total matvecs: " << r.matvecs << '\n'
      << "implicit solve time: " << r.solve_seconds << " s (setup " << r.setup_seconds << " s)\n"
      << "flops (hand counted): " << r.flops << '\n'
      << "relative mass change: " << (r.mass_final - r.mass_initial) / r.mass_initial << '\n'
      << "max |rho'|: " << r.max_rho << ", max |theta'|: " << r.max_theta << '\n';
  for (std::size_t k = 0; k < r.wave_speeds.size(); ++k)
    out << "wavefront speed probe_" << k + 1 << ": " << r.wave_speeds[k] << " m/s\n";
  if (r.exit_code != kExitOk) {
    out << "error: " << r.message << '\n';
    if (!r.last_good_snapshot.empty()) out << "last good snapshot: " << r.last_good_snapshot << '\n';
  }
}

std::vector<SpeedupRow> speedup_study(const RunConfig& tmpl, const std::vector<double>& courants,
                                      double baseline_courant, std::ostream* log) {
  if (tmpl.imex == ImexMode::kNone) throw ConfigError("speedup study needs an IMEX configuration (imex=3d or 1d)");
  if (courants.empty()) throw ConfigError("speedup study needs at least one Courant number");
  RunConfig base = tmpl;
  base.integrator = imexcore::Method::kRk35;
  base.imex = ImexMode::kNone;
  base.dt = 0.0;
  base.courant = baseline_courant;
  base.output_dir.clear();
  base.quiet = true;
  if (base.end_time <= 0.0) {
    Simulation probe(base);
    base.end_time = probe.dt() * base.steps;
  }
  Simulation explicit_run(base);
  const RunReport er = explicit_run.run(nullptr);
  if (er.exit_code != kExitOk) throw SolverError("explicit baseline failed: " + er.message);
  if (log) *log << "explicit baseline C=" << baseline_courant << " steps=" << er.steps << " wall=" << er.wall_seconds << " s\n";

  std::vector<SpeedupRow> rows;
  for (double c : courants) {
    SpeedupRow row;
    row.courant = c;
    row.wall_explicit = er.wall_seconds;
    try {
      RunConfig cfg = tmpl;
      cfg.dt = 0.0;
      cfg.courant = c;
      cfg.end_time = base.end_time;
      cfg.output_dir.clear();
      cfg.quiet = true;
      Simulation sim(cfg);
      const RunReport ir = sim.run(nullptr);
      if (ir.exit_code != kExitOk) throw Error(ir.message);
      row.wall_imex = ir.wall_seconds;
      row.speedup = er.wall_seconds / ir.wall_seconds;
      row.iters_mean = ir.mean_iterations;
      row.ok = true;
    } catch (const std::exception& e) {
      row.error = e.what();
    }
    if (log)
      *log << "C=" << c << (row.ok ? " speedup=" + std::to_string(row.speedup) : " failed: " + row.error) << '\n';
    rows.push_back(row);
  }
  return rows;
}

void write_speedup_csv(const std::vector<SpeedupRow>& rows, std::ostream& out) {
  out << "C,wall_explicit,wall_imex,speedup,iters_mean\n";
  for (const SpeedupRow& r : rows) {
    out << r.courant << ',' << r.wall_explicit << ',';
    if (r.ok)
      out << r.wall_imex << ',' << r.speedup << ',' << r.iters_mean;
    else
      out << "nan,nan,nan";
    out << '\n';
  }
}

bench::ConvergenceResult convergence_study(const RunConfig& tmpl, const std::vector<double>& dts, std::ostream* log) {
  if (dts.size() < 3) throw ConfigError("convergence study needs at least three time steps");
  double end = tmpl.end_time;
  if (end <= 0.0) end = dts.front() * tmpl.steps;
  std::vector<std::vector<double>> solutions;
  for (double dt : dts) {
    if (!(dt > 0.0)) throw ConfigError("time steps must be positive");
    const double n = end / dt;
    if (std::fabs(n - std::round(n)) > 1e-9 * n)
      throw ConfigError("end time " + std::to_string(end) + " is not a multiple of dt " + std::to_string(dt));
    RunConfig cfg = tmpl;
    cfg.dt = dt;
    cfg.end_time = end;
    cfg.output_dir.clear();
    cfg.quiet = true;
    Simulation sim(cfg);
    const RunReport r = sim.run(nullptr);
    if (r.exit_code != kExitOk) {
      if (r.exit_code == kExitNonFinite) throw NonFiniteError("run with dt=" + std::to_string(dt) + " failed: " + r.message);
      throw SolverError("run with dt=" + std::to_string(dt) + " failed: " + r.message);
    }
    if (log) *log << "dt=" << dt << " steps=" << r.steps << " wall=" << r.wall_seconds << " s\n";
    solutions.push_back(sim.state().data);
  }
  return bench::convergence_order(dts, solutions);
}

void write_convergence_table(const bench::ConvergenceResult& r, std::ostream& out) {
  out << "dt,error_vs_finest,difference_to_next\n";
  for (std::size_t k = 0; k < r.dts.size(); ++k) {
    out << r.dts[k] << ',' << r.error_vs_finest[k] << ',';
    if (k < r.differences.size()) out << r.differences[k];
    out << '\n';
  }
  if (r.has_order)
    out << "observed order: " << r.order << '\n';
  else
    out << "observed order: none (" << r.note << ")\n";
}

}  // namespace dycore::cli
