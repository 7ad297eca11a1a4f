#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "dycore/cli/config.hpp"

namespace dycore::cli {

enum ExitCode : int { kExitOk = 0, kExitConfig = 2, kExitSolver = 3, kExitNonFinite = 4, kExitOther = 1 };

// Maps an exception to the command-line exit code.
int exit_code_for(const std::exception& e);

struct RunReport {
  int exit_code = kExitOk;
  std::string message;
  int steps = 0;  // completed steps
  double time = 0.0;
  double dt = 0.0;
  double wall_seconds = 0.0;  // time stepping only, setup excluded
  double solve_seconds = 0.0;
  double setup_seconds = 0.0;
  long implicit_solves = 0;
  long iterations = 0;
  long matvecs = 0;
  long dots = 0;
  double mean_iterations = 0.0;
  euler::CourantNumbers courant;
  std::uint64_t flops = 0;
  double mass_initial = 0.0, mass_final = 0.0;
  double max_rho = 0.0, max_theta = 0.0;
  std::vector<double> wave_speeds;  // per probe, NaN when no front was seen
  std::string last_good_snapshot;
};

// Owns the discretization, operators, solver and state of one run.
class Simulation {
 public:
  // Throws ConfigError for invalid setups.
  explicit Simulation(const RunConfig& cfg);
  ~Simulation();

  // Time-steps to the end; errors are reported through the exit code, never thrown.
  RunReport run(std::ostream* log = nullptr);

  const RunConfig& config() const { return cfg_; }
  const specgrid::Discretization& disc() const { return *disc_; }
  const euler::EulerOperators& ops() const { return *ops_; }
  const euler::State& state() const { return q_; }
  const bench::Diagnostics& diagnostics() const { return diag_; }
  double dt() const { return dt_; }
  int num_steps() const { return steps_; }
  // Great-circle distance of each probe from the pulse origin (sphere), 0 on boxes.
  const std::vector<double>& probe_distances() const { return probe_distance_; }
  imexcore::StageSolver* solver() { return solver_.get(); }

 private:
  void write_outputs(int step, bool final_snapshot) const;

  RunConfig cfg_;
  std::unique_ptr<specgrid::Discretization> disc_;
  std::unique_ptr<euler::ReferenceState> ref_;
  std::unique_ptr<euler::EulerOperators> ops_;
  std::unique_ptr<imexcore::ImplicitProblem> problem_;
  std::unique_ptr<imexcore::StageSolver> solver_;
  std::unique_ptr<imexcore::TimeStepper> stepper_;
  euler::State q_;
  bench::Diagnostics diag_;
  std::vector<double> probe_distance_;
  double dt_ = 0.0;
  int steps_ = 0;
};

// Time step for a Courant number measured against the larger of the horizontal and
// vertical Courant numbers of the initial state.
double time_step_for_courant(const euler::EulerOperators& ops, const euler::State& q, double courant);

void print_summary(const RunReport& r, std::ostream& out);

struct SpeedupRow {
  double courant = 0.0;
  double wall_explicit = 0.0;
  double wall_imex = 0.0;
  double speedup = 0.0;
  double iters_mean = 0.0;
  bool ok = false;
  std::string error;
};

// Runs the explicit baseline once at `baseline_courant` and the template's IMEX variant at each
// Courant number, all to the same end time. Failed runs are recorded and the study continues.
std::vector<SpeedupRow> speedup_study(const RunConfig& tmpl, const std::vector<double>& courants,
                                      double baseline_courant = 1.0, std::ostream* log = nullptr);
void write_speedup_csv(const std::vector<SpeedupRow>& rows, std::ostream& out);

// Runs the template at each dt to the same end time and estimates the temporal order.
bench::ConvergenceResult convergence_study(const RunConfig& tmpl, const std::vector<double>& dts,
                                           std::ostream* log = nullptr);
void write_convergence_table(const bench::ConvergenceResult& r, std::ostream& out);

// Entry point of the `dycore` executable.
int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace dycore::cli
