#pragma once

#include <map>
#include <string>
#include <vector>

#include "dycore/bench/bench.hpp"
#include "dycore/imexcore/stepper.hpp"

namespace dycore::cli {

enum class CaseKind { kAcoustic, kBubble, kRestState };
enum class ImexMode { kNone, k3D, k1D };
enum class Topology { kBox, kSphere };

struct RunConfig {
  CaseKind case_kind = CaseKind::kBubble;
  euler::EquationSet set = euler::EquationSet::kSet2NC;
  specgrid::Galerkin disc = specgrid::Galerkin::kContinuous;
  imexcore::Method integrator = imexcore::Method::kRk35;
  ImexMode imex = ImexMode::kNone;
  imexcore::ImplicitForm form = imexcore::ImplicitForm::kStandard;
  imexcore::SolverKind solver = imexcore::SolverKind::kGmres;
  int precond_order = -1;  // negative: none
  double tol = 1e-6;
  int max_iter = 500;
  int restart = 50;
  int check_every = 1;

  // Time step: dt > 0 wins; otherwise dt = courant * (spacing / max wave speed).
  double dt = 0.0;
  double courant = 0.5;
  double end_time = 0.0;  // > 0: steps = ceil(end_time / dt) and dt is adjusted to land on it
  int steps = 100;

  // Mesh. Boxes use nx, nz, lx, lz; spheres use ne_panel, ne_vert, radius, depth.
  Topology topology = Topology::kBox;
  int order = 7;
  int nx = 20, nz = 20;
  double lx = 1000.0, lz = 1000.0;
  int ne_panel = 6, ne_vert = 3;
  double radius = bench::kEarthRadius, depth = 10000.0;

  // Background: constant theta (box) or isothermal (sphere) at this value unless brunt is set.
  double theta0 = 300.0;
  double brunt = -1.0;  // negative: use the case default

  bench::RisingBubbleConfig bubble;
  bench::AcousticWaveConfig acoustic;
  // Probe locations: great-circle angles in degrees at mid depth (sphere) or x:z pairs (box).
  std::vector<std::string> probes{"45", "90"};

  std::string output_dir;     // empty: no files
  int snapshot_interval = 0;  // steps between snapshots; 0: final only
  int diag_interval = 1;      // steps between diagnostics records
  int threads = 1;
  bool quiet = false;

  // Keys explicitly set by the user (file or flags).
  std::map<std::string, std::string> given;
};

// Applies one `key = value` setting. Throws ConfigError naming unknown keys and bad values.
void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value);

// Parses `key = value` lines with `#` comments.
void apply_config_text(RunConfig& cfg, const std::string& text);

// Reads the file, applies `--key=value` overrides, fills derived defaults and validates.
RunConfig parse_config(const std::string& path, const std::vector<std::string>& overrides);
RunConfig parse_config_text(const std::string& text, const std::vector<std::string>& overrides);

// Derived defaults: integrator and topology follow from the other choices when not given.
void finalize(RunConfig& cfg);
// Throws ConfigError naming the violated constraint.
void validate(const RunConfig& cfg);

std::vector<double> parse_number_list(const std::string& text);
std::string describe(const RunConfig& cfg);

}  // namespace dycore::cli
