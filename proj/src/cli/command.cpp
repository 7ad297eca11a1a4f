#include <ostream>

#include "CLI11.hpp"
#include "dycore/cli/driver.hpp"

namespace dycore::cli {
namespace {

// CLI11 may hand `--key=value` extras back whole or split in two.
std::vector<std::string> collect_overrides(const std::vector<std::string>& extras) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < extras.size(); ++i) {
    const std::string& a = extras[i];
    if (a.rfind("--", 0) != 0) throw ConfigError("unexpected argument '" + a + "'");
    if (a.find('=') != std::string::npos) {
      out.push_back(a);
    } else {
      if (i + 1 >= extras.size()) throw ConfigError("override '" + a + "' needs a value");
      out.push_back(a + "=" + extras[++i]);
    }
  }
  return out;
}

}  // namespace

int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Spectral element nonhydrostatic dynamical core"};
  app.require_subcommand(1);

  std::string run_config;
  CLI::App* run = app.add_subcommand("run", "Run one simulation; extra --key=value flags override the file");
  run->add_option("config", run_config, "config file (key = value lines)")->required();
  run->allow_extras();

  CLI::App* study = app.add_subcommand("study", "Parameter studies");
  study->require_subcommand(1);
  std::string sp_config, courants = "1,2,5,10,15";
  double baseline = 1.0;
  CLI::App* speedup = study->add_subcommand("speedup", "IMEX wall-clock speedup over the explicit baseline");
  speedup->add_option("config", sp_config, "IMEX config file")->required();
  speedup->add_option("--courants", courants, "comma-separated Courant numbers");
  speedup->add_option("--baseline-courant", baseline, "Courant number of the explicit baseline");
  speedup->allow_extras();

  std::string cv_config, dts = "2,1,0.5";
  CLI::App* conv = study->add_subcommand("convergence", "Temporal order by dt halving");
  conv->add_option("config", cv_config, "config file")->required();
  conv->add_option("--dts", dts, "comma-separated time steps, each half the previous");
  conv->allow_extras();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (run->parsed()) {
      const RunConfig cfg = parse_config(run_config, collect_overrides(run->remaining()));
      Simulation sim(cfg);
      const RunReport r = sim.run(&err);
      print_summary(r, out);
      return r.exit_code;
    }
    if (speedup->parsed()) {
      const RunConfig cfg = parse_config(sp_config, collect_overrides(speedup->remaining()));
      const std::vector<SpeedupRow> rows = speedup_study(cfg, parse_number_list(courants), baseline, &err);
      write_speedup_csv(rows, out);
      return kExitOk;
    }
    if (conv->parsed()) {
      const RunConfig cfg = parse_config(cv_config, collect_overrides(conv->remaining()));
      const bench::ConvergenceResult r = convergence_study(cfg, parse_number_list(dts), &err);
      write_convergence_table(r, out);
      return kExitOk;
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e);
  }
  return kExitOther;
}

}  // namespace dycore::cli
