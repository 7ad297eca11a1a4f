#include "dycore/cli/config.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

namespace dycore::cli {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  double x = 0.0;
  try {
    x = std::stod(v, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos == 0 || pos != v.size() || !std::isfinite(x)) throw ConfigError(key + ": expected a number, got '" + v + "'");
  return x;
}

int to_int(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  long x = 0;
  try {
    x = std::stol(v, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos == 0 || pos != v.size()) throw ConfigError(key + ": expected an integer, got '" + v + "'");
  return static_cast<int>(x);
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError(key + ": expected true or false, got '" + v + "'");
}

template <class E>
E to_enum(const std::string& key, const std::string& v, std::initializer_list<std::pair<const char*, E>> options) {
  std::string names;
  for (const auto& [name, value] : options) {
    if (v == name) return value;
    names += names.empty() ? name : std::string(" | ") + name;
  }
  throw ConfigError(key + ": expected " + names + ", got '" + v + "'");
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

using Setter = std::function<void(RunConfig&, const std::string&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  using namespace euler;
  using namespace imexcore;
  static const std::map<std::string, Setter> table = {
      {"case",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         c.case_kind = to_enum<CaseKind>(
             k, v, {{"acoustic", CaseKind::kAcoustic}, {"bubble", CaseKind::kBubble}, {"rest-state", CaseKind::kRestState}});
       }},
      {"set",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         c.set = to_enum<EquationSet>(k, v, {{"set2nc", EquationSet::kSet2NC}, {"set2c", EquationSet::kSet2C}});
       }},
      {"disc",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         c.disc = to_enum<specgrid::Galerkin>(
             k, v, {{"cg", specgrid::Galerkin::kContinuous}, {"dg", specgrid::Galerkin::kDiscontinuous}});
       }},
      {"integrator",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         c.integrator = to_enum<Method>(k, v, {{"rk35", Method::kRk35}, {"ark2", Method::kArk2}, {"bdf2", Method::kBdf2}});
       }},
      {"imex",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         c.imex = to_enum<ImexMode>(k, v, {{"none", ImexMode::kNone}, {"3d", ImexMode::k3D}, {"1d", ImexMode::k1D}});
       }},
      {"form",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         c.form = to_enum<ImplicitForm>(k, v, {{"standard", ImplicitForm::kStandard}, {"schur", ImplicitForm::kSchur}});
       }},
      {"solver",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         c.solver = to_enum<SolverKind>(k, v,
                                        {{"gmres", SolverKind::kGmres},
                                         {"bicgstab", SolverKind::kBicgstab},
                                         {"richardson", SolverKind::kRichardson},
                                         {"direct", SolverKind::kDirect}});
       }},
      {"precond_order", [](RunConfig& c, const std::string& k, const std::string& v) { c.precond_order = to_int(k, v); }},
      {"tol", [](RunConfig& c, const std::string& k, const std::string& v) { c.tol = to_double(k, v); }},
      {"max_iter", [](RunConfig& c, const std::string& k, const std::string& v) { c.max_iter = to_int(k, v); }},
      {"restart", [](RunConfig& c, const std::string& k, const std::string& v) { c.restart = to_int(k, v); }},
      {"check_every", [](RunConfig& c, const std::string& k, const std::string& v) { c.check_every = to_int(k, v); }},
      {"dt", [](RunConfig& c, const std::string& k, const std::string& v) { c.dt = to_double(k, v); }},
      {"courant", [](RunConfig& c, const std::string& k, const std::string& v) { c.courant = to_double(k, v); }},
      {"end_time", [](RunConfig& c, const std::string& k, const std::string& v) { c.end_time = to_double(k, v); }},
      {"steps", [](RunConfig& c, const std::string& k, const std::string& v) { c.steps = to_int(k, v); }},
      {"mesh",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         c.topology = to_enum<Topology>(k, v, {{"box", Topology::kBox}, {"sphere", Topology::kSphere}});
       }},
      {"order", [](RunConfig& c, const std::string& k, const std::string& v) { c.order = to_int(k, v); }},
      {"nx", [](RunConfig& c, const std::string& k, const std::string& v) { c.nx = to_int(k, v); }},
      {"nz", [](RunConfig& c, const std::string& k, const std::string& v) { c.nz = to_int(k, v); }},
      {"lx", [](RunConfig& c, const std::string& k, const std::string& v) { c.lx = to_double(k, v); }},
      {"lz", [](RunConfig& c, const std::string& k, const std::string& v) { c.lz = to_double(k, v); }},
      {"ne_panel", [](RunConfig& c, const std::string& k, const std::string& v) { c.ne_panel = to_int(k, v); }},
      {"ne_vert", [](RunConfig& c, const std::string& k, const std::string& v) { c.ne_vert = to_int(k, v); }},
      {"radius", [](RunConfig& c, const std::string& k, const std::string& v) { c.radius = to_double(k, v); }},
      {"depth", [](RunConfig& c, const std::string& k, const std::string& v) { c.depth = to_double(k, v); }},
      {"theta0", [](RunConfig& c, const std::string& k, const std::string& v) { c.theta0 = to_double(k, v); }},
      {"brunt", [](RunConfig& c, const std::string& k, const std::string& v) { c.brunt = to_double(k, v); }},
      {"bubble_theta", [](RunConfig& c, const std::string& k, const std::string& v) { c.bubble.theta_c = to_double(k, v); }},
      {"bubble_radius", [](RunConfig& c, const std::string& k, const std::string& v) { c.bubble.radius = to_double(k, v); }},
      {"bubble_xc", [](RunConfig& c, const std::string& k, const std::string& v) { c.bubble.xc = to_double(k, v); }},
      {"bubble_zc", [](RunConfig& c, const std::string& k, const std::string& v) { c.bubble.zc = to_double(k, v); }},
      {"pulse_amplitude",
       [](RunConfig& c, const std::string& k, const std::string& v) { c.acoustic.delta_p = to_double(k, v); }},
      {"pulse_radius", [](RunConfig& c, const std::string& k, const std::string& v) { c.acoustic.r_c = to_double(k, v); }},
      {"pulse_mode",
       [](RunConfig& c, const std::string& k, const std::string& v) { c.acoustic.vertical_mode = to_int(k, v); }},
      {"pulse_lon",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         c.acoustic.lon0 = to_double(k, v) * bench::kPi / 180.0;
       }},
      {"pulse_lat",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         c.acoustic.lat0 = to_double(k, v) * bench::kPi / 180.0;
       }},
      {"pulse_perturb",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         c.acoustic.perturb_density = to_enum<bool>(k, v, {{"density", true}, {"theta", false}});
       }},
      {"probes", [](RunConfig& c, const std::string&, const std::string& v) { c.probes = split_list(v); }},
      {"output_dir", [](RunConfig& c, const std::string&, const std::string& v) { c.output_dir = v; }},
      {"snapshot_interval",
       [](RunConfig& c, const std::string& k, const std::string& v) { c.snapshot_interval = to_int(k, v); }},
      {"diag_interval", [](RunConfig& c, const std::string& k, const std::string& v) { c.diag_interval = to_int(k, v); }},
      {"threads", [](RunConfig& c, const std::string& k, const std::string& v) { c.threads = to_int(k, v); }},
      {"quiet", [](RunConfig& c, const std::string& k, const std::string& v) { c.quiet = to_bool(k, v); }},
  };
  return table;
}

}  // namespace

void apply_setting(RunConfig& cfg, const std::string& key_in, const std::string& value_in) {
  const std::string key = trim(key_in), value = trim(value_in);
  const auto it = setters().find(key);
  if (it == setters().end()) throw ConfigError("unknown key '" + key + "'");
  it->second(cfg, key, value);
  cfg.given[key] = value;
}

void apply_config_text(RunConfig& cfg, const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value', got '" + line + "'");
    try {
      apply_setting(cfg, line.substr(0, eq), line.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
}

namespace {
void apply_overrides(RunConfig& cfg, const std::vector<std::string>& overrides) {
  for (const std::string& o : overrides) {
    std::string s = o;
    if (s.rfind("--", 0) == 0) s = s.substr(2);
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError("override '" + o + "' must look like --key=value");
    apply_setting(cfg, s.substr(0, eq), s.substr(eq + 1));
  }
}
}  // namespace

RunConfig parse_config_text(const std::string& text, const std::vector<std::string>& overrides) {
  RunConfig cfg;
  apply_config_text(cfg, text);
  apply_overrides(cfg, overrides);
  finalize(cfg);
  validate(cfg);
  return cfg;
}

RunConfig parse_config(const std::string& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), overrides);
}

void finalize(RunConfig& cfg) {
  const auto given = [&](const char* k) { return cfg.given.count(k) > 0; };
  if (!given("integrator")) cfg.integrator = cfg.imex == ImexMode::kNone ? imexcore::Method::kRk35 : imexcore::Method::kArk2;
  if (!given("imex") && cfg.integrator != imexcore::Method::kRk35) cfg.imex = ImexMode::k3D;
  if (!given("mesh")) cfg.topology = cfg.case_kind == CaseKind::kAcoustic ? Topology::kSphere : Topology::kBox;
  if (!given("order")) cfg.order = cfg.topology == Topology::kSphere ? 4 : 7;
  if (!given("probes") && cfg.topology == Topology::kBox) cfg.probes.clear();

  cfg.bubble.lx = cfg.lx;
  cfg.bubble.lz = cfg.lz;
  cfg.bubble.nx = cfg.nx;
  cfg.bubble.nz = cfg.nz;
  cfg.bubble.order = cfg.order;
  cfg.bubble.theta0 = cfg.theta0;
  cfg.acoustic.r_e = cfg.radius;
  cfg.acoustic.r_t = cfg.depth;
  cfg.acoustic.theta0 = cfg.theta0;
  cfg.acoustic.ne_panel = cfg.ne_panel;
  cfg.acoustic.ne_vert = cfg.ne_vert;
  cfg.acoustic.order = cfg.order;
  if (!given("pulse_radius")) cfg.acoustic.r_c = cfg.radius / 3.0;
}

void validate(const RunConfig& cfg) {
  using imexcore::Method;
  using imexcore::SolverKind;
  if (cfg.solver == SolverKind::kDirect && cfg.imex != ImexMode::k1D)
    throw ConfigError("invalid combination: solver=direct requires imex=1d");
  if (cfg.disc == specgrid::Galerkin::kDiscontinuous && cfg.form == imexcore::ImplicitForm::kSchur)
    throw ConfigError("unsupported combination: form=schur with disc=dg (the Schur form does not converge for dG)");
  if (cfg.disc == specgrid::Galerkin::kDiscontinuous && cfg.set != euler::EquationSet::kSet2C)
    throw ConfigError("invalid combination: disc=dg requires set=set2c");
  if (cfg.integrator == Method::kRk35 && cfg.imex != ImexMode::kNone)
    throw ConfigError("invalid combination: integrator=rk35 is explicit, use imex=none");
  if (cfg.integrator != Method::kRk35 && cfg.imex == ImexMode::kNone)
    throw ConfigError("invalid combination: IMEX integrators need imex=3d or imex=1d");
  if (cfg.solver == SolverKind::kRichardson && cfg.precond_order < 0)
    throw ConfigError("invalid combination: solver=richardson requires precond_order >= 0");
  if (cfg.case_kind == CaseKind::kAcoustic && cfg.topology != Topology::kSphere)
    throw ConfigError("invalid combination: case=acoustic requires mesh=sphere");
  if (cfg.case_kind == CaseKind::kBubble && cfg.topology != Topology::kBox)
    throw ConfigError("invalid combination: case=bubble requires mesh=box");
  if (cfg.order < 1) throw ConfigError("order must be at least 1");
  if (cfg.nx < 1 || cfg.nz < 1 || cfg.ne_panel < 1 || cfg.ne_vert < 1) throw ConfigError("element counts must be positive");
  if (!(cfg.lx > 0.0) || !(cfg.lz > 0.0) || !(cfg.radius > 0.0) || !(cfg.depth > 0.0))
    throw ConfigError("domain extents must be positive");
  if (!(cfg.tol > 0.0)) throw ConfigError("tol must be positive");
  if (cfg.max_iter < 1 || cfg.restart < 1 || cfg.check_every < 1)
    throw ConfigError("max_iter, restart and check_every must be positive");
  if (cfg.dt < 0.0) throw ConfigError("dt must be nonnegative (0 selects it from the Courant number)");
  if (cfg.dt == 0.0 && !(cfg.courant > 0.0)) throw ConfigError("courant must be positive");
  if (cfg.end_time < 0.0) throw ConfigError("end_time must be nonnegative");
  if (cfg.end_time == 0.0 && cfg.steps < 1) throw ConfigError("steps must be positive");
  if (cfg.threads < 1) throw ConfigError("threads must be positive");
  if (cfg.diag_interval < 1 || cfg.snapshot_interval < 0) throw ConfigError("output intervals must be nonnegative");
  if (!(cfg.theta0 > 0.0)) throw ConfigError("theta0 must be positive");
  if (cfg.case_kind == CaseKind::kBubble) cfg.bubble.validate();
  if (cfg.case_kind == CaseKind::kAcoustic) cfg.acoustic.validate();
  for (const std::string& p : cfg.probes) {
    if (cfg.topology == Topology::kSphere) {
      parse_number_list(p);
    } else if (p.find(':') == std::string::npos) {
      throw ConfigError("box probes must be x:z pairs, got '" + p + "'");
    }
  }
}

std::vector<double> parse_number_list(const std::string& text) {
  std::vector<double> out;
  for (const std::string& s : split_list(text)) out.push_back(to_double("list", s));
  if (out.empty()) throw ConfigError("expected a comma-separated list of numbers, got '" + text + "'");
  return out;
}

std::string describe(const RunConfig& cfg) {
  static const char* cases[] = {"acoustic", "bubble", "rest-state"};
  static const char* methods[] = {"rk35", "ark2", "bdf2"};
  static const char* imex[] = {"none", "3d", "1d"};
  static const char* forms[] = {"standard", "schur"};
  static const char* solvers[] = {"gmres", "bicgstab", "richardson", "direct"};
  std::ostringstream s;
  s << "case=" << cases[static_cast<int>(cfg.case_kind)]
    << " set=" << (cfg.set == euler::EquationSet::kSet2NC ? "set2nc" : "set2c")
    << " disc=" << (cfg.disc == specgrid::Galerkin::kContinuous ? "cg" : "dg")
    << " integrator=" << methods[static_cast<int>(cfg.integrator)] << " imex=" << imex[static_cast<int>(cfg.imex)];
  if (cfg.imex != ImexMode::kNone)
    s << " form=" << forms[static_cast<int>(cfg.form)] << " solver=" << solvers[static_cast<int>(cfg.solver)]
      << " precond_order=" << cfg.precond_order;
  s << " order=" << cfg.order;
  return s.str();
}

}  // namespace dycore::cli
