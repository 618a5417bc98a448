#include "qnsp/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "qnsp/checkpoint.hpp"
#include "qnsp/errors.hpp"

namespace qnsp {

void StepScheme::validate() const {
  if (!(dt > 0)) throw ConfigError("scheme.dt must be positive");
  if (!(safety > 0 && safety <= 1)) throw ConfigError("scheme.safety must be in (0,1]");
  if (rk_order < 2 || rk_order > 4) throw ConfigError("scheme.rk_order must be 2, 3 or 4");
}

Grid RunConfig::grid() const { return Grid(dim, n, length); }

ModelParams RunConfig::effective_params() const {
  return paper_faithful ? ModelParams::paper_faithful(params) : params;
}

SpectralField RunConfig::initial_density() const {
  const Grid g = grid();
  const auto& in = initial;
  if (in.preset == "constant") return SpectralField::constant(g, in.mean);
  if (in.preset == "cosine") {
    return SpectralField::sample(g, [&](const std::array<double, 3>& x) {
      double c = 1.0;
      for (int a = 0; a < g.dim(); ++a)
        c *= std::cos(2 * std::numbers::pi * in.mode * x[a] / g.length(a));
      return in.mean + in.amplitude * c;
    });
  }
  if (in.preset == "gaussian-density") {
    auto f = SpectralField::sample(g, [&](const std::array<double, 3>& x) {
      double d2 = 0;
      for (int a = 0; a < g.dim(); ++a) {
        double dx = x[a] - g.length(a) / 2;
        dx -= g.length(a) * std::round(dx / g.length(a));
        d2 += dx * dx;
      }
      return in.mean + in.amplitude * std::exp(-d2 / (2 * in.width * in.width));
    });
    return f;
  }
  if (in.preset == "vacuum-touching") {
    // min rho = 0 exactly at the origin grid point; diagnostics only
    return SpectralField::sample(g, [&](const std::array<double, 3>& x) {
      return 0.5 * in.amplitude *
             (1.0 - std::cos(2 * std::numbers::pi * in.mode * x[0] / g.length(0)));
    });
  }
  throw ConfigError("unknown initial preset '" + in.preset + "'");
}

State RunConfig::initial_state(const DopingProfile& dop) const {
  const Grid g = grid();
  const ModelParams p = effective_params();
  SpectralField rho = dealias(initial_density());
  VectorField u = VectorField::zeros(g);
  if (!initial.pin_velocity && initial.velocity_amplitude != 0.0) {
    u.comp[0] = SpectralField::sample(g, [&](const std::array<double, 3>& x) {
      return initial.velocity_amplitude *
             std::sin(2 * std::numbers::pi * initial.velocity_mode * x[0] /
                      g.length(0));
    });
  }
  VectorField mom;
  for (int a = 0; a < g.dim(); ++a) mom.comp.push_back(dealias(rho * u[a]));
  State s{0.0, rho, mom, solve_poisson(rho, dop, p)};
  validate_state(s, p);
  return s;
}

DopingProfile RunConfig::doping_profile(double target_mass, double* shift) const {
  const Grid g = grid();
  DopingProfile dp = doping_uniform(g, target_mass);
  if (doping.preset == "uniform") {
    if (shift) *shift = 0.0;
    return dp;
  }
  if (doping.preset == "cosine") {
    SpectralField raw = SpectralField::sample(g, [&](const std::array<double, 3>& x) {
      return target_mass / g.volume() +
             doping.amplitude *
                 std::cos(2 * std::numbers::pi * doping.mode * x[0] / g.length(0));
    });
    return DopingProfile::mean_shifted(std::move(raw), target_mass, shift);
  }
  if (doping.preset == "gaussian-bump") {
    DopingProfile raw = doping_gaussian_bump(g, target_mass, doping.width,
                                             doping.amplitude);
    return DopingProfile::mean_shifted(raw.g, target_mass, shift);
  }
  if (doping.preset == "file") {
    CheckpointField cf = load_checkpoint_field(doping.path);
    if (cf.fields.size() != 1) throw ConfigError("doping checkpoint must be scalar");
    if (cf.fields[0].grid() != g)
      throw ConfigError("doping checkpoint grid does not match the run grid");
    return DopingProfile::mean_shifted(cf.fields[0], target_mass, shift);
  }
  throw ConfigError("unknown doping preset '" + doping.preset + "'");
}

void RunConfig::validate() const {
  Grid g = grid();  // grid invariants
  (void)g;
  effective_params().validate();
  scheme.validate();
  if (T < 0) throw ConfigError("T must be nonnegative");
  if (save_every < 1) throw ConfigError("save_every must be >= 1");
  if (initial.preset == "vacuum-touching") {
    if (mode == RunMode::galerkin)
      throw ConfigError(
          "vacuum-touching initial data is rejected in galerkin mode "
          "(the weighted mass matrix degenerates)");
    if (params.eta > 0 || params.delta > 0)
      throw ConfigError("vacuum-touching data requires eta = delta = 0");
    if (params.bohm_form != BohmForm::sqrt_split)
      throw ConfigError(
          "vacuum-touching data requires bohm_form = sqrt_split (the other "
          "forms need log rho / 1/sqrt(rho))");
  }
  if (mode == RunMode::galerkin && galerkin_modes < 1)
    throw ConfigError("galerkin_modes must be >= 1");
  if (mode == RunMode::galerkin && scheme.adaptive)
    throw ConfigError("adaptive dt control is collocation-only");
}

namespace {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

const char* bohm_name(BohmForm f) {
  switch (f) {
    case BohmForm::divergence_log_rho: return "divergence_log_rho";
    case BohmForm::gradient_ratio: return "gradient_ratio";
    case BohmForm::sqrt_split: return "sqrt_split";
  }
  return "?";
}

BohmForm bohm_from_name(const std::string& s) {
  if (s == "divergence_log_rho") return BohmForm::divergence_log_rho;
  if (s == "gradient_ratio") return BohmForm::gradient_ratio;
  if (s == "sqrt_split") return BohmForm::sqrt_split;
  throw ConfigError("unknown bohm_form '" + s + "'");
}

}  // namespace

std::string RunConfig::canonical_text(const std::string& exclude_key) const {
  std::map<std::string, std::string> kv;
  kv["grid.dim"] = std::to_string(dim);
  for (int a = 0; a < dim; ++a) {
    kv["grid.n" + std::to_string(a)] = std::to_string(n[a]);
    kv["grid.length" + std::to_string(a)] = fmt_double(length[a]);
  }
  kv["params.gamma"] = fmt_double(params.gamma);
  kv["params.eps"] = fmt_double(params.eps);
  kv["params.mu"] = fmt_double(params.mu);
  kv["params.delta"] = fmt_double(params.delta);
  kv["params.eta"] = fmt_double(params.eta);
  kv["params.r0"] = fmt_double(params.r0);
  kv["params.r1"] = fmt_double(params.r1);
  kv["params.rho_floor"] = fmt_double(params.rho_floor);
  kv["params.vacuum_threshold"] = fmt_double(params.vacuum_threshold);
  kv["params.compat_tol_rel"] = fmt_double(params.compat_tol_rel);
  kv["params.bohm_form"] = bohm_name(params.bohm_form);
  kv["params.eps_coupling_transpose"] = params.eps_coupling_transpose ? "1" : "0";
  kv["params.paper_faithful"] = paper_faithful ? "1" : "0";
  kv["initial.preset"] = initial.preset;
  kv["initial.mean"] = fmt_double(initial.mean);
  kv["initial.amplitude"] = fmt_double(initial.amplitude);
  kv["initial.mode"] = std::to_string(initial.mode);
  kv["initial.velocity_amplitude"] = fmt_double(initial.velocity_amplitude);
  kv["initial.velocity_mode"] = std::to_string(initial.velocity_mode);
  kv["initial.width"] = fmt_double(initial.width);
  kv["initial.pin_velocity"] = initial.pin_velocity ? "1" : "0";
  kv["doping.preset"] = doping.preset;
  kv["doping.mode"] = std::to_string(doping.mode);
  kv["doping.amplitude"] = fmt_double(doping.amplitude);
  kv["doping.width"] = fmt_double(doping.width);
  kv["doping.path"] = doping.path;
  kv["time.T"] = fmt_double(T);
  kv["time.dt"] = fmt_double(scheme.dt);
  kv["time.safety"] = fmt_double(scheme.safety);
  kv["time.adaptive"] = scheme.adaptive ? "1" : "0";
  kv["time.scheme"] = scheme.kind == SchemeKind::imex_integrating_factor
                          ? "imex_integrating_factor"
                          : "explicit_rk4_reference";
  kv["time.rk_order"] = std::to_string(scheme.rk_order);
  kv["time.save_every"] = std::to_string(save_every);
  kv["time.checkpoint_every"] = std::to_string(checkpoint_every);
  kv["run.mode"] = mode == RunMode::collocation ? "collocation" : "galerkin";
  kv["run.galerkin_modes"] = std::to_string(galerkin_modes);
  std::ostringstream os;
  for (const auto& [k, v] : kv) {
    if (k == exclude_key) continue;
    os << k << "=" << v << "\n";
  }
  return os.str();
}

std::uint64_t RunConfig::hash(const std::string& exclude_key) const {
  // FNV-1a
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : canonical_text(exclude_key)) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

namespace {

struct RawConfig {
  // section -> key -> value
  std::map<std::string, std::map<std::string, std::string>> kv;
  std::string origin;

  bool has(const std::string& sec, const std::string& key) const {
    auto s = kv.find(sec);
    return s != kv.end() && s->second.count(key) > 0;
  }
  std::string get(const std::string& sec, const std::string& key) const {
    return kv.at(sec).at(key);
  }
  double num(const std::string& sec, const std::string& key) const {
    const std::string v = get(sec, key);
    try {
      std::size_t pos = 0;
      double x = std::stod(v, &pos);
      while (pos < v.size() && std::isspace(static_cast<unsigned char>(v[pos]))) ++pos;
      if (pos != v.size()) throw std::invalid_argument(v);
      return x;
    } catch (const std::exception&) {
      throw ConfigError(origin + ": [" + sec + "] " + key +
                        " expects a number, got '" + v + "'");
    }
  }
  int integer(const std::string& sec, const std::string& key) const {
    const double x = num(sec, key);
    if (x != std::floor(x))
      throw ConfigError(origin + ": [" + sec + "] " + key + " expects an integer");
    return static_cast<int>(x);
  }
  bool flag(const std::string& sec, const std::string& key) const {
    const std::string v = get(sec, key);
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError(origin + ": [" + sec + "] " + key + " expects a boolean");
  }
};

RawConfig tokenize(const std::string& text, const std::string& origin) {
  RawConfig raw;
  raw.origin = origin;
  std::istringstream is(text);
  std::string line, section;
  int lineno = 0;
  auto trim = [](std::string s) {
    const char* ws = " \t\r";
    auto b = s.find_first_not_of(ws);
    auto e = s.find_last_not_of(ws);
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  while (std::getline(is, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError(origin + ":" + std::to_string(lineno) + ": malformed section");
      section = trim(line.substr(1, line.size() - 2));
      raw.kv[section];  // register even if empty so typos are caught
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(origin + ":" + std::to_string(lineno) +
                        ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (section.empty())
      throw ConfigError(origin + ":" + std::to_string(lineno) +
                        ": key outside a [section]");
    if (raw.kv[section].count(key))
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": duplicate key '" +
                        key + "' in [" + section + "]");
    raw.kv[section][key] = val;
  }
  return raw;
}

}  // namespace

RunConfig parse_config_text(const std::string& text, const std::string& origin) {
  const RawConfig raw = tokenize(text, origin);
  RunConfig c;

  static const std::map<std::string, std::vector<std::string>> known = {
      {"grid", {"dim", "n", "length"}},
      {"params",
       {"gamma", "eps", "mu", "delta", "eta", "r0", "r1", "rho_floor",
        "vacuum_threshold", "compat_tol_rel", "bohm_form",
        "eps_coupling_transpose", "paper_faithful"}},
      {"initial",
       {"preset", "mean", "amplitude", "mode", "velocity_amplitude",
        "velocity_mode", "width", "pin_velocity"}},
      {"doping", {"preset", "mode", "amplitude", "width", "path"}},
      {"time",
       {"T", "dt", "safety", "scheme", "rk_order", "adaptive", "save_every",
        "checkpoint_every"}},
      {"run", {"mode", "galerkin_modes"}},
      {"output", {"dir"}},
      {"sweep", {"param", "start", "ratio", "count"}}};
  for (const auto& [sec, keys] : raw.kv) {
    auto it = known.find(sec);
    if (it == known.end())
      throw ConfigError(origin + ": unknown section [" + sec + "]");
    for (const auto& [k, v] : keys) {
      (void)v;
      bool ok = false;
      for (const auto& kn : it->second) ok = ok || kn == k;
      if (!ok)
        throw ConfigError(origin + ": unknown key '" + k + "' in [" + sec + "]");
    }
  }

  if (raw.has("grid", "dim")) c.dim = raw.integer("grid", "dim");
  if (raw.has("grid", "n")) {
    std::istringstream ns(raw.get("grid", "n"));
    std::string tok;
    int a = 0;
    while (std::getline(ns, tok, ',')) {
      if (a >= 3) throw ConfigError(origin + ": [grid] n lists too many axes");
      c.n[a++] = std::stoi(tok);
    }
    for (; a < 3; ++a) c.n[a] = c.n[0];
  }
  if (raw.has("grid", "length")) {
    std::istringstream ls(raw.get("grid", "length"));
    std::string tok;
    int a = 0;
    while (std::getline(ls, tok, ',')) {
      if (a >= 3) throw ConfigError(origin + ": [grid] length lists too many axes");
      c.length[a++] = std::stod(tok);
    }
    for (; a < 3; ++a) c.length[a] = c.length[0];
  }

  auto pnum = [&](const char* key, double& dst) {
    if (raw.has("params", key)) dst = raw.num("params", key);
  };
  pnum("gamma", c.params.gamma);
  pnum("eps", c.params.eps);
  pnum("mu", c.params.mu);
  pnum("delta", c.params.delta);
  pnum("eta", c.params.eta);
  pnum("r0", c.params.r0);
  pnum("r1", c.params.r1);
  pnum("rho_floor", c.params.rho_floor);
  pnum("vacuum_threshold", c.params.vacuum_threshold);
  pnum("compat_tol_rel", c.params.compat_tol_rel);
  if (raw.has("params", "bohm_form"))
    c.params.bohm_form = bohm_from_name(raw.get("params", "bohm_form"));
  if (raw.has("params", "eps_coupling_transpose"))
    c.params.eps_coupling_transpose = raw.flag("params", "eps_coupling_transpose");
  if (raw.has("params", "paper_faithful"))
    c.paper_faithful = raw.flag("params", "paper_faithful");

  if (raw.has("initial", "preset")) c.initial.preset = raw.get("initial", "preset");
  if (raw.has("initial", "mean")) c.initial.mean = raw.num("initial", "mean");
  if (raw.has("initial", "amplitude"))
    c.initial.amplitude = raw.num("initial", "amplitude");
  if (raw.has("initial", "mode")) c.initial.mode = raw.integer("initial", "mode");
  if (raw.has("initial", "velocity_amplitude"))
    c.initial.velocity_amplitude = raw.num("initial", "velocity_amplitude");
  if (raw.has("initial", "velocity_mode"))
    c.initial.velocity_mode = raw.integer("initial", "velocity_mode");
  if (raw.has("initial", "width")) c.initial.width = raw.num("initial", "width");
  if (raw.has("initial", "pin_velocity"))
    c.initial.pin_velocity = raw.flag("initial", "pin_velocity");

  if (raw.has("doping", "preset")) c.doping.preset = raw.get("doping", "preset");
  if (raw.has("doping", "mode")) c.doping.mode = raw.integer("doping", "mode");
  if (raw.has("doping", "amplitude"))
    c.doping.amplitude = raw.num("doping", "amplitude");
  if (raw.has("doping", "width")) c.doping.width = raw.num("doping", "width");
  if (raw.has("doping", "path")) c.doping.path = raw.get("doping", "path");

  if (raw.has("time", "T")) c.T = raw.num("time", "T");
  if (raw.has("time", "dt")) c.scheme.dt = raw.num("time", "dt");
  if (raw.has("time", "safety")) c.scheme.safety = raw.num("time", "safety");
  if (raw.has("time", "rk_order")) c.scheme.rk_order = raw.integer("time", "rk_order");
  if (raw.has("time", "adaptive")) c.scheme.adaptive = raw.flag("time", "adaptive");
  if (raw.has("time", "scheme")) {
    const std::string s = raw.get("time", "scheme");
    if (s == "imex_integrating_factor")
      c.scheme.kind = SchemeKind::imex_integrating_factor;
    else if (s == "explicit_rk4_reference")
      c.scheme.kind = SchemeKind::explicit_rk4_reference;
    else
      throw ConfigError(origin + ": unknown scheme '" + s + "'");
  }
  if (raw.has("time", "save_every")) c.save_every = raw.integer("time", "save_every");
  if (raw.has("time", "checkpoint_every"))
    c.checkpoint_every = raw.integer("time", "checkpoint_every");

  if (raw.has("run", "mode")) {
    const std::string m = raw.get("run", "mode");
    if (m == "collocation")
      c.mode = RunMode::collocation;
    else if (m == "galerkin")
      c.mode = RunMode::galerkin;
    else
      throw ConfigError(origin + ": unknown run mode '" + m + "'");
  }
  if (raw.has("run", "galerkin_modes"))
    c.galerkin_modes = raw.integer("run", "galerkin_modes");
  if (raw.has("output", "dir")) c.output_dir = raw.get("output", "dir");

  c.validate();
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return parse_config_text(os.str(), path);
}

RunConfig default_desk_config() {
  RunConfig c;
  c.dim = 1;
  c.n = {128, 8, 8};
  c.params.gamma = 2.0;
  c.params.eps = 1e-3;
  c.params.mu = 1e-6;
  c.params.delta = 1e-22;
  c.params.eta = 1e-5;
  c.params.r0 = 1e-3;
  c.params.r1 = 1e-3;
  c.initial.preset = "cosine";
  c.initial.mean = 1.0;
  c.initial.amplitude = 0.04;
  c.initial.velocity_amplitude = 0.04;
  c.T = 1.0;
  c.scheme.dt = 1.25e-4;
  c.save_every = 1;
  return c;
}

RunConfig smoke3d_config() {
  RunConfig c = default_desk_config();
  c.dim = 3;
  c.n = {16, 16, 16};
  c.params.delta = 1e-8;
  c.initial.amplitude = 0.02;
  c.initial.velocity_amplitude = 0.02;
  c.T = 0.05;
  c.scheme.dt = 5e-4;
  return c;
}

}  // namespace qnsp
