#include "qnsp/sweep.hpp"

#include <cmath>
#include <cstdlib>
#include <future>
#include <sstream>

#include "qnsp/errors.hpp"

namespace qnsp {

std::vector<double> SweepSchedule::values() const {
  std::vector<double> v;
  double x = start;
  for (int i = 0; i < count; ++i) {
    v.push_back(x);
    x *= ratio;
  }
  return v;
}

void SweepSchedule::validate() const {
  if (count < 3) throw ConfigError("sweep ladders need at least 3 rungs");
  if (!(start > 0) || !(ratio > 0) || ratio >= 1)
    throw ConfigError("sweep ladder must be strictly decreasing and positive");
  if (param != "eta" && param != "delta" && param != "mu" && param != "eps" &&
      param != "eps_friction")
    throw ConfigError("unknown sweep parameter '" + param + "'");
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 3)
    throw ConfigError("slope fits need at least 3 points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const int n = static_cast<int>(x.size());
  for (int i = 0; i < n; ++i) {
    const double lx = std::log(x[i]), ly = std::log(std::max(y[i], 1e-300));
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

namespace {

RunConfig apply_param(RunConfig c, const std::string& param, double v) {
  if (param == "eta")
    c.params.eta = v;
  else if (param == "delta")
    c.params.delta = v;
  else if (param == "mu")
    c.params.mu = v;
  else if (param == "eps")
    c.params.eps = v;
  else if (param == "eps_friction") {
    c.params.r0 = v;
    c.params.r1 = v;
  }
  return c;
}

bool same_except(const RunConfig& a, const RunConfig& b,
                 const std::vector<std::string>& keys) {
  auto strip = [&](const RunConfig& c) {
    std::istringstream is(c.canonical_text());
    std::ostringstream os;
    std::string line;
    while (std::getline(is, line)) {
      bool skip = false;
      for (const auto& k : keys)
        if (line.rfind(k + "=", 0) == 0) skip = true;
      if (!skip) os << line << "\n";
    }
    return os.str();
  };
  return strip(a) == strip(b);
}

double trapz(const std::vector<double>& t, const std::vector<double>& v) {
  double s = 0;
  for (std::size_t i = 1; i < t.size(); ++i)
    s += 0.5 * (t[i] - t[i - 1]) * (v[i] + v[i - 1]);
  return s;
}

SweepRung run_rung(const RunConfig& cfg, const std::string& param, double value) {
  SweepRung rung;
  rung.value = value;
  Trajectory traj = run(cfg);
  rung.completed = traj.completed;
  rung.cause = traj.termination_cause;
  if (!traj.completed) return rung;

  const ModelParams& p = traj.params;
  std::vector<double> times;
  std::map<std::string, std::vector<double>> series;
  for (const auto& e : traj.saves) {
    const State& s = e.state;
    times.push_back(e.cert.t);
    if (param == "eta") {
      series["int_rho_m10"].push_back(
          integrate(map(s.rho, [](double v) { return std::pow(v, -10); })));
      VectorField g5 = gradient(
          dealias(map(s.rho, [](double v) { return std::pow(v, -5); })));
      series["grad_rho_m5_sq"].push_back(integrate(dot(g5, g5)));
    } else if (param == "delta") {
      VectorField g4 = gradient(laplacian_pow(s.rho, 4));
      series["grad_lap4_rho_sq"].push_back(integrate(dot(g4, g4)));
      SpectralField l5 = laplacian_pow(s.rho, 5);
      series["lap5_rho_sq"].push_back(integrate(l5 * l5));
    } else if (param == "mu") {
      const VectorField u = velocity_from_momentum(s.rho, s.mom, p);
      double acc = 0;
      for (int a = 0; a < u.dim(); ++a) {
        SpectralField lu = laplacian_pow(u[a], 1);
        acc += integrate(lu * lu);
      }
      series["lap_u_sq"].push_back(acc);
    } else {  // eps / eps_friction ladders use the damping norms
      const VectorField u = velocity_from_momentum(s.rho, s.mom, p);
      const SpectralField u2 = dot(u, u);
      series["u_sq"].push_back(integrate(u2));
      series["rho_u4"].push_back(inner(s.rho, u2 * u2));
    }
  }

  if (param == "eta") {
    rung.quantities["eta_int_rho_m10"] = value * trapz(times, series["int_rho_m10"]);
    rung.quantities["sqrt_eta_grad_rho_m5_L2L2"] =
        std::sqrt(value * trapz(times, series["grad_rho_m5_sq"]));
  } else if (param == "delta") {
    double sup = 0;
    for (double v : series["grad_lap4_rho_sq"]) sup = std::max(sup, v);
    rung.quantities["sqrt_delta_grad_lap4_rho_LinfL2"] = std::sqrt(value * sup);
    rung.quantities["sqrt_delta_lap5_rho_L2L2"] =
        std::sqrt(value * trapz(times, series["lap5_rho_sq"]));
  } else if (param == "mu") {
    const double mu_int = value * trapz(times, series["lap_u_sq"]);
    rung.quantities["mu_int_lap_u_sq"] = mu_int;
    // pairing bound sqrt(mu) ||sqrt(mu) Lap u|| ||Lap phi|| with phi = cos x
    const Grid g = cfg.grid();
    SpectralField phi = SpectralField::sample(g, [&](const std::array<double, 3>& x) {
      return std::cos(2 * std::numbers::pi * x[0] / g.length(0));
    });
    const double lap_phi = l2_norm(laplacian_pow(phi, 1)) * std::sqrt(cfg.T);
    rung.quantities["mu_pairing_bound"] =
        std::sqrt(value) * std::sqrt(mu_int) * lap_phi;
  } else {
    rung.quantities["sqrt_eps_u_L2L2"] =
        std::sqrt(value * trapz(times, series["u_sq"]));
    rung.quantities["eps14_rho14_u_L4L4"] =
        std::pow(value * trapz(times, series["rho_u4"]), 0.25);
    if (param == "eps_friction") {
      // truncated-momentum remainder with a fixed test function and truncation
      const Grid g = cfg.grid();
      auto tfs = builtin_test_functions(g, cfg.T);
      ResidualReport rr = truncated_momentum_residual(
          traj, tfs[1], 0, 1.0, TruncationFamily::standard(), p);
      rung.quantities["Rtilde_abs"] =
          std::abs(rr.terms.at("Rtilde_r0") + rr.terms.at("Rtilde_r1"));
    }
  }
  return rung;
}

}  // namespace

nlohmann::json SweepReport::to_json() const {
  nlohmann::json j;
  j["param"] = schedule.param;
  j["isolation_ok"] = isolation_ok;
  j["rungs"] = nlohmann::json::array();
  for (const auto& r : rungs) {
    nlohmann::json rj;
    rj["value"] = r.value;
    rj["completed"] = r.completed;
    if (!r.cause.empty()) rj["cause"] = r.cause;
    rj["quantities"] = r.quantities;
    j["rungs"].push_back(rj);
  }
  j["slopes"] = slopes;
  return j;
}

SweepReport sweep(const RunConfig& base, const SweepSchedule& sched) {
  sched.validate();
  SweepReport rep;
  rep.schedule = sched;
  const std::vector<double> values = sched.values();

  std::vector<RunConfig> cfgs;
  for (double v : values) cfgs.push_back(apply_param(base, sched.param, v));
  std::vector<std::string> keys;
  if (sched.param == "eps_friction")
    keys = {"params.r0", "params.r1"};
  else
    keys = {"params." + sched.param};
  for (std::size_t i = 1; i < cfgs.size(); ++i)
    rep.isolation_ok = rep.isolation_ok && same_except(cfgs[0], cfgs[i], keys);

  int nthreads = 1;
  if (const char* env = std::getenv("QNSP_THREADS")) nthreads = std::atoi(env);
  nthreads = std::max(1, nthreads);

  rep.rungs.resize(values.size());
  for (std::size_t i = 0; i < values.size(); i += nthreads) {
    std::vector<std::future<SweepRung>> futs;
    for (std::size_t k = i; k < std::min(values.size(), i + nthreads); ++k)
      futs.push_back(std::async(std::launch::async, run_rung, cfgs[k],
                                sched.param, values[k]));
    for (std::size_t k = i; k < std::min(values.size(), i + nthreads); ++k)
      rep.rungs[k] = futs[k - i].get();
  }

  // slopes over completed rungs (deterministic order)
  std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> pts;
  for (const auto& r : rep.rungs) {
    if (!r.completed) continue;
    for (const auto& [k, v] : r.quantities) {
      pts[k].first.push_back(r.value);
      pts[k].second.push_back(v);
    }
  }
  for (const auto& [k, xy] : pts)
    if (xy.first.size() >= 3) rep.slopes[k] = loglog_slope(xy.first, xy.second);
  return rep;
}

}  // namespace qnsp
