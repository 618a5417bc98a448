#include "qnsp/ledger.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "qnsp/errors.hpp"

namespace qnsp {

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double trapz(const std::vector<double>& t, const std::vector<double>& v) {
  double s = 0;
  for (std::size_t i = 1; i < t.size(); ++i)
    s += 0.5 * (t[i] - t[i - 1]) * (v[i] + v[i - 1]);
  return s;
}

}  // namespace

std::string csv_ledger_text(const Trajectory& traj) {
  static const char* cols[] = {
      "t", "mass", "mean_v", "min_rho", "max_rho", "div_u_inf", "divu_int",
      // energy components
      "e_total", "e_kinetic", "e_cold", "e_pressure", "e_high_order",
      "e_quantum", "e_electrostatic",
      // energy dissipation ledger
      "rho_Du_sq", "eps_grad_rho_gamma2_sq", "eps_eta_grad_rho_m5_sq",
      "delta_eps_lap5_rho_sq", "r0_u_sq", "r1_rho_u4", "mu_lap_u_sq",
      "eps_rho_hess_log_rho_sq", "rho_u_sq",
      // BD functional components
      "bd_total", "bd_rho_w_sq_half", "bd_pressure", "bd_grad_sqrt_rho_sq",
      "bd_cold", "bd_log_convex", "bd_r0_log", "bd_high_order",
      "bd_electrostatic",
      // BD dissipation ledger
      "bd_rho_Au_sq", "bd_grad_rho_gamma2_sq", "bd_eps_grad_rho_gamma2_sq",
      "bd_r0_u_sq", "bd_r1_rho_u4", "bd_rho_u_sq",
      "bd_eps_rho_grad_log_rho_sq", "bd_eta_grad_rho_m5_sq",
      "bd_eps_eta_grad_rho_m5_sq", "bd_mu_lap_u_sq", "bd_delta_lap5_rho_sq",
      "bd_delta_eps_lap5_rho_sq", "bd_eps_lap_rho_sq_over_rho",
      "bd_rho_hess_log_rho_sq", "bd_eps_rho_hess_log_rho_sq",
      "bd_rho_rho_minus_g", "bd_eps_rho_rho_minus_g",
      // BD remainders
      "bd_R1", "bd_R2", "bd_R3", "bd_R4", "bd_R5", "bd_R6", "bd_valid"};

  std::ostringstream os;
  bool first = true;
  for (const char* c : cols) {
    if (!first) os << ",";
    os << c;
    first = false;
  }
  os << "\n";
  for (const auto& e : traj.saves) {
    const auto& c = e.cert;
    const auto& en = c.energy;
    const auto& bd = c.entropy;
    const double row[] = {
        c.t, c.mass, c.mean_V, c.min_rho, c.max_rho, c.div_u_inf,
        c.divu_integral,
        en.total(), en.kinetic, en.cold, en.pressure, en.high_order,
        en.quantum, en.electrostatic,
        en.rho_Du_sq, en.eps_grad_rho_gamma2_sq, en.eps_eta_grad_rho_m5_sq,
        en.delta_eps_lap5_rho_sq, en.r0_u_sq, en.r1_rho_u4, en.mu_lap_u_sq,
        en.eps_rho_hess_log_rho_sq, en.rho_u_sq,
        bd.total(), bd.rho_w_sq_half, bd.pressure, bd.grad_sqrt_rho_sq,
        bd.cold, bd.log_convex, bd.r0_log, bd.high_order, bd.electrostatic,
        bd.rho_Au_sq, bd.grad_rho_gamma2_sq, bd.eps_grad_rho_gamma2_sq,
        bd.r0_u_sq, bd.r1_rho_u4, bd.rho_u_sq, bd.eps_rho_grad_log_rho_sq,
        bd.eta_grad_rho_m5_sq, bd.eps_eta_grad_rho_m5_sq, bd.mu_lap_u_sq,
        bd.delta_lap5_rho_sq, bd.delta_eps_lap5_rho_sq,
        bd.eps_lap_rho_sq_over_rho, bd.rho_hess_log_rho_sq,
        bd.eps_rho_hess_log_rho_sq, bd.rho_rho_minus_g, bd.eps_rho_rho_minus_g,
        bd.remainder[0], bd.remainder[1], bd.remainder[2], bd.remainder[3],
        bd.remainder[4], bd.remainder[5], c.entropy_valid ? 1.0 : 0.0};
    first = true;
    for (double v : row) {
      if (!first) os << ",";
      os << num(v);
      first = false;
    }
    os << "\n";
  }
  return os.str();
}

void write_csv_ledger(const std::string& path, const Trajectory& traj) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write ledger '" + path + "'");
  out << csv_ledger_text(traj);
}

namespace {

MonitorReport monitor_impl(const Trajectory& traj, double tol_coeff,
                           const char* name, bool bd) {
  MonitorReport rep;
  rep.inequality = name;
  if (traj.saves.size() < 2) return rep;
  const double f0 = bd ? traj.saves.front().cert.entropy.total()
                       : traj.saves.front().cert.energy.total();
  rep.worst_defect = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < traj.saves.size(); ++i) {
    const auto& prev = traj.saves[i - 1].cert;
    const auto& next = traj.saves[i].cert;
    if (bd && !(prev.entropy_valid && next.entropy_valid)) continue;
    const double dt = next.t - prev.t;
    double defect;
    if (bd) {
      defect = next.entropy.total() - prev.entropy.total() +
               dt * (prev.entropy.dissipation_total() -
                     prev.entropy.remainders_total());
    } else {
      defect = next.energy.total() - prev.energy.total() +
               dt * prev.energy.dissipation_total();
    }
    const double tol = tol_coeff * f0 * dt;
    rep.tol = tol;
    ++rep.steps;
    if (defect > rep.worst_defect) {
      rep.worst_defect = defect;
      rep.worst_step = static_cast<int>(i);
    }
    if (defect > tol) {
      ++rep.violations;
      rep.worst_violation = std::max(rep.worst_violation, defect - tol);
    }
  }
  return rep;
}

}  // namespace

MonitorReport energy_monitor(const Trajectory& traj, double tol_coeff) {
  return monitor_impl(traj, tol_coeff, "energy_dissipation", false);
}

MonitorReport bd_monitor(const Trajectory& traj, double tol_coeff) {
  return monitor_impl(traj, tol_coeff, "bd_entropy_dissipation", true);
}

MajorantReport remainder_majorants(const Trajectory& traj) {
  MajorantReport rep;
  const ModelParams& p = traj.params;
  const double vol = traj.saves.front().state.rho.grid().volume();
  std::vector<double> times, r3_bounds;
  for (const auto& e : traj.saves) {
    const State& s = e.state;
    const auto& bd = e.cert.entropy;
    // R3 bound: |R3| <= (3 r1/4) int rho|u|^4 + 64 r1 int |grad rho^{1/4}|^4
    double bound3 = 0;
    if (p.r1 > 0) {
      const double rho_u4 = bd.r1_rho_u4 / p.r1;
      VectorField gq = gradient(dealias(
          map(s.rho, [](double v) { return std::pow(std::max(v, 0.0), 0.25); })));
      SpectralField q2 = dot(gq, gq);
      const double quarter4 = integrate(q2 * q2);
      bound3 = 0.75 * p.r1 * rho_u4 + 64.0 * p.r1 * quarter4;
      if (bound3 > 0)
        rep.worst_ratio_r3 =
            std::max(rep.worst_ratio_r3, std::abs(bd.remainder[2]) / bound3);
    }
    times.push_back(e.cert.t);
    r3_bounds.push_back(bound3);
    // R6 bound: |R6| <= eps r0 sqrt(vol) ||rho||_H2 ||1/rho||_inf
    if (p.eps > 0 && p.r0 > 0) {
      const double h2 = sobolev_norm(s.rho, 2.0);
      const double invinf =
          linf_norm(map(s.rho, [](double v) { return 1.0 / v; }));
      const double bound6 = p.eps * p.r0 * std::sqrt(vol) * h2 * invinf;
      if (bound6 > 0)
        rep.worst_ratio_r6 =
            std::max(rep.worst_ratio_r6, std::abs(bd.remainder[5]) / bound6);
    }
  }
  rep.c_r6 = std::sqrt(vol);
  const double e0 = traj.saves.front().cert.energy.total();
  rep.c_tilde = e0 > 0 ? trapz(times, r3_bounds) / e0 : 0.0;
  rep.pass = rep.worst_ratio_r3 <= 1.0 + 1e-9 && rep.worst_ratio_r6 <= 1.0 + 1e-9;
  return rep;
}

QuantumPartReport quantum_part_certificate(const Trajectory& traj) {
  QuantumPartReport rep;
  std::vector<double> times, vals;
  for (const auto& e : traj.saves) {
    const State& s = e.state;
    SpectralField sq =
        dealias(map(s.rho, [](double v) { return std::sqrt(std::max(v, 0.0)); }));
    MatrixField h = hessian(sq);
    SpectralField h2 = ddot(h, h);
    VectorField gq = gradient(dealias(
        map(s.rho, [](double v) { return std::pow(std::max(v, 0.0), 0.25); })));
    SpectralField q2 = dot(gq, gq);
    times.push_back(e.cert.t);
    vals.push_back(integrate(h2) + integrate(q2 * q2));
  }
  rep.left_integral = trapz(times, vals);
  const auto& bd0 = traj.saves.front().cert.entropy;
  rep.right_initial = bd0.rho_w_sq_half + bd0.pressure + bd0.grad_sqrt_rho_sq +
                      bd0.log_convex + bd0.electrostatic + bd0.r0_log;
  rep.ratio = rep.right_initial != 0 ? rep.left_integral / rep.right_initial : 0;
  return rep;
}

std::map<std::string, double> apriori_bounds_snapshot(const Trajectory& traj) {
  const ModelParams& p = traj.params;
  std::map<std::string, double> out;
  std::vector<double> times;
  std::map<std::string, std::vector<double>> series;
  for (const auto& e : traj.saves) {
    const State& s = e.state;
    times.push_back(e.cert.t);
    const VectorField u = velocity_from_momentum(s.rho, s.mom, p);
    const SpectralField u2 = dot(u, u);
    series["sqrt_rho_u_sq"].push_back(inner(s.rho, u2));  // = 2 * kinetic
    series["rho_gamma2_sq"].push_back(integrate(map(s.rho, [&](double v) {
      return std::pow(std::max(v, 0.0), p.gamma);
    })));
    SpectralField sq =
        dealias(map(s.rho, [](double v) { return std::sqrt(std::max(v, 0.0)); }));
    VectorField gs = gradient(sq);
    series["grad_sqrt_rho_sq"].push_back(integrate(dot(gs, gs)));
    MatrixField T = dealias(sq * gradient(u));
    series["T_sq"].push_back(integrate(ddot(T, T)));
    VectorField gp = gradient(dealias(map(s.rho, [&](double v) {
      return std::pow(std::max(v, 0.0), p.gamma / 2);
    })));
    series["grad_rho_gamma2_sq"].push_back(4.0 / p.gamma * integrate(dot(gp, gp)));
    if (min_value(s.rho) >= p.rho_floor) {
      SpectralField lg = dealias(map(s.rho, [](double v) { return std::log(v); }));
      MatrixField hl = hessian(lg);
      SpectralField f2 = ddot(hl, hl);
      series["sqrt_rho_hess_log_rho_sq"].push_back(inner(s.rho, f2));
    } else {
      series["sqrt_rho_hess_log_rho_sq"].push_back(0.0);
    }
    {
      State tmp = s;
      SpectralField dtrho = continuity_rhs(tmp, p);
      series["dt_rho_l1"].push_back(lp_norm(dtrho, 1.0));
    }
    VectorField ru;
    for (int a = 0; a < u.dim(); ++a) ru.comp.push_back(dealias(s.rho * u[a]));
    series["rho_u_sq"].push_back(integrate(dot(ru, ru)));
    {
      MatrixField gru = gradient(ru);
      double acc = 0;
      for (const auto& c : gru.comp) {
        const double n = lp_norm(c, 1.5);
        acc += n * n;
      }
      series["grad_rho_u_l32_sq"].push_back(acc);
    }
    series["u_sq"].push_back(integrate(u2));
    series["rho14_u_4"].push_back(inner(s.rho, u2 * u2));
    series["sqrt_rho_h2_sq"].push_back(std::pow(sobolev_norm(sq, 2.0), 2));
    {
      VectorField gq = gradient(dealias(map(
          s.rho, [](double v) { return std::pow(std::max(v, 0.0), 0.25); })));
      SpectralField q2 = dot(gq, gq);
      series["grad_rho14_4"].push_back(integrate(q2 * q2));
    }
  }
  auto linf_of = [&](const char* k) {
    double m = 0;
    for (double v : series[k]) m = std::max(m, v);
    return m;
  };
  auto l2t_of = [&](const char* k) { return std::sqrt(trapz(times, series[k])); };

  // (4.1)-type sup-in-time and space-time norms
  out["sqrt_rho_u_LinfL2"] = std::sqrt(linf_of("sqrt_rho_u_sq"));
  out["rho_gamma2_LinfL2"] = std::sqrt(linf_of("rho_gamma2_sq"));
  out["grad_sqrt_rho_LinfL2"] = std::sqrt(linf_of("grad_sqrt_rho_sq"));
  out["T_L2L2"] = l2t_of("T_sq");
  out["sqrt_rho_u_L2L2"] = l2t_of("sqrt_rho_u_sq");
  out["grad_rho_gamma2_L2L2"] = l2t_of("grad_rho_gamma2_sq");
  out["sqrt_rho_hess_log_rho_L2L2"] = l2t_of("sqrt_rho_hess_log_rho_sq");
  {
    std::vector<double> sq;
    for (double v : series["dt_rho_l1"]) sq.push_back(v * v);
    out["dt_rho_L2L1"] = std::sqrt(trapz(times, sq));
  }
  // (4.2)
  out["rho_u_L2L2"] = l2t_of("rho_u_sq");
  out["grad_rho_u_L2L32"] = l2t_of("grad_rho_u_l32_sq");
  // (4.5) damping norms
  out["sqrt_eps_u_L2L2"] = std::sqrt(p.r0) * l2t_of("u_sq");
  out["eps14_rho14_u_L4L4"] =
      std::pow(p.r1, 0.25) * std::pow(trapz(times, series["rho14_u_4"]), 0.25);
  // auxiliary eps-combination: the smoothing seminorms against the
  // eps-weighted capillarity dissipation
  out["rem_lhs"] = std::sqrt(p.eps) * std::sqrt(trapz(times, series["sqrt_rho_h2_sq"])) +
                   std::pow(p.eps, 0.25) *
                       std::pow(trapz(times, series["grad_rho14_4"]), 0.25);
  out["rem_rhs"] = p.eps * l2t_of("sqrt_rho_hess_log_rho_sq");
  return out;
}

nlohmann::json residual_report_json(const std::string& test_function_id, int l,
                                    double delta, double value,
                                    const std::map<std::string, double>& terms) {
  nlohmann::json j;
  j["test_function_id"] = test_function_id;
  j["l"] = l;
  j["delta"] = delta;
  j["value"] = value;
  j["term_breakdown"] = terms;
  return j;
}

nlohmann::json summary_json(const Trajectory& traj) {
  nlohmann::json j;
  j["completed"] = traj.completed;
  if (!traj.completed) j["termination_cause"] = traj.termination_cause;
  j["saves"] = traj.saves.size();
  j["steps"] = traj.steps.size();

  const double mass0 = traj.saves.front().cert.mass;
  double mass_drift = 0, worst_meanV = 0;
  for (const auto& e : traj.saves) {
    mass_drift = std::max(mass_drift, std::abs(e.cert.mass - mass0));
    worst_meanV = std::max(worst_meanV, std::abs(e.cert.mean_V));
  }
  j["mass_drift_rel"] = mass0 != 0 ? mass_drift / std::abs(mass0) : mass_drift;
  j["mean_V_worst"] = worst_meanV;

  auto mon_json = [](const MonitorReport& m) {
    nlohmann::json r;
    r["inequality"] = m.inequality;
    r["steps"] = m.steps;
    r["violations"] = m.violations;
    r["tol_per_step"] = m.tol;
    r["worst_defect"] = m.worst_defect;
    r["worst_violation"] = m.worst_violation;
    r["worst_step"] = m.worst_step;
    r["margin"] = m.tol - m.worst_defect;
    return r;
  };
  j["energy"] = mon_json(energy_monitor(traj));
  j["bd_entropy"] = mon_json(bd_monitor(traj));

  const auto env = positivity_envelope_check(
      traj, traj.saves.front().cert.min_rho, traj.saves.front().cert.max_rho);
  j["envelope"] = {{"inequality", "positivity_envelope"},
                   {"violations", env.violations},
                   {"margin", env.worst_margin},
                   {"worst_step", 0}};

  const auto qp = quantum_part_certificate(traj);
  j["quantum_part"] = {{"left_integral", qp.left_integral},
                       {"right_initial", qp.right_initial},
                       {"ratio", qp.ratio}};
  j["apriori_bounds"] = apriori_bounds_snapshot(traj);
  return j;
}

}  // namespace qnsp
