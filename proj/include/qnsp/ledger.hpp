#pragma once

#include <string>

#include "qnsp/galerkin.hpp"

// vendored single-header nlohmann/json
#include "json.hpp"

namespace qnsp {

/// Per-run CSV ledger: one row per save time, one column per functional /
/// dissipation term (columns named after the terms, e.g. "r1_rho_u4").
std::string csv_ledger_text(const Trajectory& traj);
void write_csv_ledger(const std::string& path, const Trajectory& traj);

/// Discrete inequality monitor: F(t_{n+1}) - F(t_n) + dt (D - R)(t_n) <= tol,
/// with tol = tol_coeff * F(0) * dt, checked across consecutive saves.
struct MonitorReport {
  std::string inequality;
  int steps = 0;
  int violations = 0;
  double tol = 0;             // threshold per step
  double worst_defect = 0;    // max over steps of the signed defect
  double worst_violation = 0; // max(0, defect - tol)
  int worst_step = -1;
  bool pass(double max_violation_fraction = 0.01) const {
    return steps == 0 ||
           violations <= static_cast<int>(max_violation_fraction * steps);
  }
};

MonitorReport energy_monitor(const Trajectory& traj, double tol_coeff = 1e-6);
MonitorReport bd_monitor(const Trajectory& traj, double tol_coeff = 1e-6);

/// Pointwise-in-time majorant checks for the BD remainders R3 and R6, with
/// the explicit Young / Cauchy-Schwarz constants.
struct MajorantReport {
  double worst_ratio_r3 = 0;  // |R3| / ((3 r1/4) int rho|u|^4 + 64 r1 int |grad rho^{1/4}|^4)
  double c_tilde = 0;         // time-integrated R3 bound relative to E(0)
  double worst_ratio_r6 = 0;  // |R6| / (eps r0 sqrt(vol) ||rho||_{H2} ||1/rho||_inf)
  double c_r6 = 0;            // the Cauchy-Schwarz constant sqrt(vol)
  bool pass = true;
};
MajorantReport remainder_majorants(const Trajectory& traj);

/// Time-integrated quantum smoothing vs. the initial BD data (the reported
/// ratio is the empirical constant).
struct QuantumPartReport {
  double left_integral = 0;   // int int |Hess sqrt rho|^2 + |grad rho^{1/4}|^4
  double right_initial = 0;   // initial BD-type data
  double ratio = 0;
};
QuantumPartReport quantum_part_certificate(const Trajectory& traj);

/// Named norms of the uniform-bound list plus the eps-damping combination.
std::map<std::string, double> apriori_bounds_snapshot(const Trajectory& traj);

/// JSON certificate summary: per-inequality {margin, worst_step, violations},
/// conservation drift, envelope outcome.
nlohmann::json summary_json(const Trajectory& traj);

/// Residual-suite report: {test_function_id, l, delta, value, term_breakdown}.
nlohmann::json residual_report_json(const std::string& test_function_id, int l,
                                    double delta, double value,
                                    const std::map<std::string, double>& terms);

}  // namespace qnsp
