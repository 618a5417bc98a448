#pragma once

#include <array>
#include <map>
#include <string>

#include "qnsp/model.hpp"

namespace qnsp {

/// Energy functional components and its dissipation ledger.
struct EnergyReport {
  // components (all nonnegative)
  double kinetic = 0;        // 1/2 int rho |u|^2
  double cold = 0;           // eta int rho^-10 / 11
  double pressure = 0;       // int rho^gamma / (gamma-1)
  double high_order = 0;     // delta/2 int |grad Lap^4 rho|^2
  double quantum = 0;        // 2 int |grad sqrt(rho)|^2
  double electrostatic = 0;  // 1/2 int |grad V|^2
  double total() const {
    return kinetic + cold + pressure + high_order + quantum + electrostatic;
  }

  // dissipation ledger
  double rho_Du_sq = 0;                // int rho |D(u)|^2
  double eps_grad_rho_gamma2_sq = 0;   // (4 eps/gamma) int |grad rho^{gamma/2}|^2
  double eps_eta_grad_rho_m5_sq = 0;   // (2/5) eps eta int |grad rho^-5|^2
  double delta_eps_lap5_rho_sq = 0;    // delta eps int |Lap^5 rho|^2
  double r0_u_sq = 0;                  // r0 int |u|^2
  double r1_rho_u4 = 0;                // r1 int rho |u|^4
  double mu_lap_u_sq = 0;              // mu int |Lap u|^2
  double eps_rho_hess_log_rho_sq = 0;  // eps int rho |Hess log rho|^2
  double rho_u_sq = 0;                 // int rho |u|^2
  double dissipation_total() const {
    return rho_Du_sq + eps_grad_rho_gamma2_sq + eps_eta_grad_rho_m5_sq +
           delta_eps_lap5_rho_sq + r0_u_sq + r1_rho_u4 + mu_lap_u_sq +
           eps_rho_hess_log_rho_sq + rho_u_sq;
  }
};

/// BD-entropy functional in the effective velocity w = u + grad log rho,
/// its dissipation ledger and the remainder terms R1..R6.
///
/// The statements in circulation carry different prefactors on the
/// |grad sqrt(rho)|^2 and cold-pressure parts; the coefficients used here are
/// the ones under which d/dt F + D = sum R_i closes exactly, and they are
/// exposed as labeled fields.
struct EntropyReport {
  double grad_sqrt_coeff = 2.0;
  double eta_potential_coeff = 1.0;

  // functional components
  double rho_w_sq_half = 0;     // 1/2 int rho |w|^2
  double pressure = 0;          // int rho^gamma/(gamma-1)
  double grad_sqrt_rho_sq = 0;  // grad_sqrt_coeff * int |grad sqrt rho|^2
  double cold = 0;              // eta_potential_coeff * eta int rho^-10/11
  double log_convex = 0;        // int rho(log rho - 1) + 1
  double r0_log = 0;            // -r0 int log rho
  double high_order = 0;        // delta/2 int |grad Lap^4 rho|^2
  double electrostatic = 0;     // 1/2 int |grad V|^2
  double total() const {
    return rho_w_sq_half + pressure + grad_sqrt_rho_sq + cold + log_convex +
           r0_log + high_order + electrostatic;
  }

  // dissipation ledger
  double rho_Au_sq = 0;                // int rho |A(u)|^2
  double grad_rho_gamma2_sq = 0;       // (4/gamma) int |grad rho^{gamma/2}|^2
  double eps_grad_rho_gamma2_sq = 0;   // (4 eps/gamma) ...
  double r0_u_sq = 0;                  // r0 int |u|^2
  double r1_rho_u4 = 0;                // r1 int rho |u|^4
  double rho_u_sq = 0;                 // int rho |u|^2
  double eps_rho_grad_log_rho_sq = 0;  // eps int rho |grad log rho|^2
  double eta_grad_rho_m5_sq = 0;       // (2 eta/5) int |grad rho^-5|^2
  double eps_eta_grad_rho_m5_sq = 0;   // (2 eps eta/5) ...
  double mu_lap_u_sq = 0;              // mu int |Lap u|^2
  double delta_lap5_rho_sq = 0;        // delta int |Lap^5 rho|^2
  double delta_eps_lap5_rho_sq = 0;    // delta eps ...
  double eps_lap_rho_sq_over_rho = 0;  // eps int |Lap rho|^2 / rho
  double rho_hess_log_rho_sq = 0;      // int rho |Hess log rho|^2
  double eps_rho_hess_log_rho_sq = 0;  // eps ...
  double rho_rho_minus_g = 0;          // int rho (rho - g)   (either sign)
  double eps_rho_rho_minus_g = 0;      // eps int rho (rho - g)
  double dissipation_total() const {
    return rho_Au_sq + grad_rho_gamma2_sq + eps_grad_rho_gamma2_sq + r0_u_sq +
           r1_rho_u4 + rho_u_sq + eps_rho_grad_log_rho_sq + eta_grad_rho_m5_sq +
           eps_eta_grad_rho_m5_sq + mu_lap_u_sq + delta_lap5_rho_sq +
           delta_eps_lap5_rho_sq + eps_lap_rho_sq_over_rho +
           rho_hess_log_rho_sq + eps_rho_hess_log_rho_sq + rho_rho_minus_g +
           eps_rho_rho_minus_g;
  }

  // remainders, d/dt F + D = sum R_i
  std::array<double, 6> remainder = {0, 0, 0, 0, 0, 0};
  double remainders_total() const {
    double s = 0;
    for (double r : remainder) s += r;
    return s;
  }
};

/// Velocity-gradient tensors weighted by sqrt(rho), and the capillarity tensor.
struct TensorFields {
  MatrixField T;   // sqrt(rho) grad u
  MatrixField Ts;  // sqrt(rho) D(u)
  MatrixField Ta;  // sqrt(rho) A(u)
  MatrixField S;   // sqrt(rho) S = 2 sqrt(rho) Hess sqrt(rho) - 2 grad sqrt(rho) x grad sqrt(rho)
  double identity_residual = 0;  // re-verified defining identity for S
};

EnergyReport energy(const State& s, const ModelParams& p);
EntropyReport bd_entropy(const State& s, const ModelParams& p,
                         const DopingProfile& dop);
TensorFields tensors(const State& s, const ModelParams& p);

/// Integration-by-parts residual of the dissipation identity at one state:
/// Frobenius norm over (i,j) of int sqrt(rho) T_ij phi + int rho u_i d_j phi
/// + 2 int sqrt(rho) u_i d_j sqrt(rho) phi.
double dissipation_identity_residual(const State& s, const SpectralField& phi,
                                     const ModelParams& p);

struct SobolevReport {
  double left;          // ||rho^-1||_inf
  double right_factor;  // (1+||rho||_{H^{k+2}})^2 (1+||rho^-1||_{L^3})^3
  double ratio;
};
SobolevReport sobolev_certificate(const SpectralField& rho, int k = 2);

/// Per-save aggregate used by trajectories and the CSV ledger.
struct CertificateReport {
  double t = 0;
  EnergyReport energy;
  EntropyReport entropy;
  bool entropy_valid = true;  // false on vacuum states (log rho undefined)
  double mass = 0;
  double mean_V = 0;
  double min_rho = 0;
  double max_rho = 0;
  double div_u_inf = 0;
  double divu_integral = 0;  // int_0^t ||div u||_inf ds (step accumulation)
};

CertificateReport make_certificate(const State& s, const ModelParams& p,
                                   const DopingProfile& dop,
                                   double divu_integral);

}  // namespace qnsp
