#pragma once

#include <map>
#include <optional>
#include <string>

#include "qnsp/field.hpp"

namespace qnsp {

enum class BohmForm { divergence_log_rho, gradient_ratio, sqrt_split };

/// Physical and regularization parameters of the momentum/continuity system.
struct ModelParams {
  double gamma = 2.0;    // adiabatic exponent, > 1
  double eps = 0.0;      // parabolic regularization (continuity + coupling)
  double mu = 0.0;       // hyperviscosity
  double delta = 0.0;    // high-order density regularization
  double eta = 0.0;      // cold pressure strength
  double r0 = 0.0;       // linear friction
  double r1 = 0.0;       // cubic friction
  double rho_floor = 1e-8;          // clamps divisions and log arguments
  double vacuum_threshold = 1e-6;   // below this, velocity is zeroed
  double compat_tol_rel = 1e-10;    // Poisson compatibility, relative to mass
  BohmForm bohm_form = BohmForm::divergence_log_rho;
  bool eps_coupling_transpose = false;  // (grad u)^T grad rho variant

  void validate() const;
  /// Friction tied to the parabolic regularization (r0 = r1 = eps).
  static ModelParams paper_faithful(ModelParams base);
};

/// Fixed background charge with its target mass.
struct DopingProfile {
  SpectralField g;
  double target_mass;

  /// Shift g by a constant so integrate(g) == target_mass; returns the shift.
  static DopingProfile mean_shifted(SpectralField g, double target_mass,
                                    double* shift_out = nullptr);
};

DopingProfile doping_uniform(const Grid& grid, double mass);
DopingProfile doping_cosine(const Grid& grid, double mass, int mode,
                            double amplitude);
DopingProfile doping_gaussian_bump(const Grid& grid, double mass, double width,
                                   double amplitude);

/// Instantaneous state (rho, momentum, electrostatic potential).
struct State {
  double t;
  SpectralField rho;
  VectorField mom;
  SpectralField V;
};

/// Checks the state invariants (nonnegative density, floor under eta/delta
/// regularization, zero-mean potential, zero momentum on vacuum).
void validate_state(const State& s, const ModelParams& p);

/// -Lap V = rho - g with zero-mean V; compatibility |int(rho - g)| <= tol,
/// tol = compat_tol_rel * target mass.
SpectralField solve_poisson(const SpectralField& rho, const DopingProfile& dop,
                            const ModelParams& p);

/// u = m / max(rho, floor), zeroed where rho <= vacuum threshold, dealiased.
VectorField velocity_from_momentum(const SpectralField& rho,
                                   const VectorField& mom,
                                   const ModelParams& p);

/// Quantum (Bohm) force in one of its three equivalent forms.
VectorField bohm_force(const SpectralField& rho, BohmForm form,
                       const ModelParams& p);

/// Per-term Euclidean norms of the assembled momentum tendency.
using TermLedger = std::map<std::string, double>;

/// Full right-hand side of d/dt (rho u); every nonlinear product dealiased.
/// Throws BlowUpError naming the first non-finite term.
VectorField assemble_momentum_rhs(const State& s, const ModelParams& p,
                                  TermLedger* ledger = nullptr);

/// Same with an explicitly supplied velocity (for the Galerkin mode, where the
/// velocity lives in the basis span rather than as m / rho).
VectorField assemble_momentum_rhs(const State& s, const VectorField& u,
                                  const ModelParams& p,
                                  TermLedger* ledger = nullptr);

/// Right-hand side of d/dt rho = -div m + eps Lap rho (dealiased).
SpectralField continuity_rhs(const State& s, const ModelParams& p);

/// rho^gamma gradient in the 2 rho^{gamma/2} grad rho^{gamma/2} form (used by
/// the entropy ledgers).
VectorField pressure_gradient_sqrt_form(const SpectralField& rho,
                                        const ModelParams& p);

}  // namespace qnsp
