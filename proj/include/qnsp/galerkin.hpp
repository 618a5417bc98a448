#pragma once

#include <functional>
#include <memory>
#include <optional>

#include "qnsp/config.hpp"
#include "qnsp/functionals.hpp"

namespace qnsp {

/// Real trigonometric modes ordered by increasing |k|; orthonormal in L2 and
/// orthogonal in H1.
class GalerkinBasis {
 public:
  static GalerkinBasis real_trigonometric(const Grid& g, int size);

  int size() const { return static_cast<int>(modes_.size()); }
  const Grid& grid() const { return grid_; }
  const SpectralField& mode(int i) const { return modes_[i]; }
  /// |kappa|^2 of mode i (the H1 diagonal is |kappa|^2 under L2 normalization).
  double kappa_sq(int i) const { return kappa_sq_[i]; }

 private:
  GalerkinBasis(const Grid& g) : grid_(g) {}
  Grid grid_;
  std::vector<SpectralField> modes_;
  std::vector<double> kappa_sq_;
};

/// L2 projections <f, e_i>.
std::vector<double> project(const SpectralField& f, const GalerkinBasis& b);

/// Small dense symmetric matrix (rho-weighted basis pairing).
struct DenseMatrix {
  int n = 0;
  std::vector<double> a;
  double& at(int i, int j) { return a[static_cast<std::size_t>(i) * n + j]; }
  double at(int i, int j) const { return a[static_cast<std::size_t>(i) * n + j]; }
};

/// M_ij = int rho e_i e_j; positive definite when min rho > 0.
DenseMatrix mass_matrix(const SpectralField& rho, const GalerkinBasis& b);

/// Cholesky factor (lower). Throws IndefiniteMassError on failure.
DenseMatrix cholesky(const DenseMatrix& m);
std::vector<double> cholesky_solve(const DenseMatrix& chol,
                                   std::vector<double> rhs);

/// Manufactured-solution forcing hooks; each callback returns the forcing
/// field at the requested time.
struct Forcing {
  std::function<SpectralField(double)> rho;
  std::function<VectorField(double)> mom;
};

struct StepRecord {
  double t;
  double dt;
  double div_u_inf;
};

struct TrajEntry {
  State state;
  CertificateReport cert;
};

struct Trajectory {
  ModelParams params;
  StepScheme scheme;
  std::optional<DopingProfile> doping;
  double doping_shift = 0;  // mean adjustment applied to g at load
  std::vector<TrajEntry> saves;
  std::vector<StepRecord> steps;
  bool completed = true;
  std::string termination_cause;

  const State& initial() const { return saves.front().state; }
  const State& final() const { return saves.back().state; }
};

/// Collocation-mode stepper: exact per-mode integrating factor on the linear
/// block (continuity row exactly; frozen-coefficient pressure / Poisson /
/// capillarity / viscosity / friction symbols on the momentum row), explicit
/// dealiased Lawson stages for the nonlinear remainder.
class CollocationStepper {
 public:
  CollocationStepper(const Grid& g, const ModelParams& p, DopingProfile dop,
                     StepScheme scheme, const Forcing* forcing = nullptr);
  ~CollocationStepper();

  /// Pin the velocity: momentum tendency is dropped and the continuity
  /// equation advects with the given field (zero field = pure heat mode).
  void pin_velocity(const VectorField& u);

  State step(const State& s);
  void set_dt(double dt);
  double dt() const;
  /// safety * min(advective CFL, explicit limit of the non-integrated terms)
  double stable_dt_estimate(const State& s) const;

  CollocationStepper(const CollocationStepper&) = delete;
  CollocationStepper& operator=(const CollocationStepper&) = delete;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Mass-matrix Faedo-Galerkin stepper: the momentum equation is projected on
/// the basis (coefficients of rho u), the continuity equation is solved
/// spectrally with u reconstructed through the weighted mass matrix. Explicit
/// RK4; requires min rho > 0.
class GalerkinStepper {
 public:
  GalerkinStepper(const GalerkinBasis& basis, const ModelParams& p,
                  DopingProfile dop, StepScheme scheme);
  State step(const State& s);

 private:
  GalerkinBasis basis_;
  ModelParams params_;
  DopingProfile doping_;
  StepScheme scheme_;
};

/// Advance one step with either stepper depending on whether a basis is given.
State step(const State& s, const ModelParams& p, const DopingProfile& dop,
           const StepScheme& scheme, const GalerkinBasis* basis = nullptr);

/// Time-step a full configuration, recording states and certificates at the
/// save cadence. Guard trips terminate early with a partial trajectory.
Trajectory run(const RunConfig& config, const Forcing* forcing = nullptr);

struct EnvelopeEntry {
  double t;
  double lower, upper;       // envelope bounds at t
  double min_rho, max_rho;   // observed
  double margin_lo, margin_hi;
};

struct EnvelopeReport {
  std::vector<EnvelopeEntry> entries;
  int violations = 0;
  double worst_margin = 0;
};

/// Checks rho_lo exp(-int ||div u||_inf) <= min rho and
/// max rho <= rho_hi exp(+int ||div u||_inf) at every save time.
EnvelopeReport positivity_envelope_check(const Trajectory& traj, double rho_lo,
                                         double rho_hi);

}  // namespace qnsp
