#pragma once

#include "qnsp/ledger.hpp"

namespace qnsp {

struct VerifyResult {
  bool pass = false;
  nlohmann::json detail;
};

/// Pairwise agreement of the three quantum-force forms on random smooth
/// densities with min rho >= min_density.
VerifyResult verify_bohm(int n = 64, int samples = 20, double min_density = 0.5,
                         double tol = 1e-6, unsigned seed = 1234);

/// Truncation-profile bound verification (certified constants + slopes).
VerifyResult verify_truncation(int sample_count = 20000, int dim = 3);

/// Mollifier commutator decay on single-mode space-time fields: log-log slope
/// over r in {0.2, 0.1, 0.05} must be >= 1.
VerifyResult verify_commutator(int n = 64, double slope_min = 1.0);

/// Integration-by-parts residual of the dissipation identity on random
/// band-limited positive states.
VerifyResult verify_dissipation_identity(int n = 64, unsigned seed = 99,
                                         double tol = 1e-8);

/// Temporal convergence order on a manufactured forced solution; the observed
/// order under dt-halving must reach the given minimum.
VerifyResult verify_mms_order(int rungs = 3, double min_order = 2.0,
                              int rk_order = 3, int n = 32);

/// Deterministic band-limited random field with min value pinned.
SpectralField random_band_limited(const Grid& g, int max_mode, double min_value,
                                  double amplitude, unsigned seed);

/// Manufactured solution pair used by the MMS suite (exact fields + forcing).
struct Manufactured {
  std::function<SpectralField(double)> rho;
  std::function<VectorField(double)> mom;
  Forcing forcing(const ModelParams& p, const DopingProfile& dop) const;
  std::function<SpectralField(double)> rho_t;  // time derivatives
  std::function<VectorField(double)> mom_t;
};
Manufactured manufactured_solution(const Grid& g);

}  // namespace qnsp
