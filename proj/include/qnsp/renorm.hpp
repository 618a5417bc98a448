#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include "qnsp/galerkin.hpp"
#include "qnsp/mollifier.hpp"

namespace qnsp {

/// Smooth velocity-truncation profile: identically 1 on [-1,1], supported in
/// (-2,2), bridged by the integral of a normalized bump. The antiderivative
/// is exact on [-1,1] and tabulated on (1,2).
class TruncationFamily {
 public:
  static const TruncationFamily& standard();

  double bar(double z) const;      // profile
  double bar_d1(double z) const;   // first derivative
  double bar_d2(double z) const;   // second derivative
  double tilde(double z) const;    // antiderivative of bar, odd

  double tilde_sup() const { return tilde_sat_; }   // = tilde(2)
  double bar_d1_sup() const { return bar_d1_sup_; }
  double bar_d2_sup() const { return bar_d2_sup_; }
  /// K = max(||bar||_inf, ||bar'||_inf, ||bar''||_inf).
  double w2inf_norm() const {
    return std::max({1.0, bar_d1_sup_, bar_d2_sup_});
  }

 private:
  TruncationFamily();
  double bridge_mass_;                 // int_0^1 of the raw bump
  double tilde_sat_;                   // tilde(2)
  double bar_d1_sup_, bar_d2_sup_;
  std::vector<double> tilde_table_;    // cumulative integral on [1,2]
  int table_n_;
};

struct TruncationEval {
  double value = 0;
  std::array<double, 3> grad = {0, 0, 0};
  std::array<std::array<double, 3>, 3> hess = {{{0, 0, 0}, {0, 0, 0}, {0, 0, 0}}};
};

/// beta_delta^l(y) = (1/delta) tilde(delta y_l) prod_{j != l} bar(delta y_j),
/// with gradient and Hessian by the chain rule on (bar, bar', bar'').
TruncationEval beta_l(const std::array<double, 3>& y, int dim, int l,
                      double delta, const TruncationFamily& fam);

/// beta_hat_delta(y) = prod_j bar(delta y_j), with gradient.
double beta_hat(const std::array<double, 3>& y, int dim, double delta,
                const TruncationFamily& fam);
std::array<double, 3> beta_hat_grad(const std::array<double, 3>& y, int dim,
                                    double delta, const TruncationFamily& fam);

struct TruncationBoundRow {
  double delta;
  std::string bound;
  double sample_sup;
  double certified;
  double ratio;
};

struct TruncationBoundReport {
  std::vector<TruncationBoundRow> rows;
  double slope_value;  // log-log slope of sup|beta^l| vs delta (expect -1)
  double slope_grad;   // expect 0
  double slope_hess;   // expect +1
  bool pass;
  std::string failure;  // names the first violated bound and a witness
};

/// Estimates each sup over dense samples (concentrated where the derivatives
/// peak) across delta in {1, 0.1, 0.01} and checks the profile-certified
/// constants plus the 1/delta, O(1), O(delta) scaling slopes.
TruncationBoundReport verify_truncation_bounds(const TruncationFamily& fam,
                                               int sample_count, int dim = 3);

/// Tensor product of a temporal bump compact in (t0, t1) and a low-mode
/// spatial trigonometric polynomial.
struct TestFunction {
  std::string id;
  double t0, t1;
  SpectralField chi;
  VectorField grad_chi;

  double theta(double t) const;
  double dtheta(double t) const;
};

/// Small built-in library of space-time test functions for residual suites.
std::vector<TestFunction> builtin_test_functions(const Grid& g, double T);

/// Composite Simpson over uniformly spaced samples (3/8 rule on odd tails).
double time_integrate(const std::vector<double>& values, double dt);

struct ResidualReport {
  double total = 0;
  double scale = 0;  // sum of |term| magnitudes, for normalized tolerances
  std::map<std::string, double> terms;
};

/// Space-time residual of the truncated momentum formulation for component l.
ResidualReport truncated_momentum_residual(const Trajectory& traj,
                                           const TestFunction& psi, int l,
                                           double delta_trunc,
                                           const TruncationFamily& fam,
                                           const ModelParams& p);

/// Untruncated weak-form residual (the flat-regime oracle).
ResidualReport weak_momentum_residual(const Trajectory& traj,
                                      const TestFunction& psi, int l,
                                      const ModelParams& p);

/// Space-time residual of the truncated dissipation identity (Frobenius over
/// matrix entries).
ResidualReport truncated_dissipation_residual(const Trajectory& traj,
                                              const TestFunction& phi,
                                              double delta_trunc,
                                              const TruncationFamily& fam,
                                              const ModelParams& p);

ResidualReport weak_dissipation_residual(const Trajectory& traj,
                                         const TestFunction& phi,
                                         const ModelParams& p);

/// || Psi_r * div(rho u) - div((Psi_r * rho) u) ||_{L1} over t in (r, T-r).
double commutator_norm(const std::vector<std::pair<double, SpectralField>>& rho,
                       const std::vector<std::pair<double, VectorField>>& u,
                       double r);

}  // namespace qnsp
