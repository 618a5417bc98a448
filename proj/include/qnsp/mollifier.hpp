#pragma once

#include <utility>
#include <vector>

#include "qnsp/field.hpp"

namespace qnsp {

/// Smooth even space-time mollifier. The profile is a separable product of
/// identical C-infinity bumps, each supported in [-1/2, 1/2] with unit mass,
/// so the joint (t,x) support lies inside the unit ball for d <= 3. Scaled
/// copies Psi_r(t,x) = r^-(1+d) Psi(t/r, x/r) act by a discrete convolution in
/// time and an exact Fourier symbol in space.
class Mollifier {
 public:
  explicit Mollifier(double radius);

  double radius() const { return radius_; }

  /// Normalized 1-D bump: even, supported in [-1/2,1/2], mass 1.
  double bump1d(double s) const;

  /// Profile value at a (1+d)-dimensional argument {t, x...}; vanishes for
  /// |arg| >= 1.
  double profile(const std::vector<double>& arg) const;

  /// Mass of the (1+d)-dimensional profile under the module's quadrature.
  double profile_mass(int space_dim) const;

  /// Fourier transform of the scaled 1-D spatial factor at wavenumber kappa,
  /// normalized so the zero mode is exactly 1.
  double space_symbol(double kappa) const;

 private:
  double radius_;
  double mass1d_;  // unnormalized 1-D bump mass
};

/// Time-space convolution Psi_r * f of a uniformly sampled field sequence.
/// Requires sample spacing <= r/4 and r < L/4 on every axis; the result is
/// restricted to times at distance > r from both ends of the window.
std::vector<std::pair<double, SpectralField>> mollify(
    const std::vector<std::pair<double, SpectralField>>& samples,
    const Mollifier& m);

}  // namespace qnsp
