#pragma once

#include <complex>
#include <cstddef>

#include "qnsp/grid.hpp"

namespace qnsp::fft {

/// Number of complex coefficients in the half-spectrum (r2c) layout.
std::size_t coef_size(const Grid& g);

/// Real-to-complex transform, normalized so coefficients are the amplitudes of
/// exp(i k.x): values(x) = sum_k c_k exp(i kappa_k . x), kappa = 2 pi k / L.
void forward(const Grid& g, const double* values, std::complex<double>* coef);

/// Complex-to-real inverse; the input is copied (FFTW's c2r destroys its input).
void inverse(const Grid& g, const std::complex<double>* coef, double* values);

}  // namespace qnsp::fft
