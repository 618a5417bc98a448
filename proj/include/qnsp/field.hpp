#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <utility>
#include <vector>

#include "qnsp/fft.hpp"
#include "qnsp/grid.hpp"

namespace qnsp {

/// Real periodic scalar field with paired physical-grid and Fourier views.
/// Both representations are kept synchronized from construction on, so fields
/// are immutable values that can be shared freely between threads.
class SpectralField {
 public:
  static SpectralField zeros(const Grid& g) {
    return SpectralField(g, std::vector<double>(g.points(), 0.0),
                         std::vector<std::complex<double>>(fft::coef_size(g)));
  }

  static SpectralField constant(const Grid& g, double c) {
    std::vector<double> v(g.points(), c);
    return from_values(g, std::move(v));
  }

  static SpectralField from_values(const Grid& g, std::vector<double> v) {
    std::vector<std::complex<double>> c(fft::coef_size(g));
    fft::forward(g, v.data(), c.data());
    return SpectralField(g, std::move(v), std::move(c));
  }

  static SpectralField from_coefficients(const Grid& g,
                                         std::vector<std::complex<double>> c) {
    std::vector<double> v(g.points());
    fft::inverse(g, c.data(), v.data());
    return SpectralField(g, std::move(v), std::move(c));
  }

  /// Sample an analytic function on the collocation grid; fn takes {x,y,z}.
  template <class F>
  static SpectralField sample(const Grid& g, F&& fn) {
    std::vector<double> v(g.points());
    const int n0 = g.n(0), n1 = g.dim() > 1 ? g.n(1) : 1,
              n2 = g.dim() > 2 ? g.n(2) : 1;
    std::size_t idx = 0;
    for (int i0 = 0; i0 < n0; ++i0)
      for (int i1 = 0; i1 < n1; ++i1)
        for (int i2 = 0; i2 < n2; ++i2, ++idx) {
          std::array<double, 3> x = {g.coord(0, i0),
                                     g.dim() > 1 ? g.coord(1, i1) : 0.0,
                                     g.dim() > 2 ? g.coord(2, i2) : 0.0};
          v[idx] = fn(x);
        }
    return from_values(g, std::move(v));
  }

  const Grid& grid() const { return grid_; }
  const std::vector<double>& values() const { return vals_; }
  const std::vector<std::complex<double>>& coef() const { return coef_; }

  bool resolution_warning() const { return warn_; }
  SpectralField with_warning(bool w) const {
    SpectralField f = *this;
    f.warn_ = w;
    return f;
  }

 private:
  SpectralField(const Grid& g, std::vector<double> v,
                std::vector<std::complex<double>> c)
      : grid_(g), vals_(std::move(v)), coef_(std::move(c)) {}

  Grid grid_;
  std::vector<double> vals_;
  std::vector<std::complex<double>> coef_;
  bool warn_ = false;
};

/// Vector-valued field: one scalar component per spatial axis.
struct VectorField {
  std::vector<SpectralField> comp;

  static VectorField zeros(const Grid& g) {
    VectorField v;
    for (int a = 0; a < g.dim(); ++a) v.comp.push_back(SpectralField::zeros(g));
    return v;
  }
  const Grid& grid() const { return comp.front().grid(); }
  int dim() const { return static_cast<int>(comp.size()); }
  const SpectralField& operator[](int i) const { return comp[i]; }
  SpectralField& operator[](int i) { return comp[i]; }
};

/// Matrix-valued field (d x d), row-major storage.
struct MatrixField {
  int d = 0;
  std::vector<SpectralField> comp;

  static MatrixField zeros(const Grid& g) {
    MatrixField m;
    m.d = g.dim();
    for (int i = 0; i < m.d * m.d; ++i) m.comp.push_back(SpectralField::zeros(g));
    return m;
  }
  const Grid& grid() const { return comp.front().grid(); }
  const SpectralField& at(int i, int j) const { return comp[i * d + j]; }
  SpectralField& at(int i, int j) { return comp[i * d + j]; }
};

namespace detail {

/// Iterate the half-spectrum; fn(flat, k[3], kappa[3]) with integer wavenumbers
/// k (last axis non-negative) and physical wavenumbers kappa = 2 pi k / L.
template <class F>
void for_each_mode(const Grid& g, F&& fn) {
  const int d = g.dim();
  const int n0 = g.n(0);
  const int n1 = d > 1 ? g.n(1) : 1;
  const int nlast = g.n(d - 1);
  const int h = nlast / 2 + 1;
  const double twopi = 2 * std::numbers::pi;
  std::array<int, 3> k = {0, 0, 0};
  std::array<double, 3> kap = {0.0, 0.0, 0.0};
  std::size_t flat = 0;
  if (d == 1) {
    for (int i0 = 0; i0 < h; ++i0, ++flat) {
      k[0] = i0;
      kap[0] = twopi * k[0] / g.length(0);
      fn(flat, k, kap);
    }
  } else if (d == 2) {
    for (int i0 = 0; i0 < n0; ++i0) {
      k[0] = i0 <= n0 / 2 ? i0 : i0 - n0;
      kap[0] = twopi * k[0] / g.length(0);
      for (int i1 = 0; i1 < h; ++i1, ++flat) {
        k[1] = i1;
        kap[1] = twopi * k[1] / g.length(1);
        fn(flat, k, kap);
      }
    }
  } else {
    for (int i0 = 0; i0 < n0; ++i0) {
      k[0] = i0 <= n0 / 2 ? i0 : i0 - n0;
      kap[0] = twopi * k[0] / g.length(0);
      for (int i1 = 0; i1 < n1; ++i1) {
        k[1] = i1 <= n1 / 2 ? i1 : i1 - n1;
        kap[1] = twopi * k[1] / g.length(1);
        for (int i2 = 0; i2 < h; ++i2, ++flat) {
          k[2] = i2;
          kap[2] = twopi * k[2] / g.length(2);
          fn(flat, k, kap);
        }
      }
    }
  }
}

/// Hermitian multiplicity of a half-spectrum entry (2 unless the last-axis
/// wavenumber is self-conjugate).
inline double hermitian_weight(const Grid& g, const std::array<int, 3>& k) {
  const int a = g.dim() - 1;
  return (k[a] == 0 || k[a] == g.n(a) / 2) ? 1.0 : 2.0;
}

inline bool any_nyquist(const Grid& g, const std::array<int, 3>& k) {
  for (int a = 0; a < g.dim(); ++a)
    if (std::abs(k[a]) == g.n(a) / 2 && g.n(a) > 1) return true;
  return false;
}

}  // namespace detail

/// Apply a Fourier multiplier m(k, kappa) -> complex.
template <class F>
SpectralField apply_multiplier(const SpectralField& f, F&& m) {
  std::vector<std::complex<double>> c = f.coef();
  detail::for_each_mode(f.grid(), [&](std::size_t i, const std::array<int, 3>& k,
                                      const std::array<double, 3>& kap) {
    c[i] *= m(k, kap);
  });
  return SpectralField::from_coefficients(f.grid(), std::move(c));
}

/// Spectral derivative of the given order along one axis. Orders above 18 are
/// rejected; a request the grid cannot resolve sets a warning flag instead.
SpectralField derivative(const SpectralField& f, int axis, int order);

/// (Laplacian)^p as a Fourier multiplier (-|kappa|^2)^p; 2p <= 18.
SpectralField laplacian_pow(const SpectralField& f, int p);

VectorField gradient(const SpectralField& f);
SpectralField divergence(const VectorField& v);
/// (grad u)_{ij} = d_j u_i.
MatrixField gradient(const VectorField& u);
MatrixField hessian(const SpectralField& f);
/// (div T)_i = sum_j d_j T_{ij}.
VectorField divergence(const MatrixField& t);

/// Zero every coefficient with any axis wavenumber above floor(n/3).
SpectralField dealias(const SpectralField& f);
VectorField dealias(const VectorField& v);
MatrixField dealias(const MatrixField& m);

/// Mean-zero inverse Laplacian: -Lap(V) = f, zero mode of V set exactly to 0.
/// Throws CompatibilityError when |mean f| > compat_tol.
SpectralField inverse_laplacian_zero_mean(const SpectralField& f,
                                          double compat_tol);

double mean(const SpectralField& f);
double integrate(const SpectralField& f);
/// Grid quadrature of a pointwise product (exact for resolved trig polynomials).
double inner(const SpectralField& f, const SpectralField& g);
double l2_norm(const SpectralField& f);
double linf_norm(const SpectralField& f);
double lp_norm(const SpectralField& f, double p);
/// Sobolev norm via the symbol (1 + |kappa|^2)^{s/2}.
double sobolev_norm(const SpectralField& f, double s);
/// Coefficient-space sum vol * sum_k w_k |c_k|^2 (Parseval pairing of integrate(f^2)).
double parseval_sum(const SpectralField& f);
double min_value(const SpectralField& f);
double max_value(const SpectralField& f);
bool all_finite(const SpectralField& f);

SpectralField operator+(const SpectralField& a, const SpectralField& b);
SpectralField operator-(const SpectralField& a, const SpectralField& b);
SpectralField operator*(const SpectralField& a, const SpectralField& b);
SpectralField operator*(double s, const SpectralField& a);
SpectralField operator+(const SpectralField& a, double s);
SpectralField operator-(const SpectralField& a);

/// Pointwise transform of grid values.
SpectralField map(const SpectralField& f, const std::function<double(double)>& fn);

VectorField operator+(const VectorField& a, const VectorField& b);
VectorField operator-(const VectorField& a, const VectorField& b);
VectorField operator*(double s, const VectorField& a);
VectorField operator*(const SpectralField& s, const VectorField& a);
/// Pointwise dot product of vector fields.
SpectralField dot(const VectorField& a, const VectorField& b);
/// Pointwise outer product (a_i b_j).
MatrixField outer(const VectorField& a, const VectorField& b);

MatrixField operator+(const MatrixField& a, const MatrixField& b);
MatrixField operator-(const MatrixField& a, const MatrixField& b);
MatrixField operator*(double s, const MatrixField& a);
MatrixField operator*(const SpectralField& s, const MatrixField& a);
MatrixField transpose(const MatrixField& a);
MatrixField sym_part(const MatrixField& a);
MatrixField antisym_part(const MatrixField& a);
/// Pointwise Frobenius pairing sum_ij A_ij B_ij.
SpectralField ddot(const MatrixField& a, const MatrixField& b);
/// Pointwise matrix-vector product (A v)_i = sum_j A_ij v_j.
VectorField matvec(const MatrixField& a, const VectorField& v);

bool all_finite(const VectorField& v);
double linf_norm(const VectorField& v);
double l2_norm(const VectorField& v);

}  // namespace qnsp
