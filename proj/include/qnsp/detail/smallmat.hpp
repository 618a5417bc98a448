#pragma once

#include <array>
#include <cmath>
#include <complex>

namespace qnsp::detail {

/// Dense complex matrix of size n <= 4, used for the per-mode linear blocks.
struct CMat4 {
  int n = 0;
  std::array<std::complex<double>, 16> a{};

  std::complex<double>& at(int i, int j) { return a[i * n + j]; }
  const std::complex<double>& at(int i, int j) const { return a[i * n + j]; }

  static CMat4 identity(int n) {
    CMat4 m;
    m.n = n;
    for (int i = 0; i < n; ++i) m.at(i, i) = 1.0;
    return m;
  }
};

inline CMat4 operator*(const CMat4& x, const CMat4& y) {
  CMat4 r;
  r.n = x.n;
  for (int i = 0; i < x.n; ++i)
    for (int j = 0; j < x.n; ++j) {
      std::complex<double> s = 0;
      for (int k = 0; k < x.n; ++k) s += x.at(i, k) * y.at(k, j);
      r.at(i, j) = s;
    }
  return r;
}

inline CMat4 operator+(const CMat4& x, const CMat4& y) {
  CMat4 r = x;
  for (int i = 0; i < x.n * x.n; ++i) r.a[i] += y.a[i];
  return r;
}

inline CMat4 operator*(double s, const CMat4& x) {
  CMat4 r = x;
  for (int i = 0; i < x.n * x.n; ++i) r.a[i] *= s;
  return r;
}

/// Solve A X = B in place via Gauss elimination with partial pivoting.
inline CMat4 solve(CMat4 A, CMat4 B) {
  const int n = A.n;
  for (int c = 0; c < n; ++c) {
    int piv = c;
    for (int r = c + 1; r < n; ++r)
      if (std::abs(A.at(r, c)) > std::abs(A.at(piv, c))) piv = r;
    if (piv != c)
      for (int j = 0; j < n; ++j) {
        std::swap(A.at(c, j), A.at(piv, j));
        std::swap(B.at(c, j), B.at(piv, j));
      }
    const std::complex<double> d = A.at(c, c);
    for (int j = 0; j < n; ++j) {
      A.at(c, j) /= d;
      B.at(c, j) /= d;
    }
    for (int r = 0; r < n; ++r) {
      if (r == c) continue;
      const std::complex<double> f = A.at(r, c);
      if (f == std::complex<double>(0.0)) continue;
      for (int j = 0; j < n; ++j) {
        A.at(r, j) -= f * A.at(c, j);
        B.at(r, j) -= f * B.at(c, j);
      }
    }
  }
  return B;
}

/// Matrix exponential by scaling-and-squaring with a (6,6) Pade approximant.
inline CMat4 expm(const CMat4& A) {
  double nrm = 0;
  for (int j = 0; j < A.n; ++j) {
    double col = 0;
    for (int i = 0; i < A.n; ++i) col += std::abs(A.at(i, j));
    nrm = std::max(nrm, col);
  }
  int s = 0;
  while (nrm > 0.5) {
    nrm /= 2;
    ++s;
  }
  CMat4 X = std::ldexp(1.0, -s) * A;

  // Pade(6,6): N = sum c_k X^k, D with alternating signs
  static const double c[7] = {1.0,       1.0 / 2.0,   5.0 / 44.0, 1.0 / 66.0,
                              1.0 / 792.0, 1.0 / 15840.0, 1.0 / 665280.0};
  CMat4 P = CMat4::identity(A.n);
  CMat4 N = c[0] * P;
  CMat4 D = c[0] * P;
  double sign = 1.0;
  for (int k = 1; k <= 6; ++k) {
    P = P * X;
    sign = -sign;
    N = N + c[k] * P;
    D = D + (sign * c[k]) * P;
  }
  CMat4 E = solve(D, N);
  for (int i = 0; i < s; ++i) E = E * E;
  return E;
}

}  // namespace qnsp::detail
