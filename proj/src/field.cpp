#include "qnsp/field.hpp"

#include <cmath>

#include "qnsp/errors.hpp"

namespace qnsp {

namespace {

std::vector<double> binary_op(const SpectralField& a, const SpectralField& b,
                              double sign) {
  if (a.grid() != b.grid()) throw Error("field grids differ");
  std::vector<double> v(a.values());
  const auto& w = b.values();
  for (std::size_t i = 0; i < v.size(); ++i) v[i] += sign * w[i];
  return v;
}

}  // namespace

SpectralField derivative(const SpectralField& f, int axis, int order) {
  if (order > 18)
    throw UnsupportedOrderError("derivative order > 18 is unsupported");
  if (order < 0) throw UnsupportedOrderError("derivative order must be >= 0");
  if (axis < 0 || axis >= f.grid().dim()) throw Error("derivative axis out of range");
  if (order == 0) return f;
  const bool odd = order % 2 != 0;
  std::vector<std::complex<double>> c = f.coef();
  detail::for_each_mode(f.grid(), [&](std::size_t i, const std::array<int, 3>& k,
                                      const std::array<double, 3>& kap) {
    if (odd && std::abs(k[axis]) == f.grid().n(axis) / 2) {
      c[i] = 0.0;  // Nyquist mode has no well-defined odd derivative
      return;
    }
    c[i] *= std::pow(std::complex<double>(0.0, kap[axis]), order);
  });
  SpectralField out = SpectralField::from_coefficients(f.grid(), std::move(c));
  // Fewer retained modes than the derivative order: result carries no meaning.
  if (f.grid().dealias_cutoff(axis) < order) out = out.with_warning(true);
  return out;
}

SpectralField laplacian_pow(const SpectralField& f, int p) {
  if (2 * p > 18)
    throw UnsupportedOrderError("Laplacian power beyond Delta^9 is unsupported");
  if (p == 0) return f;
  SpectralField out = apply_multiplier(f, [&](const std::array<int, 3>&,
                                              const std::array<double, 3>& kap) {
    double k2 = 0;
    for (int a = 0; a < f.grid().dim(); ++a) k2 += kap[a] * kap[a];
    return std::pow(-k2, p);
  });
  for (int a = 0; a < f.grid().dim(); ++a)
    if (f.grid().dealias_cutoff(a) < 2 * p) return out.with_warning(true);
  return out;
}

VectorField gradient(const SpectralField& f) {
  VectorField g;
  for (int a = 0; a < f.grid().dim(); ++a) g.comp.push_back(derivative(f, a, 1));
  return g;
}

SpectralField divergence(const VectorField& v) {
  SpectralField out = derivative(v[0], 0, 1);
  for (int a = 1; a < v.dim(); ++a) out = out + derivative(v[a], a, 1);
  return out;
}

MatrixField gradient(const VectorField& u) {
  MatrixField m;
  m.d = u.dim();
  for (int i = 0; i < m.d; ++i)
    for (int j = 0; j < m.d; ++j) m.comp.push_back(derivative(u[i], j, 1));
  return m;
}

MatrixField hessian(const SpectralField& f) {
  const int d = f.grid().dim();
  MatrixField m;
  m.d = d;
  m.comp.reserve(d * d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      m.comp.push_back(i == j ? derivative(f, i, 2)
                              : derivative(derivative(f, i, 1), j, 1));
  return m;
}

VectorField divergence(const MatrixField& t) {
  VectorField v;
  for (int i = 0; i < t.d; ++i) {
    SpectralField s = derivative(t.at(i, 0), 0, 1);
    for (int j = 1; j < t.d; ++j) s = s + derivative(t.at(i, j), j, 1);
    v.comp.push_back(std::move(s));
  }
  return v;
}

SpectralField dealias(const SpectralField& f) {
  std::vector<std::complex<double>> c = f.coef();
  const Grid& g = f.grid();
  detail::for_each_mode(g, [&](std::size_t i, const std::array<int, 3>& k,
                               const std::array<double, 3>&) {
    for (int a = 0; a < g.dim(); ++a)
      if (std::abs(k[a]) > g.dealias_cutoff(a)) {
        c[i] = 0.0;
        return;
      }
  });
  return SpectralField::from_coefficients(g, std::move(c));
}

VectorField dealias(const VectorField& v) {
  VectorField out;
  for (const auto& c : v.comp) out.comp.push_back(dealias(c));
  return out;
}

MatrixField dealias(const MatrixField& m) {
  MatrixField out;
  out.d = m.d;
  for (const auto& c : m.comp) out.comp.push_back(dealias(c));
  return out;
}

SpectralField inverse_laplacian_zero_mean(const SpectralField& f,
                                          double compat_tol) {
  const double m = integrate(f);
  if (std::abs(m) > compat_tol)
    throw CompatibilityError("inverse Laplacian requires a mean-free source; "
                             "measured mean " + std::to_string(m), m);
  std::vector<std::complex<double>> c = f.coef();
  detail::for_each_mode(f.grid(), [&](std::size_t i, const std::array<int, 3>& k,
                                      const std::array<double, 3>& kap) {
    double k2 = 0;
    bool zero = true;
    for (int a = 0; a < f.grid().dim(); ++a) {
      k2 += kap[a] * kap[a];
      zero = zero && k[a] == 0;
    }
    c[i] = zero ? std::complex<double>(0.0, 0.0) : c[i] / k2;
  });
  return SpectralField::from_coefficients(f.grid(), std::move(c));
}

double mean(const SpectralField& f) { return f.coef()[0].real(); }

double integrate(const SpectralField& f) {
  return f.grid().volume() * mean(f);
}

double inner(const SpectralField& f, const SpectralField& g) {
  if (f.grid() != g.grid()) throw Error("field grids differ");
  const auto& a = f.values();
  const auto& b = g.values();
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s * f.grid().cell_volume();
}

double l2_norm(const SpectralField& f) { return std::sqrt(inner(f, f)); }

double linf_norm(const SpectralField& f) {
  double m = 0;
  for (double v : f.values()) m = std::max(m, std::abs(v));
  return m;
}

double lp_norm(const SpectralField& f, double p) {
  double s = 0;
  for (double v : f.values()) s += std::pow(std::abs(v), p);
  return std::pow(s * f.grid().cell_volume(), 1.0 / p);
}

double sobolev_norm(const SpectralField& f, double s) {
  const auto& c = f.coef();
  double acc = 0;
  detail::for_each_mode(f.grid(), [&](std::size_t i, const std::array<int, 3>& k,
                                      const std::array<double, 3>& kap) {
    double k2 = 0;
    for (int a = 0; a < f.grid().dim(); ++a) k2 += kap[a] * kap[a];
    acc += detail::hermitian_weight(f.grid(), k) * std::pow(1.0 + k2, s) *
           std::norm(c[i]);
  });
  return std::sqrt(acc * f.grid().volume());
}

double parseval_sum(const SpectralField& f) {
  const auto& c = f.coef();
  double acc = 0;
  detail::for_each_mode(f.grid(), [&](std::size_t i, const std::array<int, 3>& k,
                                      const std::array<double, 3>&) {
    acc += detail::hermitian_weight(f.grid(), k) * std::norm(c[i]);
  });
  return acc * f.grid().volume();
}

double min_value(const SpectralField& f) {
  double m = f.values()[0];
  for (double v : f.values()) m = std::min(m, v);
  return m;
}

double max_value(const SpectralField& f) {
  double m = f.values()[0];
  for (double v : f.values()) m = std::max(m, v);
  return m;
}

bool all_finite(const SpectralField& f) {
  for (double v : f.values())
    if (!std::isfinite(v)) return false;
  return true;
}

SpectralField operator+(const SpectralField& a, const SpectralField& b) {
  return SpectralField::from_values(a.grid(), binary_op(a, b, 1.0));
}

SpectralField operator-(const SpectralField& a, const SpectralField& b) {
  return SpectralField::from_values(a.grid(), binary_op(a, b, -1.0));
}

SpectralField operator*(const SpectralField& a, const SpectralField& b) {
  if (a.grid() != b.grid()) throw Error("field grids differ");
  std::vector<double> v(a.values());
  const auto& w = b.values();
  for (std::size_t i = 0; i < v.size(); ++i) v[i] *= w[i];
  return SpectralField::from_values(a.grid(), std::move(v));
}

SpectralField operator*(double s, const SpectralField& a) {
  std::vector<double> v(a.values());
  for (double& x : v) x *= s;
  return SpectralField::from_values(a.grid(), std::move(v));
}

SpectralField operator+(const SpectralField& a, double s) {
  std::vector<double> v(a.values());
  for (double& x : v) x += s;
  return SpectralField::from_values(a.grid(), std::move(v));
}

SpectralField operator-(const SpectralField& a) { return -1.0 * a; }

SpectralField map(const SpectralField& f, const std::function<double(double)>& fn) {
  std::vector<double> v(f.values());
  for (double& x : v) x = fn(x);
  return SpectralField::from_values(f.grid(), std::move(v));
}

VectorField operator+(const VectorField& a, const VectorField& b) {
  VectorField out;
  for (int i = 0; i < a.dim(); ++i) out.comp.push_back(a[i] + b[i]);
  return out;
}

VectorField operator-(const VectorField& a, const VectorField& b) {
  VectorField out;
  for (int i = 0; i < a.dim(); ++i) out.comp.push_back(a[i] - b[i]);
  return out;
}

VectorField operator*(double s, const VectorField& a) {
  VectorField out;
  for (int i = 0; i < a.dim(); ++i) out.comp.push_back(s * a[i]);
  return out;
}

VectorField operator*(const SpectralField& s, const VectorField& a) {
  VectorField out;
  for (int i = 0; i < a.dim(); ++i) out.comp.push_back(s * a[i]);
  return out;
}

SpectralField dot(const VectorField& a, const VectorField& b) {
  SpectralField s = a[0] * b[0];
  for (int i = 1; i < a.dim(); ++i) s = s + a[i] * b[i];
  return s;
}

MatrixField outer(const VectorField& a, const VectorField& b) {
  MatrixField m;
  m.d = a.dim();
  for (int i = 0; i < m.d; ++i)
    for (int j = 0; j < m.d; ++j) m.comp.push_back(a[i] * b[j]);
  return m;
}

MatrixField operator+(const MatrixField& a, const MatrixField& b) {
  MatrixField out;
  out.d = a.d;
  for (std::size_t i = 0; i < a.comp.size(); ++i)
    out.comp.push_back(a.comp[i] + b.comp[i]);
  return out;
}

MatrixField operator-(const MatrixField& a, const MatrixField& b) {
  MatrixField out;
  out.d = a.d;
  for (std::size_t i = 0; i < a.comp.size(); ++i)
    out.comp.push_back(a.comp[i] - b.comp[i]);
  return out;
}

MatrixField operator*(double s, const MatrixField& a) {
  MatrixField out;
  out.d = a.d;
  for (const auto& c : a.comp) out.comp.push_back(s * c);
  return out;
}

MatrixField operator*(const SpectralField& s, const MatrixField& a) {
  MatrixField out;
  out.d = a.d;
  for (const auto& c : a.comp) out.comp.push_back(s * c);
  return out;
}

MatrixField transpose(const MatrixField& a) {
  MatrixField out;
  out.d = a.d;
  for (int i = 0; i < a.d; ++i)
    for (int j = 0; j < a.d; ++j) out.comp.push_back(a.at(j, i));
  return out;
}

MatrixField sym_part(const MatrixField& a) { return 0.5 * (a + transpose(a)); }

MatrixField antisym_part(const MatrixField& a) {
  return 0.5 * (a - transpose(a));
}

SpectralField ddot(const MatrixField& a, const MatrixField& b) {
  SpectralField s = a.comp[0] * b.comp[0];
  for (std::size_t i = 1; i < a.comp.size(); ++i) s = s + a.comp[i] * b.comp[i];
  return s;
}

VectorField matvec(const MatrixField& a, const VectorField& v) {
  VectorField out;
  for (int i = 0; i < a.d; ++i) {
    SpectralField s = a.at(i, 0) * v[0];
    for (int j = 1; j < a.d; ++j) s = s + a.at(i, j) * v[j];
    out.comp.push_back(std::move(s));
  }
  return out;
}

bool all_finite(const VectorField& v) {
  for (const auto& c : v.comp)
    if (!all_finite(c)) return false;
  return true;
}

double linf_norm(const VectorField& v) {
  // sup over the grid of the Euclidean component norm
  double m = 0;
  const std::size_t n = v[0].values().size();
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0;
    for (int a = 0; a < v.dim(); ++a) s += v[a].values()[i] * v[a].values()[i];
    m = std::max(m, s);
  }
  return std::sqrt(m);
}

double l2_norm(const VectorField& v) {
  double s = 0;
  for (const auto& c : v.comp) {
    double n = l2_norm(c);
    s += n * n;
  }
  return std::sqrt(s);
}

}  // namespace qnsp
