#include "qnsp/mollifier.hpp"

#include <cmath>
#include <map>

#include "qnsp/errors.hpp"

namespace qnsp {

namespace {

double raw_bump(double s) {
  // supported in (-1/2, 1/2)
  const double z = 2 * s;
  if (std::abs(z) >= 1.0) return 0.0;
  return std::exp(-1.0 / (1.0 - z * z));
}

// Composite Simpson on [-1/2, 1/2]; the integrand is C-infinity with compact
// support so a fixed fine rule reaches ~1e-12.
template <class F>
double simpson_half(F&& f, int intervals = 4096) {
  const double a = -0.5, b = 0.5;
  const double h = (b - a) / intervals;
  double s = f(a) + f(b);
  for (int i = 1; i < intervals; ++i)
    s += f(a + i * h) * (i % 2 == 1 ? 4.0 : 2.0);
  return s * h / 3.0;
}

}  // namespace

Mollifier::Mollifier(double radius) : radius_(radius) {
  if (radius <= 0) throw WindowError("mollifier radius must be positive");
  mass1d_ = simpson_half([](double s) { return raw_bump(s); });
}

double Mollifier::bump1d(double s) const { return raw_bump(s) / mass1d_; }

double Mollifier::profile(const std::vector<double>& arg) const {
  double p = 1.0;
  for (double a : arg) p *= bump1d(a);
  return p;
}

double Mollifier::profile_mass(int space_dim) const {
  const double m = simpson_half([this](double s) { return bump1d(s); });
  return std::pow(m, 1 + space_dim);
}

double Mollifier::space_symbol(double kappa) const {
  const double theta = kappa * radius_;
  const double num =
      simpson_half([&](double s) { return bump1d(s) * std::cos(theta * s); });
  const double den = simpson_half([&](double s) { return bump1d(s); });
  return num / den;
}

std::vector<std::pair<double, SpectralField>> mollify(
    const std::vector<std::pair<double, SpectralField>>& samples,
    const Mollifier& m) {
  if (samples.size() < 3) throw ResolutionError("mollify needs >= 3 time samples");
  const Grid& g = samples.front().second.grid();
  const double r = m.radius();
  for (int a = 0; a < g.dim(); ++a)
    if (!(r < g.length(a) / 4))
      throw WindowError("mollifier radius must satisfy r < L/4");

  const double dt = samples[1].first - samples[0].first;
  for (std::size_t i = 1; i < samples.size(); ++i) {
    const double step = samples[i].first - samples[i - 1].first;
    if (std::abs(step - dt) > 1e-9 * std::max(1.0, std::abs(dt)))
      throw ResolutionError("mollify requires uniformly spaced time samples");
  }
  if (dt > r / 4 + 1e-12)
    throw ResolutionError("time sampling too coarse: need spacing <= r/4");

  // Spatial factor: exact symbol per axis wavenumber, normalized at zero.
  std::vector<std::map<int, double>> axis_symbol(g.dim());
  detail::for_each_mode(g, [&](std::size_t, const std::array<int, 3>& k,
                               const std::array<double, 3>& kap) {
    for (int a = 0; a < g.dim(); ++a)
      if (!axis_symbol[a].count(std::abs(k[a])))
        axis_symbol[a][std::abs(k[a])] = m.space_symbol(std::abs(kap[a]));
  });

  auto apply_space = [&](const SpectralField& f) {
    return apply_multiplier(f, [&](const std::array<int, 3>& k,
                                   const std::array<double, 3>&) {
      double s = 1.0;
      for (int a = 0; a < g.dim(); ++a) s *= axis_symbol[a].at(std::abs(k[a]));
      return s;
    });
  };

  const double t0 = samples.front().first;
  const double t1 = samples.back().first;
  std::vector<std::pair<double, SpectralField>> out;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double t = samples[i].first;
    if (t - t0 < r || t1 - t < r) continue;  // defined for t > r only
    // discrete time convolution with weights renormalized to unit mass
    std::vector<double> w;
    std::vector<std::size_t> js;
    for (std::size_t j = 0; j < samples.size(); ++j) {
      const double arg = (t - samples[j].first) / r;
      const double wj = m.bump1d(arg);
      if (wj > 0) {
        w.push_back(wj);
        js.push_back(j);
      }
    }
    double wsum = 0;
    for (double x : w) wsum += x;
    std::vector<double> acc(g.points(), 0.0);
    for (std::size_t q = 0; q < js.size(); ++q) {
      const auto& v = samples[js[q]].second.values();
      const double c = w[q] / wsum;
      for (std::size_t p = 0; p < acc.size(); ++p) acc[p] += c * v[p];
    }
    out.emplace_back(t, apply_space(SpectralField::from_values(g, std::move(acc))));
  }
  if (out.empty())
    throw WindowError("mollify window (r, T-r) contains no sample times");
  return out;
}

}  // namespace qnsp
