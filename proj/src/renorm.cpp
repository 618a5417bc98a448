#include "qnsp/renorm.hpp"

#include <algorithm>
#include <cmath>

#include "qnsp/errors.hpp"

namespace qnsp {

// ---------------------------------------------------------------------------
// Truncation profile
// ---------------------------------------------------------------------------

namespace {

// raw bridge bump on (0,1)
double bridge_bump(double s) {
  if (s <= 0 || s >= 1) return 0.0;
  return std::exp(-1.0 / (s * (1.0 - s)));
}

double bridge_bump_d1(double s) {
  if (s <= 0 || s >= 1) return 0.0;
  const double e1 = 1.0 / (s * s) - 1.0 / ((1.0 - s) * (1.0 - s));
  return bridge_bump(s) * e1;
}

// 16-point Gauss-Legendre nodes/weights on [-1,1]
constexpr double kGx[8] = {0.0950125098376374, 0.2816035507792589,
                           0.4580167776572274, 0.6178762444026438,
                           0.7554044083550030, 0.8656312023878318,
                           0.9445750230732326, 0.9894009349916499};
constexpr double kGw[8] = {0.1894506104550685, 0.1826034150449236,
                           0.1691565193950025, 0.1495959888165767,
                           0.1246289712555339, 0.0951585116824928,
                           0.0622535239386479, 0.0271524594117541};

template <class F>
double gauss16(F&& f, double a, double b) {
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  double s = 0;
  for (int i = 0; i < 8; ++i)
    s += kGw[i] * (f(c + h * kGx[i]) + f(c - h * kGx[i]));
  return s * h;
}

}  // namespace

TruncationFamily::TruncationFamily() {
  bridge_mass_ = 0;
  const int sub = 64;
  for (int i = 0; i < sub; ++i)
    bridge_mass_ += gauss16(bridge_bump, static_cast<double>(i) / sub,
                            static_cast<double>(i + 1) / sub);

  // cumulative integral of bar over [1,2]
  table_n_ = 2048;
  tilde_table_.assign(table_n_ + 1, 0.0);
  double acc = 0;
  for (int i = 0; i < table_n_; ++i) {
    const double a = 1.0 + static_cast<double>(i) / table_n_;
    const double b = 1.0 + static_cast<double>(i + 1) / table_n_;
    acc += gauss16([this](double z) { return bar(z); }, a, b);
    tilde_table_[i + 1] = acc;
  }
  tilde_sat_ = 1.0 + tilde_table_[table_n_];

  bar_d1_sup_ = bridge_bump(0.5) / bridge_mass_;
  double d2max = 0;
  for (int i = 0; i <= 200000; ++i)
    d2max = std::max(d2max, std::abs(bridge_bump_d1(i / 200000.0)));
  // scan-based supremum with a small inflation so it certifies sampled sups
  bar_d2_sup_ = d2max / bridge_mass_ * (1.0 + 1e-9);
}

const TruncationFamily& TruncationFamily::standard() {
  static TruncationFamily fam;
  return fam;
}

double TruncationFamily::bar(double z) const {
  const double a = std::abs(z);
  if (a <= 1.0) return 1.0;
  if (a >= 2.0) return 0.0;
  // 1 - normalized integral of the bridge bump over (0, a-1)
  double x = a - 1.0;
  const int sub = 16;
  double acc = 0;
  for (int i = 0; i < sub; ++i)
    acc += gauss16(bridge_bump, x * i / sub, x * (i + 1) / sub);
  return std::clamp(1.0 - acc / bridge_mass_, 0.0, 1.0);
}

double TruncationFamily::bar_d1(double z) const {
  const double a = std::abs(z);
  if (a <= 1.0 || a >= 2.0) return 0.0;
  const double sgn = z > 0 ? 1.0 : -1.0;
  return -sgn * bridge_bump(a - 1.0) / bridge_mass_;
}

double TruncationFamily::bar_d2(double z) const {
  const double a = std::abs(z);
  if (a <= 1.0 || a >= 2.0) return 0.0;
  return -bridge_bump_d1(a - 1.0) / bridge_mass_;
}

double TruncationFamily::tilde(double z) const {
  const double a = std::abs(z);
  const double sgn = z >= 0 ? 1.0 : -1.0;
  if (a <= 1.0) return z;  // exact on [-1,1]
  if (a >= 2.0) return sgn * tilde_sat_;
  // cubic Hermite on the tabulated cumulative integral, slopes are bar()
  const double x = (a - 1.0) * table_n_;
  const int i = std::min(static_cast<int>(x), table_n_ - 1);
  const double s = x - i;
  const double h = 1.0 / table_n_;
  const double y0 = tilde_table_[i], y1 = tilde_table_[i + 1];
  const double m0 = bar(1.0 + static_cast<double>(i) / table_n_) * h;
  const double m1 = bar(1.0 + static_cast<double>(i + 1) / table_n_) * h;
  const double s2 = s * s, s3 = s2 * s;
  const double v = (2 * s3 - 3 * s2 + 1) * y0 + (s3 - 2 * s2 + s) * m0 +
                   (-2 * s3 + 3 * s2) * y1 + (s3 - s2) * m1;
  return sgn * (1.0 + v);
}

// ---------------------------------------------------------------------------
// Truncation evaluations
// ---------------------------------------------------------------------------

TruncationEval beta_l(const std::array<double, 3>& y, int dim, int l,
                      double delta, const TruncationFamily& fam) {
  TruncationEval ev;
  std::array<double, 3> B{1, 1, 1}, B1{0, 0, 0}, B2{0, 0, 0};
  for (int a = 0; a < dim; ++a) {
    const double z = delta * y[a];
    B[a] = fam.bar(z);
    B1[a] = fam.bar_d1(z);
    B2[a] = fam.bar_d2(z);
  }
  const double T = fam.tilde(delta * y[l]);
  auto prod_except = [&](int skip1, int skip2 = -1) {
    double p = 1.0;
    for (int a = 0; a < dim; ++a) {
      if (a == l || a == skip1 || a == skip2) continue;
      p *= B[a];
    }
    return p;
  };
  // on the plateau the truncation is the coordinate itself, exactly
  ev.value = (std::abs(delta * y[l]) <= 1.0 ? y[l] : T / delta) * prod_except(-1);
  for (int j = 0; j < dim; ++j) {
    if (j == l)
      ev.grad[j] = B[l] * prod_except(-1);
    else
      ev.grad[j] = T * B1[j] * prod_except(j);
  }
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) {
      double h;
      if (i == l && j == l)
        h = delta * B1[l] * prod_except(-1);
      else if (i == l)
        h = delta * B[l] * B1[j] * prod_except(j);
      else if (j == l)
        h = delta * B[l] * B1[i] * prod_except(i);
      else if (i == j)
        h = delta * T * B2[i] * prod_except(i);
      else
        h = delta * T * B1[i] * B1[j] * prod_except(i, j);
      ev.hess[i][j] = h;
    }
  return ev;
}

double beta_hat(const std::array<double, 3>& y, int dim, double delta,
                const TruncationFamily& fam) {
  double p = 1.0;
  for (int a = 0; a < dim; ++a) p *= fam.bar(delta * y[a]);
  return p;
}

std::array<double, 3> beta_hat_grad(const std::array<double, 3>& y, int dim,
                                    double delta, const TruncationFamily& fam) {
  std::array<double, 3> B{1, 1, 1}, B1{0, 0, 0};
  for (int a = 0; a < dim; ++a) {
    B[a] = fam.bar(delta * y[a]);
    B1[a] = fam.bar_d1(delta * y[a]);
  }
  std::array<double, 3> g{0, 0, 0};
  for (int j = 0; j < dim; ++j) {
    double p = delta * B1[j];
    for (int a = 0; a < dim; ++a)
      if (a != j) p *= B[a];
    g[j] = p;
  }
  return g;
}

// ---------------------------------------------------------------------------
// Bound verification
// ---------------------------------------------------------------------------

TruncationBoundReport verify_truncation_bounds(const TruncationFamily& fam,
                                               int sample_count, int dim) {
  if (sample_count < 10000)
    throw ConfigError("verify_truncation_bounds needs >= 1e4 samples");
  TruncationBoundReport rep;
  rep.pass = true;

  const std::vector<double> deltas = {1.0, 0.1, 0.01};
  const double zsat = fam.tilde_sup();
  const double d1 = fam.bar_d1_sup();
  const double d2 = fam.bar_d2_sup();

  // sample lattice in the scaled variable z = delta * y, |z|_inf <= 3
  int per_axis = 2;
  while (std::pow(per_axis, dim) < sample_count) ++per_axis;
  std::vector<double> zs(per_axis);
  for (int i = 0; i < per_axis; ++i)
    zs[i] = -3.0 + 6.0 * (i + 0.5) / per_axis;

  std::vector<double> sup_val, sup_grad, sup_hess;
  for (double delta : deltas) {
    double sv = 0, sg = 0, sh = 0, shat = 0, shatg = 0, shaty = 0;
    std::array<double, 3> y{0, 0, 0};
    auto visit = [&](const std::array<double, 3>& z) {
      for (int a = 0; a < dim; ++a) y[a] = z[a] / delta;
      for (int l = 0; l < dim; ++l) {
        TruncationEval ev = beta_l(y, dim, l, delta, fam);
        sv = std::max(sv, std::abs(ev.value));
        for (int j = 0; j < dim; ++j) sg = std::max(sg, std::abs(ev.grad[j]));
        for (int i = 0; i < dim; ++i)
          for (int j = 0; j < dim; ++j)
            sh = std::max(sh, std::abs(ev.hess[i][j]));
      }
      const double bh = beta_hat(y, dim, delta, fam);
      shat = std::max(shat, std::abs(bh));
      auto bg = beta_hat_grad(y, dim, delta, fam);
      for (int j = 0; j < dim; ++j) shatg = std::max(shatg, std::abs(bg[j]));
      double ynorm = 0;
      for (int a = 0; a < dim; ++a) ynorm += y[a] * y[a];
      shaty = std::max(shaty, std::abs(bh) * std::sqrt(ynorm));
    };
    std::array<double, 3> z{0, 0, 0};
    if (dim == 1) {
      for (double z0 : zs) visit({z0, 0, 0});
    } else if (dim == 2) {
      for (double z0 : zs)
        for (double z1 : zs) visit({z0, z1, 0});
    } else {
      for (double z0 : zs)
        for (double z1 : zs)
          for (double z2 : zs) visit({z0, z1, z2});
    }
    (void)z;

    struct Check {
      const char* name;
      double sup;
      double certified;
    };
    const double cg = std::max(1.0, zsat * d1);
    const double ch = std::max({d1, zsat * d2, zsat * d1 * d1});
    const Check checks[6] = {
        {"sup|beta_l| <= C/delta", sv, zsat / delta},
        {"sup|grad beta_l| <= C", sg, cg},
        {"sup|hess beta_l| <= C delta", sh, ch * delta},
        {"sup|beta_hat| <= 1", shat, 1.0},
        {"sup|grad beta_hat| <= C delta", shatg, d1 * delta},
        {"|beta_hat||y| <= C/delta", shaty, 2.0 * std::sqrt(double(dim)) / delta}};
    for (const auto& c : checks) {
      const double ratio = c.sup / c.certified;
      rep.rows.push_back({delta, c.name, c.sup, c.certified, ratio});
      if (ratio > 1.0 + 1e-9) {
        rep.pass = false;
        if (rep.failure.empty())
          rep.failure = std::string(c.name) + " violated at delta=" +
                        std::to_string(delta);
      }
    }
    sup_val.push_back(sv);
    sup_grad.push_back(sg);
    sup_hess.push_back(sh);
  }

  auto slope = [&](const std::vector<double>& sup) {
    // least squares in log-log
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const int n = static_cast<int>(deltas.size());
    for (int i = 0; i < n; ++i) {
      const double x = std::log(deltas[i]), yv = std::log(sup[i]);
      sx += x;
      sy += yv;
      sxx += x * x;
      sxy += x * yv;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
  };
  rep.slope_value = slope(sup_val);
  rep.slope_grad = slope(sup_grad);
  rep.slope_hess = slope(sup_hess);
  if (std::abs(rep.slope_value + 1.0) > 0.1 || std::abs(rep.slope_grad) > 0.1 ||
      std::abs(rep.slope_hess - 1.0) > 0.1) {
    rep.pass = false;
    if (rep.failure.empty()) rep.failure = "scaling slope outside +-0.1";
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Test functions and time quadrature
// ---------------------------------------------------------------------------

double TestFunction::theta(double t) const {
  const double tau = (2 * t - t0 - t1) / (t1 - t0);
  if (std::abs(tau) >= 1.0) return 0.0;
  return std::exp(1.0 - 1.0 / (1.0 - tau * tau));
}

double TestFunction::dtheta(double t) const {
  const double tau = (2 * t - t0 - t1) / (t1 - t0);
  if (std::abs(tau) >= 1.0) return 0.0;
  const double om = 1.0 - tau * tau;
  return theta(t) * (-2.0 * tau / (om * om)) * (2.0 / (t1 - t0));
}

std::vector<TestFunction> builtin_test_functions(const Grid& g, double T) {
  std::vector<TestFunction> out;
  const double L0 = g.length(0);
  struct Spatial {
    const char* id;
    std::function<double(const std::array<double, 3>&)> f;
  };
  const double twopi = 2 * std::numbers::pi;
  std::vector<Spatial> spatial = {
      {"one", [](const std::array<double, 3>&) { return 1.0; }},
      {"cos1", [&, L0](const std::array<double, 3>& x) {
         return std::cos(twopi * x[0] / L0);
       }},
      {"sin1", [&, L0](const std::array<double, 3>& x) {
         return std::sin(twopi * x[0] / L0);
       }},
      {"cos2", [&, L0](const std::array<double, 3>& x) {
         return std::cos(2 * twopi * x[0] / L0);
       }}};
  const std::array<std::pair<double, double>, 2> windows = {
      std::make_pair(0.1 * T, 0.9 * T), std::make_pair(0.25 * T, 0.7 * T)};
  for (const auto& [w0, w1] : windows)
    for (const auto& sp : spatial) {
      SpectralField chi = SpectralField::sample(g, sp.f);
      TestFunction tf{std::string(sp.id) + (w0 == windows[0].first ? "_wide" : "_narrow"),
                      w0, w1, chi, gradient(chi)};
      out.push_back(std::move(tf));
    }
  return out;
}

double time_integrate(const std::vector<double>& values, double dt) {
  const int n = static_cast<int>(values.size()) - 1;  // intervals
  if (n <= 0) return 0.0;
  if (n == 1) return dt * 0.5 * (values[0] + values[1]);
  if (n == 2)
    return dt / 3.0 * (values[0] + 4 * values[1] + values[2]);
  int m = n;
  double tail = 0.0;
  if (n % 2 == 1) {
    m = n - 3;  // Simpson 3/8 on the last three intervals
    const std::size_t b = values.size() - 4;
    tail = 3.0 * dt / 8.0 *
           (values[b] + 3 * values[b + 1] + 3 * values[b + 2] + values[b + 3]);
  }
  double s = 0.0;
  if (m > 0) {
    s = values[0] + values[m];
    for (int i = 1; i < m; ++i) s += values[i] * (i % 2 == 1 ? 4.0 : 2.0);
    s *= dt / 3.0;
  }
  return s + tail;
}

// ---------------------------------------------------------------------------
// Residual suites
// ---------------------------------------------------------------------------

namespace {

struct StateFields {
  VectorField u;
  SpectralField sqrt_rho;
  MatrixField hess_sqrt;
  VectorField grad_sqrt;
  SpectralField rho_g2;
  VectorField grad_rho_g2;
  VectorField grad_quarter;
  MatrixField T, Ts;
  VectorField gradV;
};

StateFields make_fields(const State& s, const ModelParams& p) {
  StateFields f{velocity_from_momentum(s.rho, s.mom, p),
                SpectralField::zeros(s.rho.grid()),
                MatrixField::zeros(s.rho.grid()),
                VectorField::zeros(s.rho.grid()),
                SpectralField::zeros(s.rho.grid()),
                VectorField::zeros(s.rho.grid()),
                VectorField::zeros(s.rho.grid()),
                MatrixField::zeros(s.rho.grid()),
                MatrixField::zeros(s.rho.grid()),
                VectorField::zeros(s.rho.grid())};
  f.sqrt_rho = dealias(map(s.rho, [](double v) { return std::sqrt(std::max(v, 0.0)); }));
  f.hess_sqrt = hessian(f.sqrt_rho);
  f.grad_sqrt = gradient(f.sqrt_rho);
  f.rho_g2 = dealias(map(s.rho, [&](double v) {
    return std::pow(std::max(v, 0.0), p.gamma / 2);
  }));
  f.grad_rho_g2 = gradient(f.rho_g2);
  f.grad_quarter = gradient(
      dealias(map(s.rho, [](double v) { return std::pow(std::max(v, 0.0), 0.25); })));
  const MatrixField gu = gradient(f.u);
  f.T = dealias(f.sqrt_rho * gu);
  f.Ts = dealias(f.sqrt_rho * sym_part(gu));
  f.gradV = gradient(s.V);
  return f;
}

/// Pointwise truncation data sampled at the velocity values.
struct TruncFields {
  SpectralField beta;     // beta_l(u) or beta_hat(u)
  VectorField grad;       // grad_y beta (u)
  MatrixField hess;       // hess_y beta (u) (beta_l only)
};

TruncFields trunc_beta_l(const VectorField& u, int l, double delta,
                         const TruncationFamily& fam) {
  const Grid& g = u.grid();
  const int d = g.dim();
  const std::size_t n = g.points();
  std::vector<double> bv(n);
  std::vector<std::vector<double>> gv(d, std::vector<double>(n));
  std::vector<std::vector<double>> hv(d * d, std::vector<double>(n));
  std::array<double, 3> y{0, 0, 0};
  for (std::size_t x = 0; x < n; ++x) {
    for (int a = 0; a < d; ++a) y[a] = u[a].values()[x];
    TruncationEval ev = beta_l(y, d, l, delta, fam);
    bv[x] = ev.value;
    for (int a = 0; a < d; ++a) gv[a][x] = ev.grad[a];
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) hv[i * d + j][x] = ev.hess[i][j];
  }
  TruncFields tf{SpectralField::from_values(g, std::move(bv)),
                 VectorField::zeros(g), MatrixField::zeros(g)};
  for (int a = 0; a < d; ++a)
    tf.grad[a] = SpectralField::from_values(g, std::move(gv[a]));
  for (int i = 0; i < d * d; ++i)
    tf.hess.comp[i] = SpectralField::from_values(g, std::move(hv[i]));
  return tf;
}

TruncFields trunc_beta_hat(const VectorField& u, double delta,
                           const TruncationFamily& fam) {
  const Grid& g = u.grid();
  const int d = g.dim();
  const std::size_t n = g.points();
  std::vector<double> bv(n);
  std::vector<std::vector<double>> gv(d, std::vector<double>(n));
  std::array<double, 3> y{0, 0, 0};
  for (std::size_t x = 0; x < n; ++x) {
    for (int a = 0; a < d; ++a) y[a] = u[a].values()[x];
    bv[x] = beta_hat(y, d, delta, fam);
    auto bg = beta_hat_grad(y, d, delta, fam);
    for (int a = 0; a < d; ++a) gv[a][x] = bg[a];
  }
  TruncFields tf{SpectralField::from_values(g, std::move(bv)),
                 VectorField::zeros(g), MatrixField::zeros(g)};
  for (int a = 0; a < d; ++a)
    tf.grad[a] = SpectralField::from_values(g, std::move(gv[a]));
  return tf;
}

// sum_{ijk} A_ij H_ik B_kj  (second-order chain-rule contraction)
double contract3(const MatrixField& A, const MatrixField& H,
                 const MatrixField& B, const SpectralField& weight) {
  const int d = A.d;
  double acc = 0;
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      for (int k = 0; k < d; ++k)
        acc += inner(A.at(i, j) * H.at(i, k) * B.at(k, j), weight);
  return acc;
}

void check_window(const Trajectory& traj, const TestFunction& tf) {
  const double ts = traj.saves.front().cert.t;
  const double te = traj.saves.back().cert.t;
  if (tf.t0 < ts || tf.t1 > te)
    throw WindowError("test function support exceeds the trajectory window");
}

double save_spacing(const Trajectory& traj) {
  if (traj.saves.size() < 2) throw WindowError("trajectory has a single save");
  const double dt = traj.saves[1].cert.t - traj.saves[0].cert.t;
  for (std::size_t i = 1; i < traj.saves.size(); ++i) {
    const double step = traj.saves[i].cert.t - traj.saves[i - 1].cert.t;
    if (std::abs(step - dt) > 1e-9 * std::max(1.0, dt))
      throw WindowError("residual quadrature requires uniform save times");
  }
  return dt;
}

}  // namespace

ResidualReport truncated_momentum_residual(const Trajectory& traj,
                                           const TestFunction& psi, int l,
                                           double delta_trunc,
                                           const TruncationFamily& fam,
                                           const ModelParams& p) {
  check_window(traj, psi);
  const double dt = save_spacing(traj);
  const std::size_t ns = traj.saves.size();
  std::map<std::string, std::vector<double>> series;
  auto push = [&](const std::string& k, double v) {
    auto& s = series[k];
    if (s.empty()) s.reserve(ns);
    s.push_back(v);
  };

  for (const auto& save : traj.saves) {
    const State& st = save.state;
    const double th = psi.theta(st.t);
    const double dth = psi.dtheta(st.t);
    if (th == 0.0 && dth == 0.0) {
      for (const char* k :
           {"time", "convective", "pressure", "viscous", "quantum_hess",
            "quantum_grad", "damping", "poisson", "Rtilde_r1", "Rtilde_r0",
            "Rbar_TsT", "Rbar_hessT", "Rbar_quarter"})
        push(k, 0.0);
      continue;
    }
    StateFields f = make_fields(st, p);
    TruncFields b = trunc_beta_l(f.u, l, delta_trunc, fam);
    const int d = st.rho.grid().dim();

    push("time", dth * inner(st.rho * b.beta, psi.chi));
    push("convective", th * inner(st.rho * b.beta, dot(f.u, psi.grad_chi)));
    push("pressure",
         -2.0 * th * inner(f.rho_g2 * dot(f.grad_rho_g2, b.grad), psi.chi));
    {
      double acc = 0;
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
          acc += inner(f.sqrt_rho * f.Ts.at(i, j) * b.grad[i],
                       psi.grad_chi[j]);
      push("viscous", -th * acc);
    }
    {
      double acc = 0;
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
          acc += inner(f.sqrt_rho * f.hess_sqrt.at(i, j) * b.grad[i],
                       psi.grad_chi[j]);
      push("quantum_hess", -2.0 * th * acc);
    }
    {
      double acc = 0;
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
          acc += inner(f.grad_sqrt[i] * f.grad_sqrt[j] * b.grad[i],
                       psi.grad_chi[j]);
      push("quantum_grad", 2.0 * th * acc);
    }
    push("damping", -th * inner(st.rho * dot(f.u, b.grad), psi.chi));
    push("poisson", -th * inner(st.rho * dot(f.gradV, b.grad), psi.chi));
    push("Rtilde_r1",
         -p.r1 * th * inner(st.rho * dot(f.u, f.u) * dot(f.u, b.grad), psi.chi));
    push("Rtilde_r0", -p.r0 * th * inner(dot(f.u, b.grad), psi.chi));
    const SpectralField w = th * psi.chi;
    push("Rbar_TsT", -contract3(f.Ts, b.hess, f.T, w));
    push("Rbar_hessT", -contract3(f.hess_sqrt, b.hess, f.T, w));
    push("Rbar_quarter",
         contract3(outer(f.grad_quarter, f.grad_quarter), b.hess, f.T, w));
  }

  ResidualReport rep;
  for (auto& [k, v] : series) {
    const double val = time_integrate(v, dt);
    rep.terms[k] = val;
    rep.total += val;
    rep.scale += std::abs(val);
  }
  return rep;
}

ResidualReport weak_momentum_residual(const Trajectory& traj,
                                      const TestFunction& psi, int l,
                                      const ModelParams& p) {
  check_window(traj, psi);
  const double dt = save_spacing(traj);
  std::map<std::string, std::vector<double>> series;
  auto push = [&](const std::string& k, double v) { series[k].push_back(v); };

  for (const auto& save : traj.saves) {
    const State& st = save.state;
    const double th = psi.theta(st.t);
    const double dth = psi.dtheta(st.t);
    if (th == 0.0 && dth == 0.0) {
      for (const char* k : {"time", "convective", "pressure", "viscous",
                            "quantum_hess", "quantum_grad", "damping", "poisson",
                            "Rtilde_r1", "Rtilde_r0"})
        push(k, 0.0);
      continue;
    }
    StateFields f = make_fields(st, p);
    const int d = st.rho.grid().dim();

    push("time", dth * inner(st.rho * f.u[l], psi.chi));
    push("convective", th * inner(st.rho * f.u[l], dot(f.u, psi.grad_chi)));
    push("pressure", -2.0 * th * inner(f.rho_g2 * f.grad_rho_g2[l], psi.chi));
    {
      double acc = 0;
      for (int j = 0; j < d; ++j)
        acc += inner(f.sqrt_rho * f.Ts.at(l, j), psi.grad_chi[j]);
      push("viscous", -th * acc);
    }
    {
      double acc = 0;
      for (int j = 0; j < d; ++j)
        acc += inner(f.sqrt_rho * f.hess_sqrt.at(l, j), psi.grad_chi[j]);
      push("quantum_hess", -2.0 * th * acc);
    }
    {
      double acc = 0;
      for (int j = 0; j < d; ++j)
        acc += inner(f.grad_sqrt[l] * f.grad_sqrt[j], psi.grad_chi[j]);
      push("quantum_grad", 2.0 * th * acc);
    }
    push("damping", -th * inner(st.rho * f.u[l], psi.chi));
    push("poisson", -th * inner(st.rho * f.gradV[l], psi.chi));
    push("Rtilde_r1",
         -p.r1 * th * inner(st.rho * dot(f.u, f.u) * f.u[l], psi.chi));
    push("Rtilde_r0", -p.r0 * th * inner(f.u[l], psi.chi));
  }

  ResidualReport rep;
  for (auto& [k, v] : series) {
    const double val = time_integrate(v, dt);
    rep.terms[k] = val;
    rep.total += val;
    rep.scale += std::abs(val);
  }
  return rep;
}

namespace {

ResidualReport dissipation_residual_impl(const Trajectory& traj,
                                         const TestFunction& phi,
                                         const ModelParams& p, bool truncated,
                                         double delta_trunc,
                                         const TruncationFamily* fam) {
  check_window(traj, phi);
  const double dt = save_spacing(traj);
  const int d = traj.saves.front().state.rho.grid().dim();
  // one series per matrix entry and term
  std::vector<std::vector<double>> lhs(d * d), conv(d * d), chain(d * d),
      grad(d * d);
  for (const auto& save : traj.saves) {
    const State& st = save.state;
    const double th = phi.theta(st.t);
    if (th == 0.0) {
      for (int e = 0; e < d * d; ++e) {
        lhs[e].push_back(0);
        conv[e].push_back(0);
        chain[e].push_back(0);
        grad[e].push_back(0);
      }
      continue;
    }
    StateFields f = make_fields(st, p);
    TruncFields b =
        truncated ? trunc_beta_hat(f.u, delta_trunc, *fam)
                  : TruncFields{SpectralField::constant(st.rho.grid(), 1.0),
                                VectorField::zeros(st.rho.grid()),
                                MatrixField::zeros(st.rho.grid())};
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        const int e = i * d + j;
        lhs[e].push_back(th * inner(f.sqrt_rho * f.T.at(i, j) * b.beta, phi.chi));
        conv[e].push_back(
            th * inner(b.beta * st.rho * f.u[i], phi.grad_chi[j]));
        double ch = 0;
        if (truncated)
          for (int k = 0; k < d; ++k)
            ch += inner(f.sqrt_rho * f.u[i] * b.grad[k] * f.T.at(k, j),
                        phi.chi);
        chain[e].push_back(th * ch);
        grad[e].push_back(
            2.0 * th * inner(f.sqrt_rho * f.u[i] * f.grad_sqrt[j] * b.beta,
                             phi.chi));
      }
  }
  ResidualReport rep;
  double fro = 0, scale = 0;
  for (int e = 0; e < d * d; ++e) {
    const double a = time_integrate(lhs[e], dt);
    const double bb = time_integrate(conv[e], dt);
    const double c = time_integrate(chain[e], dt);
    const double dd = time_integrate(grad[e], dt);
    const double res = a + bb + c + dd;
    fro += res * res;
    scale += std::abs(a) + std::abs(bb) + std::abs(c) + std::abs(dd);
  }
  rep.total = std::sqrt(fro);
  rep.scale = scale;
  rep.terms["frobenius"] = rep.total;
  return rep;
}

}  // namespace

ResidualReport truncated_dissipation_residual(const Trajectory& traj,
                                              const TestFunction& phi,
                                              double delta_trunc,
                                              const TruncationFamily& fam,
                                              const ModelParams& p) {
  return dissipation_residual_impl(traj, phi, p, true, delta_trunc, &fam);
}

ResidualReport weak_dissipation_residual(const Trajectory& traj,
                                         const TestFunction& phi,
                                         const ModelParams& p) {
  return dissipation_residual_impl(traj, phi, p, false, 0.0, nullptr);
}

// ---------------------------------------------------------------------------
// Commutator
// ---------------------------------------------------------------------------

double commutator_norm(const std::vector<std::pair<double, SpectralField>>& rho,
                       const std::vector<std::pair<double, VectorField>>& u,
                       double r) {
  if (rho.size() != u.size() || rho.size() < 3)
    throw WindowError("commutator needs matching rho/u sample sequences");
  const Grid& g = rho.front().second.grid();
  const double T = rho.back().first - rho.front().first;
  if (!(r < T / 4))
    throw WindowError("commutator radius must satisfy r < T/4");
  for (int a = 0; a < g.dim(); ++a)
    if (!(r < g.length(a) / 4))
      throw WindowError("commutator radius must satisfy r < L/4");

  Mollifier m(r);
  std::vector<std::pair<double, SpectralField>> divseq;
  divseq.reserve(rho.size());
  for (std::size_t i = 0; i < rho.size(); ++i) {
    VectorField flux;
    for (int a = 0; a < g.dim(); ++a)
      flux.comp.push_back(dealias(rho[i].second * u[i].second[a]));
    divseq.emplace_back(rho[i].first, divergence(flux));
  }
  auto rho_bar = mollify(rho, m);
  auto div_bar = mollify(divseq, m);

  const double dt = rho[1].first - rho[0].first;
  std::vector<double> l1;
  l1.reserve(rho_bar.size());
  for (std::size_t i = 0; i < rho_bar.size(); ++i) {
    const double t = rho_bar[i].first;
    const std::size_t j =
        static_cast<std::size_t>(std::lround((t - rho.front().first) / dt));
    VectorField flux;
    for (int a = 0; a < g.dim(); ++a)
      flux.comp.push_back(dealias(rho_bar[i].second * u[j].second[a]));
    SpectralField c = div_bar[i].second - divergence(flux);
    l1.push_back(lp_norm(c, 1.0));
  }
  // trapezoid over the admissible window
  double acc = 0;
  for (std::size_t i = 1; i < l1.size(); ++i) acc += 0.5 * dt * (l1[i - 1] + l1[i]);
  return acc;
}

}  // namespace qnsp
