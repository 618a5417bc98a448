#include "qnsp/functionals.hpp"

#include <cmath>

#include "qnsp/errors.hpp"

namespace qnsp {

namespace {

SpectralField dealiased_map(const SpectralField& f,
                            const std::function<double(double)>& fn) {
  return dealias(map(f, fn));
}

double quad_nonneg(const SpectralField& f) {
  // grid quadrature of a pointwise-nonnegative integrand
  double s = 0;
  for (double v : f.values()) s += v;
  return s * f.grid().cell_volume();
}

SpectralField frobenius_sq(const MatrixField& m) {
  SpectralField s = m.comp[0] * m.comp[0];
  for (std::size_t i = 1; i < m.comp.size(); ++i)
    s = s + m.comp[i] * m.comp[i];
  return s;
}

SpectralField norm_sq(const VectorField& v) { return dot(v, v); }

void require_floor(const SpectralField& rho, double floor, const char* what) {
  if (min_value(rho) < floor)
    throw FloorViolationError(std::string(what) + " requires min rho >= rho_floor");
}

}  // namespace

EnergyReport energy(const State& s, const ModelParams& p) {
  EnergyReport r;
  const VectorField u = velocity_from_momentum(s.rho, s.mom, p);
  const SpectralField u2 = dot(u, u);

  r.kinetic = 0.5 * inner(s.rho, u2);
  if (p.eta > 0) {
    require_floor(s.rho, p.rho_floor, "cold energy");
    r.cold = p.eta / 11.0 *
             quad_nonneg(map(s.rho, [](double v) { return std::pow(v, -10); }));
  }
  r.pressure = quad_nonneg(map(s.rho, [&](double v) {
                 return std::pow(std::max(v, 0.0), p.gamma);
               })) /
               (p.gamma - 1.0);
  if (p.delta > 0) {
    VectorField gl4 = gradient(laplacian_pow(s.rho, 4));
    r.high_order = 0.5 * p.delta * quad_nonneg(norm_sq(gl4));
  }
  {
    SpectralField sq = map(s.rho, [](double v) { return std::sqrt(std::max(v, 0.0)); });
    r.quantum = 2.0 * quad_nonneg(norm_sq(gradient(dealias(sq))));
  }
  r.electrostatic = 0.5 * quad_nonneg(norm_sq(gradient(s.V)));

  // dissipation ledger
  const MatrixField gu = gradient(u);
  r.rho_Du_sq = inner(s.rho, frobenius_sq(sym_part(gu)));
  if (p.eps > 0) {
    VectorField gp = gradient(dealiased_map(s.rho, [&](double v) {
      return std::pow(std::max(v, 0.0), p.gamma / 2);
    }));
    r.eps_grad_rho_gamma2_sq = 4.0 * p.eps / p.gamma * quad_nonneg(norm_sq(gp));
  }
  if (p.eps > 0 && p.eta > 0) {
    VectorField g5 = gradient(dealiased_map(s.rho, [](double v) {
      return std::pow(v, -5);
    }));
    r.eps_eta_grad_rho_m5_sq = 0.4 * p.eps * p.eta * quad_nonneg(norm_sq(g5));
  }
  if (p.delta > 0 && p.eps > 0) {
    SpectralField l5 = laplacian_pow(s.rho, 5);
    r.delta_eps_lap5_rho_sq = p.delta * p.eps * quad_nonneg(l5 * l5);
  }
  r.r0_u_sq = p.r0 * quad_nonneg(u2);
  r.r1_rho_u4 = p.r1 * inner(s.rho, u2 * u2);
  if (p.mu > 0) {
    double acc = 0;
    for (int a = 0; a < u.dim(); ++a) {
      SpectralField lu = laplacian_pow(u[a], 1);
      acc += quad_nonneg(lu * lu);
    }
    r.mu_lap_u_sq = p.mu * acc;
  }
  if (p.eps > 0 && min_value(s.rho) >= p.rho_floor) {
    // skipped (zero) on vacuum states, where log rho has no meaning
    SpectralField lg = dealias(map(s.rho, [](double v) { return std::log(v); }));
    r.eps_rho_hess_log_rho_sq = p.eps * inner(s.rho, frobenius_sq(hessian(lg)));
  }
  r.rho_u_sq = inner(s.rho, u2);
  return r;
}

EntropyReport bd_entropy(const State& s, const ModelParams& p,
                         const DopingProfile& dop) {
  require_floor(s.rho, p.rho_floor, "BD entropy");
  EntropyReport r;
  const VectorField u = velocity_from_momentum(s.rho, s.mom, p);
  const SpectralField lg = dealias(map(s.rho, [](double v) { return std::log(v); }));
  const VectorField glog = gradient(lg);
  const VectorField w = u + glog;

  r.rho_w_sq_half = 0.5 * inner(s.rho, dot(w, w));
  r.pressure = quad_nonneg(map(s.rho, [&](double v) {
                 return std::pow(v, p.gamma);
               })) /
               (p.gamma - 1.0);
  {
    SpectralField sq = dealias(map(s.rho, [](double v) { return std::sqrt(v); }));
    r.grad_sqrt_rho_sq = r.grad_sqrt_coeff * quad_nonneg(norm_sq(gradient(sq)));
  }
  if (p.eta > 0)
    r.cold = r.eta_potential_coeff * p.eta / 11.0 *
             quad_nonneg(map(s.rho, [](double v) { return std::pow(v, -10); }));
  r.log_convex =
      quad_nonneg(map(s.rho, [](double v) { return v * (std::log(v) - 1) + 1; }));
  r.r0_log = -p.r0 * integrate(lg);
  if (p.delta > 0)
    r.high_order =
        0.5 * p.delta * quad_nonneg(norm_sq(gradient(laplacian_pow(s.rho, 4))));
  r.electrostatic = 0.5 * quad_nonneg(norm_sq(gradient(s.V)));

  // dissipation ledger
  const MatrixField gu = gradient(u);
  r.rho_Au_sq = inner(s.rho, frobenius_sq(antisym_part(gu)));
  {
    VectorField gp = gradient(dealiased_map(s.rho, [&](double v) {
      return std::pow(v, p.gamma / 2);
    }));
    const double base = quad_nonneg(norm_sq(gp));
    r.grad_rho_gamma2_sq = 4.0 / p.gamma * base;
    r.eps_grad_rho_gamma2_sq = 4.0 * p.eps / p.gamma * base;
  }
  const SpectralField u2 = dot(u, u);
  r.r0_u_sq = p.r0 * quad_nonneg(u2);
  r.r1_rho_u4 = p.r1 * inner(s.rho, u2 * u2);
  r.rho_u_sq = inner(s.rho, u2);
  r.eps_rho_grad_log_rho_sq = p.eps * inner(s.rho, norm_sq(glog));
  if (p.eta > 0) {
    VectorField g5 = gradient(dealiased_map(s.rho, [](double v) {
      return std::pow(v, -5);
    }));
    const double base = quad_nonneg(norm_sq(g5));
    r.eta_grad_rho_m5_sq = 0.4 * p.eta * base;
    r.eps_eta_grad_rho_m5_sq = 0.4 * p.eps * p.eta * base;
  }
  if (p.mu > 0) {
    double acc = 0;
    for (int a = 0; a < u.dim(); ++a) {
      SpectralField lu = laplacian_pow(u[a], 1);
      acc += quad_nonneg(lu * lu);
    }
    r.mu_lap_u_sq = p.mu * acc;
  }
  if (p.delta > 0) {
    SpectralField l5 = laplacian_pow(s.rho, 5);
    const double base = quad_nonneg(l5 * l5);
    r.delta_lap5_rho_sq = p.delta * base;
    r.delta_eps_lap5_rho_sq = p.delta * p.eps * base;
  }
  const SpectralField lap_rho = laplacian_pow(s.rho, 1);
  if (p.eps > 0) {
    std::vector<double> q(lap_rho.values());
    const auto& rv = s.rho.values();
    for (std::size_t i = 0; i < q.size(); ++i) q[i] = q[i] * q[i] / rv[i];
    r.eps_lap_rho_sq_over_rho =
        p.eps * quad_nonneg(SpectralField::from_values(s.rho.grid(), std::move(q)));
  }
  {
    const double base = inner(s.rho, frobenius_sq(hessian(lg)));
    r.rho_hess_log_rho_sq = base;
    r.eps_rho_hess_log_rho_sq = p.eps * base;
  }
  {
    const double base = inner(s.rho, s.rho - dop.g);
    r.rho_rho_minus_g = base;
    r.eps_rho_rho_minus_g = p.eps * base;
  }

  // remainders
  const VectorField grho = gradient(s.rho);
  if (p.eps > 0) {
    // same contraction variant as the assembled eps-coupling term
    VectorField coup = p.eps_coupling_transpose ? matvec(transpose(gu), grho)
                                                : matvec(gu, grho);
    r.remainder[0] = -p.eps * integrate(dot(coup, glog));
    r.remainder[1] = 0.5 * p.eps * inner(lap_rho, norm_sq(glog));
    SpectralField div_m = divergence(s.mom);
    std::vector<double> q(div_m.values());
    const auto& rv = s.rho.values();
    const auto& lv = lap_rho.values();
    for (std::size_t i = 0; i < q.size(); ++i) q[i] = lv[i] * q[i] / rv[i];
    r.remainder[3] =
        -p.eps * integrate(SpectralField::from_values(s.rho.grid(), std::move(q)));
    // R6 = -eps r0 int Lap rho / rho
    std::vector<double> q6(lap_rho.values());
    for (std::size_t i = 0; i < q6.size(); ++i) q6[i] /= rv[i];
    r.remainder[5] =
        -p.eps * p.r0 *
        integrate(SpectralField::from_values(s.rho.grid(), std::move(q6)));
  }
  if (p.r1 > 0) {
    const SpectralField u2f = dot(u, u);
    r.remainder[2] = -p.r1 * integrate(u2f * dot(u, grho));
  }
  if (p.mu > 0) {
    VectorField lap_u;
    for (int a = 0; a < u.dim(); ++a) lap_u.comp.push_back(laplacian_pow(u[a], 1));
    r.remainder[4] = -p.mu * integrate(dot(lap_u, gradient(laplacian_pow(lg, 1))));
  }
  return r;
}

TensorFields tensors(const State& s, const ModelParams& p) {
  const VectorField u = velocity_from_momentum(s.rho, s.mom, p);
  const SpectralField sq =
      dealias(map(s.rho, [](double v) { return std::sqrt(std::max(v, 0.0)); }));
  const MatrixField gu = gradient(u);
  TensorFields tf{dealias(sq * gu),
                  dealias(sq * sym_part(gu)),
                  dealias(sq * antisym_part(gu)),
                  MatrixField::zeros(s.rho.grid())};

  const VectorField gs = gradient(sq);
  const MatrixField rhs = 2.0 * dealias(sq * hessian(sq)) - 2.0 * dealias(outer(gs, gs));
  // S from the defining identity sqrt(rho) S = rhs (pointwise, floored)
  MatrixField S;
  S.d = rhs.d;
  const auto& sv = sq.values();
  for (const auto& compf : rhs.comp) {
    std::vector<double> v(compf.values());
    for (std::size_t i = 0; i < v.size(); ++i)
      v[i] /= std::max(sv[i], std::sqrt(p.rho_floor));
    S.comp.push_back(SpectralField::from_values(s.rho.grid(), std::move(v)));
  }
  tf.S = S;
  // re-verify the identity
  double res = 0;
  const MatrixField back = sq * S;
  for (std::size_t i = 0; i < back.comp.size(); ++i)
    res = std::max(res, linf_norm(back.comp[i] - rhs.comp[i]));
  tf.identity_residual = res;
  return tf;
}

double dissipation_identity_residual(const State& s, const SpectralField& phi,
                                     const ModelParams& p) {
  const VectorField u = velocity_from_momentum(s.rho, s.mom, p);
  const SpectralField sq =
      dealias(map(s.rho, [](double v) { return std::sqrt(std::max(v, 0.0)); }));
  const MatrixField T = dealias(sq * gradient(u));
  const VectorField gs = gradient(sq);
  const VectorField gphi = gradient(phi);
  const VectorField ru = dealias(s.rho * u);
  const int d = s.rho.grid().dim();
  double acc = 0;
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      const double a = inner(sq * T.at(i, j), phi);
      const double b = inner(ru[i], gphi[j]);
      const double c = 2.0 * inner(sq * u[i] * gs[j], phi);
      acc += (a + b + c) * (a + b + c);
    }
  return std::sqrt(acc);
}

SobolevReport sobolev_certificate(const SpectralField& rho, int k) {
  if (k < 2) throw ConfigError("Sobolev certificate needs k >= 2 (k > 3/2)");
  if (min_value(rho) <= 0)
    throw FloorViolationError("Sobolev certificate requires positive density");
  SobolevReport r;
  SpectralField inv = map(rho, [](double v) { return 1.0 / v; });
  r.left = linf_norm(inv);
  const double hs = sobolev_norm(rho, k + 2);
  const double l3 = lp_norm(inv, 3.0);
  r.right_factor = std::pow(1.0 + hs, 2) * std::pow(1.0 + l3, 3);
  r.ratio = r.left / r.right_factor;
  return r;
}

CertificateReport make_certificate(const State& s, const ModelParams& p,
                                   const DopingProfile& dop,
                                   double divu_integral) {
  CertificateReport c;
  c.t = s.t;
  c.energy = energy(s, p);
  if (min_value(s.rho) >= p.rho_floor) {
    c.entropy = bd_entropy(s, p, dop);
  } else {
    c.entropy_valid = false;  // vacuum: the BD ledger has no meaning
  }
  c.mass = integrate(s.rho);
  c.mean_V = integrate(s.V);
  c.min_rho = min_value(s.rho);
  c.max_rho = max_value(s.rho);
  const VectorField u = velocity_from_momentum(s.rho, s.mom, p);
  c.div_u_inf = linf_norm(divergence(u));
  c.divu_integral = divu_integral;
  return c;
}

}  // namespace qnsp
