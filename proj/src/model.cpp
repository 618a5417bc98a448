#include "qnsp/model.hpp"

#include <cmath>

#include "qnsp/errors.hpp"

namespace qnsp {

void ModelParams::validate() const {
  if (!(gamma > 1.0)) throw ConfigError("gamma must be > 1");
  if (eps < 0 || mu < 0 || delta < 0 || eta < 0 || r0 < 0 || r1 < 0)
    throw ConfigError("regularization strengths must be nonnegative");
  if (!(rho_floor > 0)) throw ConfigError("rho_floor must be positive");
  if (compat_tol_rel <= 0) throw ConfigError("compat_tol_rel must be positive");
}

ModelParams ModelParams::paper_faithful(ModelParams base) {
  base.r0 = base.eps;
  base.r1 = base.eps;
  return base;
}

DopingProfile DopingProfile::mean_shifted(SpectralField g, double target_mass,
                                          double* shift_out) {
  const double vol = g.grid().volume();
  const double shift = (target_mass - integrate(g)) / vol;
  if (shift != 0.0) g = g + shift;
  if (shift_out) *shift_out = shift;
  return DopingProfile{std::move(g), target_mass};
}

DopingProfile doping_uniform(const Grid& grid, double mass) {
  return DopingProfile{SpectralField::constant(grid, mass / grid.volume()), mass};
}

DopingProfile doping_cosine(const Grid& grid, double mass, int mode,
                            double amplitude) {
  auto g = SpectralField::sample(grid, [&](const std::array<double, 3>& x) {
    return amplitude * std::cos(2 * std::numbers::pi * mode * x[0] / grid.length(0));
  });
  return DopingProfile::mean_shifted(g + mass / grid.volume(), mass);
}

DopingProfile doping_gaussian_bump(const Grid& grid, double mass, double width,
                                   double amplitude) {
  auto g = SpectralField::sample(grid, [&](const std::array<double, 3>& x) {
    double d2 = 0;
    for (int a = 0; a < grid.dim(); ++a) {
      double dx = x[a] - grid.length(a) / 2;
      // nearest periodic image
      dx -= grid.length(a) * std::round(dx / grid.length(a));
      d2 += dx * dx;
    }
    return amplitude * std::exp(-d2 / (2 * width * width));
  });
  return DopingProfile::mean_shifted(std::move(g), mass);
}

void validate_state(const State& s, const ModelParams& p) {
  const double rmin = min_value(s.rho);
  if (rmin < 0)
    throw FloorViolationError("density negative on the grid (min " +
                              std::to_string(rmin) + ")");
  if ((p.eta > 0 || p.delta > 0) && rmin < p.rho_floor)
    throw FloorViolationError(
        "density below rho_floor while eta/delta regularization is active");
  if (std::abs(integrate(s.V)) > 1e-12)
    throw Error("potential must have zero mean");
  // momentum must vanish on vacuum
  double mscale = 0;
  for (const auto& c : s.mom.comp) mscale = std::max(mscale, linf_norm(c));
  const auto& rv = s.rho.values();
  for (std::size_t i = 0; i < rv.size(); ++i) {
    if (rv[i] <= p.vacuum_threshold) {
      for (const auto& c : s.mom.comp)
        if (std::abs(c.values()[i]) > 1e-12 * std::max(1.0, mscale))
          throw ConfigError("momentum must vanish where the density vanishes");
    }
  }
}

SpectralField solve_poisson(const SpectralField& rho, const DopingProfile& dop,
                            const ModelParams& p) {
  SpectralField f = rho - dop.g;
  const double tol = p.compat_tol_rel * std::max(1.0, std::abs(dop.target_mass));
  const double defect = integrate(f);
  if (std::abs(defect) > tol)
    throw CompatibilityError(
        "Poisson compatibility violated: mass defect " + std::to_string(defect),
        defect);
  // force the zero mode exactly before inversion so tiny defects do not leak
  std::vector<std::complex<double>> c = f.coef();
  c[0] = 0.0;
  return inverse_laplacian_zero_mean(SpectralField::from_coefficients(f.grid(), std::move(c)),
                                     tol);
}

VectorField velocity_from_momentum(const SpectralField& rho,
                                   const VectorField& mom,
                                   const ModelParams& p) {
  const auto& rv = rho.values();
  VectorField u;
  for (int a = 0; a < mom.dim(); ++a) {
    std::vector<double> v(mom[a].values());
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (rv[i] <= p.vacuum_threshold)
        v[i] = 0.0;
      else
        v[i] /= std::max(rv[i], p.rho_floor);
    }
    u.comp.push_back(dealias(SpectralField::from_values(rho.grid(), std::move(v))));
  }
  return u;
}

namespace {

void require_floor(const SpectralField& rho, const ModelParams& p,
                   const char* what) {
  if (min_value(rho) < p.rho_floor)
    throw FloorViolationError(std::string(what) +
                              " requires min rho >= rho_floor");
}

}  // namespace

VectorField bohm_force(const SpectralField& rho, BohmForm form,
                       const ModelParams& p) {
  switch (form) {
    case BohmForm::divergence_log_rho: {
      require_floor(rho, p, "div(rho Hess log rho)");
      SpectralField lg = dealias(map(rho, [](double v) { return std::log(v); }));
      MatrixField t = dealias(rho * hessian(lg));
      return divergence(t);
    }
    case BohmForm::gradient_ratio: {
      require_floor(rho, p, "2 rho grad(Lap sqrt(rho)/sqrt(rho))");
      SpectralField s = map(rho, [](double v) { return std::sqrt(v); });
      SpectralField lap = laplacian_pow(dealias(s), 1);
      std::vector<double> ratio(lap.values());
      const auto& sv = s.values();
      for (std::size_t i = 0; i < ratio.size(); ++i) ratio[i] /= sv[i];
      SpectralField q = dealias(SpectralField::from_values(rho.grid(), std::move(ratio)));
      return 2.0 * dealias(rho * gradient(q));
    }
    case BohmForm::sqrt_split: {
      // well defined down to vacuum
      SpectralField s = dealias(map(rho, [](double v) {
        return std::sqrt(std::max(v, 0.0));
      }));
      VectorField gs = gradient(s);
      MatrixField t = 2.0 * dealias(s * hessian(s)) - 2.0 * dealias(outer(gs, gs));
      return divergence(t);
    }
  }
  throw Error("unknown Bohm form");
}

VectorField pressure_gradient_sqrt_form(const SpectralField& rho,
                                        const ModelParams& p) {
  SpectralField rg2 = dealias(map(rho, [&](double v) {
    return std::pow(std::max(v, 0.0), p.gamma / 2);
  }));
  return 2.0 * dealias(rg2 * gradient(rg2));
}

SpectralField continuity_rhs(const State& s, const ModelParams& p) {
  SpectralField out = -divergence(s.mom);
  if (p.eps > 0) out = out + p.eps * laplacian_pow(s.rho, 1);
  return dealias(out);
}

VectorField assemble_momentum_rhs(const State& s, const ModelParams& p,
                                  TermLedger* ledger) {
  return assemble_momentum_rhs(s, velocity_from_momentum(s.rho, s.mom, p), p,
                               ledger);
}

VectorField assemble_momentum_rhs(const State& s, const VectorField& u,
                                  const ModelParams& p, TermLedger* ledger) {
  const Grid& g = s.rho.grid();
  VectorField rhs = VectorField::zeros(g);

  auto add = [&](const char* name, const VectorField& term) {
    if (!all_finite(term))
      throw BlowUpError(std::string("non-finite momentum term: ") + name);
    if (ledger) (*ledger)[name] = l2_norm(term);
    rhs = rhs + term;
  };

  add("convection", -1.0 * divergence(dealias(s.rho * dealias(outer(u, u)))));
  add("viscosity", divergence(dealias(s.rho * sym_part(gradient(u)))));
  {
    SpectralField pg = dealias(map(s.rho, [&](double v) {
      return std::pow(std::max(v, 0.0), p.gamma);
    }));
    add("pressure", -1.0 * gradient(pg));
  }
  add("electrostatic", -1.0 * dealias(s.rho * gradient(s.V)));
  if (p.eta > 0) {
    require_floor(s.rho, p, "cold pressure");
    SpectralField inv10 =
        dealias(map(s.rho, [](double v) { return std::pow(v, -10); }));
    add("cold_pressure", p.eta * gradient(inv10));
  }
  if (p.mu > 0) {
    VectorField lap2;
    for (int a = 0; a < u.dim(); ++a) lap2.comp.push_back(laplacian_pow(u[a], 2));
    add("hyperviscosity", -p.mu * lap2);
  }
  if (p.eps > 0) {
    MatrixField gu = gradient(u);
    VectorField gr = gradient(s.rho);
    VectorField coup = p.eps_coupling_transpose
                           ? dealias(matvec(transpose(gu), gr))
                           : dealias(matvec(gu, gr));
    add("eps_coupling", -p.eps * coup);
  }
  add("bohm", bohm_force(s.rho, p.bohm_form, p));
  add("damping", -1.0 * s.mom);
  if (p.r0 > 0) add("friction_r0", -p.r0 * u);
  if (p.r1 > 0) {
    SpectralField u2 = dealias(dot(u, u));
    SpectralField ru2 = dealias(s.rho * u2);
    add("friction_r1", -p.r1 * dealias(ru2 * u));
  }
  if (p.delta > 0) {
    VectorField gl = gradient(laplacian_pow(s.rho, 9));
    add("high_order", p.delta * dealias(s.rho * gl));
  }
  return dealias(rhs);
}

}  // namespace qnsp
