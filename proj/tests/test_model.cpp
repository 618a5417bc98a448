#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <limits>

#include "qnsp/errors.hpp"
#include "oracle_helpers.hpp"

using namespace qnsp;

namespace {

State make_state(const SpectralField& rho, const VectorField& u,
                 const DopingProfile& dop, const ModelParams& p) {
  VectorField mom;
  for (int a = 0; a < rho.grid().dim(); ++a) mom.comp.push_back(dealias(rho * u[a]));
  return State{0.0, rho, mom, solve_poisson(rho, dop, p)};
}

}  // namespace

TEST_CASE("solve_poisson: matched doping, eigenfunction, linearity") {
  const Grid g = Grid::uniform(1, 64);
  ModelParams p;
  auto cosx = SpectralField::sample(
      g, [](const std::array<double, 3>& x) { return std::cos(x[0]); });

  SpectralField rho = SpectralField::constant(g, 1.0);
  DopingProfile dop = doping_uniform(g, integrate(rho));
  CHECK(linf_norm(solve_poisson(rho, dop, p)) < 1e-13);

  SpectralField rho2 = cosx + 1.0;
  CHECK(linf_norm(solve_poisson(rho2, dop, p) - cosx) < 1e-12);

  SpectralField rho3 = 0.3 * cosx + 1.0;
  CHECK(linf_norm(solve_poisson(rho3, dop, p) - 0.3 * cosx) < 1e-12);

  SpectralField bad = rho + 0.5;
  CHECK_THROWS_AS(solve_poisson(bad, dop, p), CompatibilityError);
  try {
    solve_poisson(bad, dop, p);
  } catch (const CompatibilityError& e) {
    CHECK(e.measured_mean() == doctest::Approx(0.5 * g.volume()));
  }
}

TEST_CASE("velocity_from_momentum: division, vacuum zeroing, oracle") {
  const Grid g = Grid::uniform(1, 64);
  ModelParams p;

  SpectralField rho = SpectralField::constant(g, 2.0);
  VectorField m = VectorField::zeros(g);
  m.comp[0] = SpectralField::constant(g, 4.0);
  VectorField u = velocity_from_momentum(rho, m, p);
  CHECK(linf_norm(u[0] + (-2.0)) < 1e-13);

  // vacuum region: u forced to zero there
  SpectralField rho_vac = SpectralField::sample(g, [&](const std::array<double, 3>& x) {
    return x[0] < 1.0 ? 0.0 : 1.0;
  });
  VectorField mv = VectorField::zeros(g);
  VectorField uv = velocity_from_momentum(rho_vac, mv, p);
  CHECK(linf_norm(uv[0]) < 1e-13);

  // pointwise division oracle
  auto rho3 = SpectralField::sample(
      g, [](const std::array<double, 3>& x) { return 1.0 + 0.5 * std::cos(x[0]); });
  auto sinx = SpectralField::sample(
      g, [](const std::array<double, 3>& x) { return std::sin(x[0]); });
  VectorField m3 = VectorField::zeros(g);
  m3.comp[0] = rho3 * sinx;
  VectorField u3 = velocity_from_momentum(rho3, m3, p);
  CHECK(linf_norm(u3[0] - sinx) <= 1e-10);
}

TEST_CASE("bohm_force vanishes on constant densities in all three forms") {
  const Grid g = Grid::uniform(1, 64);
  ModelParams p;
  SpectralField rho = SpectralField::constant(g, 0.7);
  for (auto form : {BohmForm::divergence_log_rho, BohmForm::gradient_ratio,
                    BohmForm::sqrt_split})
    CHECK(linf_norm(bohm_force(rho, form, p)[0]) < 1e-12);
}

TEST_CASE("bohm_force: three forms agree pairwise on exp(a cos x)") {
  const Grid g = Grid::uniform(1, 64);
  ModelParams p;
  auto rho = SpectralField::sample(g, [](const std::array<double, 3>& x) {
    return std::exp(0.3 * std::cos(x[0]));
  });
  VectorField fa = bohm_force(rho, BohmForm::divergence_log_rho, p);
  VectorField fb = bohm_force(rho, BohmForm::gradient_ratio, p);
  VectorField fc = bohm_force(rho, BohmForm::sqrt_split, p);
  const double scale = l2_norm(fa[0]);
  CHECK(l2_norm(fa[0] - fb[0]) <= 1e-8 * scale);
  CHECK(l2_norm(fb[0] - fc[0]) <= 1e-8 * scale);
  CHECK(l2_norm(fa[0] - fc[0]) <= 1e-8 * scale);
}

TEST_CASE("bohm_force matches the symbolic oracle on 1 + 0.1 cos x") {
  const Grid g = Grid::uniform(1, 64);
  ModelParams p;
  const double a = 0.1;
  auto rho = SpectralField::sample(g, [&](const std::array<double, 3>& x) {
    return 1.0 + a * std::cos(x[0]);
  });
  // closed forms: s = sqrt(rho), force = 2 rho (s''/s)' = 2 rho (s''' s - s'' s')/s^2
  auto oracle = SpectralField::sample(g, [&](const std::array<double, 3>& xx) {
    const double x = xx[0];
    const double r = 1.0 + a * std::cos(x);
    const double s = std::sqrt(r);
    const double s1 = -a * std::sin(x) / (2 * s);
    const double s2 = -a * std::cos(x) / (2 * s) -
                      a * a * std::sin(x) * std::sin(x) / (4 * s * s * s);
    const double s3 = a * std::sin(x) / (2 * s) +
                      a * std::cos(x) * s1 / (2 * s * s) -
                      a * a * std::sin(x) * std::cos(x) / (2 * s * s * s) +
                      3 * a * a * std::sin(x) * std::sin(x) * s1 / (4 * s * s * s * s);
    return 2 * r * (s3 * s - s2 * s1) / (s * s);
  });
  VectorField f = bohm_force(rho, BohmForm::gradient_ratio, p);
  CHECK(l2_norm(f[0] - oracle) <= 1e-8 * std::max(1.0, l2_norm(oracle)));
}

TEST_CASE("bohm_force floor violation for log/ratio forms near vacuum") {
  const Grid g = Grid::uniform(1, 64);
  ModelParams p;
  auto rho = SpectralField::sample(g, [](const std::array<double, 3>& x) {
    return 0.5 * (1.0 - std::cos(x[0]));  // touches zero
  });
  CHECK_THROWS_AS(bohm_force(rho, BohmForm::divergence_log_rho, p),
                  FloorViolationError);
  CHECK_THROWS_AS(bohm_force(rho, BohmForm::gradient_ratio, p),
                  FloorViolationError);
  CHECK_NOTHROW(bohm_force(rho, BohmForm::sqrt_split, p));
}

TEST_CASE("bohm form equivalence property on random smooth densities") {
  VerifyResult res = verify_bohm(64, 5, 0.5, 1e-6, 500);
  CHECK(res.pass);
  CHECK(res.detail["worst"].get<double>() <= 1e-6);
}

TEST_CASE("equilibrium state has zero tendencies") {
  const Grid g = Grid::uniform(1, 64);
  ModelParams p;
  p.eta = 1e-3;
  p.mu = 1e-3;
  p.delta = 1e-8;
  p.r0 = p.r1 = 1e-2;
  p.eps = 1e-2;
  SpectralField rho = SpectralField::constant(g, 1.0);
  DopingProfile dop = doping_uniform(g, integrate(rho));
  State s = make_state(rho, VectorField::zeros(g), dop, p);
  CHECK(linf_norm(continuity_rhs(s, p)) < 1e-12);
  TermLedger led;
  VectorField rhs = assemble_momentum_rhs(s, p, &led);
  CHECK(linf_norm(rhs[0]) < 1e-10);
  CHECK(led.at("pressure") < 1e-10);
  CHECK(led.at("bohm") < 1e-10);
}

TEST_CASE("viscosity-dominated example matches the symbolic total") {
  const Grid g = Grid::uniform(1, 64);
  ModelParams p;  // all regularizations zero
  SpectralField rho = SpectralField::constant(g, 1.0);
  DopingProfile dop = doping_uniform(g, integrate(rho));
  VectorField u = VectorField::zeros(g);
  u.comp[0] = SpectralField::sample(
      g, [](const std::array<double, 3>& x) { return std::sin(x[0]); });
  State s = make_state(rho, u, dop, p);
  // active terms: viscosity u'' + convection -(u^2)' + damping -u
  auto ref = SpectralField::sample(g, [](const std::array<double, 3>& x) {
    return -std::sin(x[0]) - std::sin(2 * x[0]) - std::sin(x[0]);
  });
  VectorField rhs = assemble_momentum_rhs(s, p);
  CHECK(l2_norm(rhs[0] - ref) <= 1e-10 * l2_norm(ref));
}

TEST_CASE("cold pressure term isolates to the symbolic eta gradient") {
  const Grid g = Grid::uniform(1, 64);
  const double eta = 1e-3, a = 0.2;
  auto rho = SpectralField::sample(g, [&](const std::array<double, 3>& x) {
    return 1.0 + a * std::cos(x[0]);
  });
  DopingProfile dop = doping_uniform(g, integrate(rho));
  ModelParams with, without;
  with.eta = eta;
  VectorField u = VectorField::zeros(g);
  State s = make_state(rho, u, dop, with);
  VectorField diff =
      assemble_momentum_rhs(s, with) - assemble_momentum_rhs(s, without);
  auto oracle = SpectralField::sample(g, [&](const std::array<double, 3>& x) {
    const double r = 1.0 + a * std::cos(x[0]);
    return eta * (-10.0) * std::pow(r, -11) * (-a * std::sin(x[0]));
  });
  CHECK(l2_norm(diff[0] - oracle) <= 1e-8 * l2_norm(oracle));
}

TEST_CASE("pressure-only tendency matches the product rule") {
  const Grid g = Grid::uniform(1, 128);
  ModelParams p;
  p.gamma = 1.7;
  auto rho = SpectralField::sample(g, [](const std::array<double, 3>& x) {
    return 1.0 + 0.3 * std::cos(x[0]);
  });
  SpectralField pg = dealias(map(rho, [&](double v) { return std::pow(v, p.gamma); }));
  VectorField lhs = -1.0 * gradient(pg);
  SpectralField fac = dealias(
      map(rho, [&](double v) { return -p.gamma * std::pow(v, p.gamma - 1.0); }));
  VectorField rhs = dealias(fac * gradient(rho));
  CHECK(l2_norm(lhs[0] - rhs[0]) <= 1e-9 * std::max(1.0, l2_norm(lhs[0])));
}

TEST_CASE("two pressure routes agree: direct gradient vs sqrt form") {
  const Grid g = Grid::uniform(1, 128);
  ModelParams p;
  p.gamma = 2.3;
  SpectralField rho = random_band_limited(g, 5, 0.6, 0.5, 77);
  SpectralField pg =
      dealias(map(rho, [&](double v) { return std::pow(v, p.gamma); }));
  VectorField direct = gradient(pg);
  VectorField sqrt_form = pressure_gradient_sqrt_form(rho, p);
  CHECK(l2_norm(direct[0] - sqrt_form[0]) <=
        1e-7 * std::max(1.0, l2_norm(direct[0])));
}

TEST_CASE("continuity tendency: divergence and heat parts") {
  const Grid g = Grid::uniform(1, 64);
  ModelParams p;
  SpectralField one = SpectralField::constant(g, 1.0);
  DopingProfile dop = doping_uniform(g, integrate(one));

  VectorField u = VectorField::zeros(g);
  u.comp[0] = SpectralField::sample(
      g, [](const std::array<double, 3>& x) { return std::sin(x[0]); });
  State s = make_state(one, u, dop, p);
  auto ref = SpectralField::sample(
      g, [](const std::array<double, 3>& x) { return -std::cos(x[0]); });
  CHECK(l2_norm(continuity_rhs(s, p) - ref) < 1e-12);

  ModelParams ph;
  ph.eps = 0.1;
  auto rho = SpectralField::sample(g, [](const std::array<double, 3>& x) {
    return 1.1 + std::cos(x[0]);
  });
  DopingProfile dop2 = doping_uniform(g, integrate(rho));
  State s2 = make_state(rho, VectorField::zeros(g), dop2, ph);
  auto ref2 = SpectralField::sample(g, [&](const std::array<double, 3>& x) {
    return -0.1 * std::cos(x[0]);
  });
  CHECK(l2_norm(continuity_rhs(s2, ph) - ref2) < 1e-12);
}

TEST_CASE("mass conservation: continuity tendency has exactly zero mean") {
  const Grid g = Grid::uniform(2, 16);
  ModelParams p;
  p.eps = 0.3;
  for (unsigned s = 0; s < 5; ++s) {
    SpectralField rho = random_band_limited(g, 4, 0.5, 1.0, 900 + s);
    VectorField u = VectorField::zeros(g);
    for (int a = 0; a < 2; ++a)
      u.comp[a] = random_band_limited(
          g, 4, -std::numeric_limits<double>::infinity(), 0.3, 950 + 2 * s + a);
    DopingProfile dop = doping_uniform(g, integrate(rho));
    State st = make_state(rho, u, dop, p);
    CHECK(std::abs(mean(continuity_rhs(st, p))) < 1e-15);
  }
}

TEST_CASE("assemble reports non-finite terms by name") {
  const Grid g = Grid::uniform(1, 64);
  ModelParams p;
  SpectralField rho = SpectralField::constant(g, 1.0);
  DopingProfile dop = doping_uniform(g, integrate(rho));
  State s = make_state(rho, VectorField::zeros(g), dop, p);
  std::vector<double> bad(g.points(), 1.0);
  bad[3] = std::nan("");
  s.mom.comp[0] = SpectralField::from_values(g, std::move(bad));
  CHECK_THROWS_WITH_AS(assemble_momentum_rhs(s, p),
                       doctest::Contains("convection"), BlowUpError);
}

TEST_CASE("eps coupling contraction variants differ as expected") {
  const Grid g = Grid::uniform(2, 32);
  ModelParams p;
  p.eps = 1.0;
  SpectralField rho = random_band_limited(g, 3, 0.5, 1.0, 321);
  VectorField u = VectorField::zeros(g);
  u.comp[0] = random_band_limited(g, 3, -std::numeric_limits<double>::infinity(),
                                  0.2, 322);
  u.comp[1] = random_band_limited(g, 3, -std::numeric_limits<double>::infinity(),
                                  0.2, 323);
  DopingProfile dop = doping_uniform(g, integrate(rho));
  State s = make_state(rho, u, dop, p);
  ModelParams pt = p;
  pt.eps_coupling_transpose = true;
  VectorField d = assemble_momentum_rhs(s, p) - assemble_momentum_rhs(s, pt);
  CHECK(l2_norm(d) > 1e-6);
}

TEST_CASE("state validation enforces the vacuum-momentum compatibility") {
  const Grid g = Grid::uniform(1, 64);
  ModelParams p;
  auto rho = SpectralField::sample(g, [](const std::array<double, 3>& x) {
    return 0.5 * (1.0 - std::cos(x[0]));
  });
  VectorField mom = VectorField::zeros(g);
  mom.comp[0] = SpectralField::constant(g, 1.0);  // nonzero on the vacuum point
  State s{0.0, rho, mom, SpectralField::zeros(g)};
  CHECK_THROWS_AS(validate_state(s, p), ConfigError);

  // momentum = rho * u vanishes with rho: valid
  VectorField ok = VectorField::zeros(g);
  ok.comp[0] = rho * SpectralField::constant(g, 1.0);
  State s2{0.0, rho, ok, SpectralField::zeros(g)};
  CHECK_NOTHROW(validate_state(s2, p));
}

TEST_CASE("doping presets hit the target mass exactly") {
  const Grid g = Grid::uniform(1, 64);
  const double M = 2 * std::numbers::pi * 1.3;
  for (const DopingProfile& dop :
       {doping_uniform(g, M), doping_cosine(g, M, 2, 0.2),
        doping_gaussian_bump(g, M, 0.5, 0.7)}) {
    CHECK(std::abs(integrate(dop.g) - M) < 1e-12 * M);
  }
}

TEST_CASE("bohm forms agree pairwise in two dimensions") {
  const Grid g = Grid::uniform(2, 32);
  ModelParams p;
  SpectralField raw = random_band_limited(
      g, 3, -std::numeric_limits<double>::infinity(), 1.0, 777);
  double slope = 0;
  for (int a = 0; a < 2; ++a)
    slope = std::max(slope, linf_norm(derivative(raw, a, 1)));
  SpectralField rho = (0.12 / slope) * raw;
  rho = rho + (0.6 - min_value(rho));
  VectorField fa = bohm_force(rho, BohmForm::divergence_log_rho, p);
  VectorField fb = bohm_force(rho, BohmForm::gradient_ratio, p);
  VectorField fc = bohm_force(rho, BohmForm::sqrt_split, p);
  const double scale = std::max(1.0, l2_norm(fa));
  for (int a = 0; a < 2; ++a) {
    CHECK(l2_norm(fa[a] - fb[a]) <= 1e-6 * scale);
    CHECK(l2_norm(fa[a] - fc[a]) <= 1e-6 * scale);
  }
}
