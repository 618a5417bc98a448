#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <limits>

#include "qnsp/errors.hpp"
#include "oracle_helpers.hpp"

using namespace qnsp;
using qnsp::testing::dense_quadrature_1d;
using qnsp::testing::flow_derivative;

namespace {

const double kPi = std::numbers::pi;

State make_state(const SpectralField& rho, const VectorField& u,
                 const DopingProfile& dop, const ModelParams& p) {
  VectorField mom;
  for (int a = 0; a < rho.grid().dim(); ++a) mom.comp.push_back(dealias(rho * u[a]));
  return State{0.0, rho, mom, solve_poisson(rho, dop, p)};
}

/// Smooth positive state with every term active; the potential is left zero
/// until the caller attaches the matched doping profile.
State rich_state(const Grid& g, const ModelParams& p, unsigned seed,
                 double min_rho = 0.7, double u_amp = 0.25, int max_mode = 4) {
  (void)p;
  SpectralField raw = random_band_limited(
      g, max_mode, -std::numeric_limits<double>::infinity(), 1.0, seed);
  double slope = 0;
  for (int a = 0; a < g.dim(); ++a)
    slope = std::max(slope, linf_norm(derivative(raw, a, 1)));
  SpectralField rho = (0.25 / slope) * raw;
  rho = dealias(rho + (min_rho - min_value(rho)));
  VectorField u = VectorField::zeros(g);
  for (int a = 0; a < g.dim(); ++a)
    u.comp[a] = dealias(u_amp * random_band_limited(
                            g, max_mode,
                            -std::numeric_limits<double>::infinity(), 1.0,
                            seed + 13 + a));
  VectorField mom;
  for (int a = 0; a < g.dim(); ++a) mom.comp.push_back(dealias(rho * u[a]));
  return State{0.0, rho, std::move(mom), SpectralField::zeros(g)};
}

}  // namespace

TEST_CASE("energy of trivial states matches closed forms") {
  const Grid g = Grid::uniform(1, 64);
  ModelParams p;
  p.gamma = 2.0;
  p.eta = 1e-3;
  SpectralField one = SpectralField::constant(g, 1.0);
  DopingProfile dop = doping_uniform(g, integrate(one));
  State s = make_state(one, VectorField::zeros(g), dop, p);
  EnergyReport e = energy(s, p);
  CHECK(e.total() ==
        doctest::Approx(2 * kPi * (1.0 / (p.gamma - 1) + p.eta / 11)).epsilon(1e-13));
  CHECK(e.kinetic == 0.0);
  CHECK(e.quantum < 1e-20);
  CHECK(e.electrostatic < 1e-25);

  VectorField u = VectorField::zeros(g);
  u.comp[0] = SpectralField::sample(
      g, [](const std::array<double, 3>& x) { return std::sin(x[0]); });
  State s2 = make_state(one, u, dop, p);
  CHECK(energy(s2, p).kinetic == doctest::Approx(kPi / 2).epsilon(1e-13));

  ModelParams p3;
  p3.gamma = 2.0;
  auto rho3 = SpectralField::sample(g, [](const std::array<double, 3>& x) {
    return 1.0 + 0.2 * std::cos(x[0]);
  });
  DopingProfile dop3 = doping_uniform(g, integrate(rho3));
  State s3 = make_state(rho3, VectorField::zeros(g), dop3, p3);
  // gamma = 2: int rho^2 = 2 pi (1 + a^2/2)
  CHECK(energy(s3, p3).pressure == doctest::Approx(2 * kPi * 1.02).epsilon(1e-13));
}

TEST_CASE("energy components are nonnegative on random states") {
  const Grid g = Grid::uniform(1, 32);
  ModelParams p;
  p.eta = 1e-4;
  p.eps = 1e-2;
  p.mu = 1e-4;
  p.delta = 1e-12;
  p.r0 = p.r1 = 1e-2;
  for (unsigned s = 0; s < 4; ++s) {
    SpectralField rho = random_band_limited(g, 4, 0.6, 0.4, 40 + s);
    DopingProfile dop = doping_uniform(g, integrate(rho));
    VectorField u = VectorField::zeros(g);
    u.comp[0] = random_band_limited(
        g, 4, -std::numeric_limits<double>::infinity(), 0.3, 60 + s);
    State st = make_state(rho, u, dop, p);
    EnergyReport e = energy(st, p);
    for (double c : {e.kinetic, e.cold, e.pressure, e.high_order, e.quantum,
                     e.electrostatic})
      CHECK(c >= 0.0);
    for (double c : {e.rho_Du_sq, e.eps_grad_rho_gamma2_sq,
                     e.eps_eta_grad_rho_m5_sq, e.delta_eps_lap5_rho_sq,
                     e.r0_u_sq, e.r1_rho_u4, e.mu_lap_u_sq,
                     e.eps_rho_hess_log_rho_sq, e.rho_u_sq})
      CHECK(c >= 0.0);
  }
}

TEST_CASE("BD entropy of trivial states") {
  const Grid g = Grid::uniform(1, 64);
  ModelParams p;
  p.r0 = 0.3;
  SpectralField one = SpectralField::constant(g, 1.0);
  DopingProfile dop = doping_uniform(g, integrate(one));
  State s = make_state(one, VectorField::zeros(g), dop, p);
  EntropyReport bd = bd_entropy(s, p, dop);
  CHECK(bd.rho_w_sq_half < 1e-20);  // w = 0
  CHECK(bd.log_convex < 1e-14);     // rho(log rho - 1) + 1 = 0 at rho = 1
  CHECK(std::abs(bd.r0_log) < 1e-14);

  // rho = e: the convex component is 1 per unit volume
  SpectralField e_rho = SpectralField::constant(g, std::exp(1.0));
  DopingProfile dop_e = doping_uniform(g, integrate(e_rho));
  State se = make_state(e_rho, VectorField::zeros(g), dop_e, p);
  CHECK(bd_entropy(se, p, dop_e).log_convex ==
        doctest::Approx(g.volume()).epsilon(1e-13));
}

TEST_CASE("BD effective-velocity part matches a dense quadrature oracle") {
  const Grid g = Grid::uniform(1, 64);
  ModelParams p;
  const double a = 0.2;
  auto rho = SpectralField::sample(g, [&](const std::array<double, 3>& x) {
    return 1.0 + a * std::cos(x[0]);
  });
  DopingProfile dop = doping_uniform(g, integrate(rho));
  State s = make_state(rho, VectorField::zeros(g), dop, p);
  EntropyReport bd = bd_entropy(s, p, dop);
  // u = 0: 1/2 int rho |grad log rho|^2 = 1/2 int (rho')^2 / rho
  const double oracle = dense_quadrature_1d([&](double x) {
    const double r = 1.0 + a * std::cos(x);
    const double rp = -a * std::sin(x);
    return 0.5 * rp * rp / r;
  });
  CHECK(bd.rho_w_sq_half == doctest::Approx(oracle).epsilon(1e-10));
}

TEST_CASE("BD entropy requires the density floor") {
  const Grid g = Grid::uniform(1, 64);
  ModelParams p;
  auto rho = SpectralField::sample(g, [](const std::array<double, 3>& x) {
    return 0.5 * (1 - std::cos(x[0]));
  });
  DopingProfile dop = doping_uniform(g, integrate(rho));
  VectorField mom = VectorField::zeros(g);
  State s{0.0, rho, mom, SpectralField::zeros(g)};
  CHECK_THROWS_AS(bd_entropy(s, p, dop), FloorViolationError);
}

TEST_CASE("effective velocity identity: w-part decomposes exactly") {
  const Grid g = Grid::uniform(1, 64);
  ModelParams p;
  State s = rich_state(g, p, 71);
  DopingProfile dop = doping_uniform(g, integrate(s.rho));
  s.V = solve_poisson(s.rho, dop, p);
  EntropyReport bd = bd_entropy(s, p, dop);
  // 1/2 rho|w|^2 = 1/2 rho|u|^2 + u . grad rho + 2 |grad sqrt rho|^2
  const VectorField u = velocity_from_momentum(s.rho, s.mom, p);
  const double kin = 0.5 * inner(s.rho, dot(u, u));
  const double cross = integrate(dot(u, gradient(s.rho)));
  SpectralField sq = dealias(map(s.rho, [](double v) { return std::sqrt(v); }));
  const double quant = 2.0 * integrate(dot(gradient(sq), gradient(sq)));
  CHECK(bd.rho_w_sq_half == doctest::Approx(kin + cross + quant).epsilon(1e-8));
}

TEST_CASE("tensor fields: algebra, symmetry, defining identity") {
  const Grid g = Grid::uniform(2, 16);
  ModelParams p;
  State s = rich_state(g, p, 5, 0.8, 0.3, 3);
  DopingProfile dop = doping_uniform(g, integrate(s.rho));
  s.V = solve_poisson(s.rho, dop, p);
  TensorFields tf = tensors(s, p);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      CHECK(linf_norm(tf.T.at(i, j) - tf.Ts.at(i, j) - tf.Ta.at(i, j)) <= 1e-12);
      CHECK(linf_norm(tf.Ts.at(i, j) - tf.Ts.at(j, i)) <= 1e-12);
      CHECK(linf_norm(tf.Ta.at(i, j) + tf.Ta.at(j, i)) <= 1e-12);
    }
  CHECK(tf.identity_residual <= 1e-10);
}

TEST_CASE("tensors on trivial states") {
  const Grid g = Grid::uniform(1, 64);
  ModelParams p;
  SpectralField one = SpectralField::constant(g, 1.0);
  DopingProfile dop = doping_uniform(g, integrate(one));
  VectorField u = VectorField::zeros(g);
  u.comp[0] = SpectralField::sample(
      g, [](const std::array<double, 3>& x) { return std::sin(x[0]); });
  State s = make_state(one, u, dop, p);
  TensorFields tf = tensors(s, p);
  CHECK(linf_norm(tf.S.at(0, 0)) < 1e-12);   // constant density
  CHECK(linf_norm(tf.Ta.at(0, 0)) < 1e-14);  // 1-D gradients are symmetric
}

TEST_CASE("capillarity tensor matches the symbolic oracle on exp(0.4 cos x)") {
  const Grid g = Grid::uniform(1, 64);
  ModelParams p;
  auto rho = SpectralField::sample(g, [](const std::array<double, 3>& x) {
    return std::exp(0.4 * std::cos(x[0]));
  });
  DopingProfile dop = doping_uniform(g, integrate(rho));
  State s = make_state(rho, VectorField::zeros(g), dop, p);
  TensorFields tf = tensors(s, p);
  // with s(x) = exp(0.2 cos x): s' = -0.2 sin x s, s'' = (0.04 sin^2 x - 0.2 cos x) s
  auto oracle = SpectralField::sample(g, [](const std::array<double, 3>& xx) {
    const double x = xx[0];
    const double sv = std::exp(0.2 * std::cos(x));
    const double s1 = -0.2 * std::sin(x) * sv;
    const double s2 = (0.04 * std::sin(x) * std::sin(x) - 0.2 * std::cos(x)) * sv;
    return (2 * sv * s2 - 2 * s1 * s1) / sv;
  });
  CHECK(l2_norm(tf.S.at(0, 0) - oracle) <= 1e-8 * std::max(1.0, l2_norm(oracle)));
}

TEST_CASE("dissipation identity residual: trivial and random cases") {
  const Grid g = Grid::uniform(1, 64);
  ModelParams p;
  SpectralField one = SpectralField::constant(g, 1.0);
  DopingProfile dop = doping_uniform(g, integrate(one));
  auto phi = SpectralField::sample(
      g, [](const std::array<double, 3>& x) { return std::cos(2 * x[0]); });

  State rest = make_state(one, VectorField::zeros(g), dop, p);
  CHECK(dissipation_identity_residual(rest, phi, p) <= 1e-14);

  VectorField u = VectorField::zeros(g);
  u.comp[0] = SpectralField::sample(
      g, [](const std::array<double, 3>& x) { return std::sin(3 * x[0]); });
  State flat = make_state(one, u, dop, p);
  CHECK(dissipation_identity_residual(flat, phi, p) <= 1e-12);

  VerifyResult res = verify_dissipation_identity(64, 99, 1e-8);
  CHECK(res.pass);
}

TEST_CASE("Sobolev certificate: constants and a bounded family") {
  const Grid g = Grid::uniform(1, 64);
  SpectralField one = SpectralField::constant(g, 1.0);
  SobolevReport r1 = sobolev_certificate(one, 2);
  CHECK(r1.left == doctest::Approx(1.0));
  // ||1||_{H^4} = sqrt(vol), ||1||_{L^3} = vol^{1/3}
  const double vol = g.volume();
  const double rf = std::pow(1 + std::sqrt(vol), 2) *
                    std::pow(1 + std::pow(vol, 1.0 / 3.0), 3);
  CHECK(r1.right_factor == doctest::Approx(rf).epsilon(1e-12));

  auto rho = SpectralField::sample(g, [](const std::array<double, 3>& x) {
    return 1.0 + 0.5 * std::cos(x[0]);
  });
  SobolevReport r2 = sobolev_certificate(rho, 2);
  CHECK(std::isfinite(r2.ratio));
  CHECK(r2.ratio < 1.0);

  // ratio stays bounded as the family approaches the degenerate amplitude
  double worst = 0;
  for (double a : {2.0, 1.5, 1.2, 1.05}) {
    auto ra = SpectralField::sample(g, [&](const std::array<double, 3>& x) {
      return a + std::cos(x[0]);
    });
    worst = std::max(worst, sobolev_certificate(ra, 2).ratio);
  }
  CHECK(worst < 1.0);

  CHECK_THROWS_AS(sobolev_certificate(-1.0 * one, 2), FloorViolationError);
}

// The two identity suites below gate the whole ledger algebra: the flow
// derivative of each functional must match its dissipation ledger (plus
// remainders) to quadrature accuracy.

namespace {

void check_energy_identity(const Grid& g, const ModelParams& p, unsigned seed,
                           double tol, int max_mode = 4) {
  State s = rich_state(g, p, seed, 0.7, 0.25, max_mode);
  DopingProfile dop = doping_uniform(g, integrate(s.rho));
  s.V = solve_poisson(s.rho, dop, p);

  const double dEdt = flow_derivative(
      s, p, dop, [&](const State& st) { return energy(st, p).total(); });
  EnergyReport e = energy(s, p);
  EntropyReport bd = bd_entropy(s, p, dop);
  // exact balance: dE/dt + D + eps int rho (rho - g) = 0
  const double defect = dEdt + e.dissipation_total() + bd.eps_rho_rho_minus_g;
  const double scale = std::abs(dEdt) + e.dissipation_total() + 1.0;
  INFO("seed ", seed, " defect ", defect, " scale ", scale);
  CHECK(std::abs(defect) <= tol * scale);
}

void check_bd_identity(const Grid& g, const ModelParams& p, unsigned seed,
                       double tol, int max_mode = 4) {
  State s = rich_state(g, p, seed, 0.7, 0.25, max_mode);
  DopingProfile dop = doping_uniform(g, integrate(s.rho));
  s.V = solve_poisson(s.rho, dop, p);

  const double dFdt = flow_derivative(
      s, p, dop, [&](const State& st) { return bd_entropy(st, p, dop).total(); });
  EntropyReport bd = bd_entropy(s, p, dop);
  const double defect = dFdt + bd.dissipation_total() - bd.remainders_total();
  const double scale = std::abs(dFdt) + bd.dissipation_total() + 1.0;
  INFO("seed ", seed, " defect ", defect, " scale ", scale);
  CHECK(std::abs(defect) <= tol * scale);
}

}  // namespace

TEST_CASE("energy identity closes against the assembled tendencies (1-D)") {
  const Grid g = Grid::uniform(1, 64);
  ModelParams p;
  p.gamma = 1.8;
  p.eps = 0.05;
  p.mu = 1e-3;
  p.eta = 1e-3;
  p.r0 = 0.02;
  p.r1 = 0.03;
  for (unsigned seed : {21u, 22u, 23u}) check_energy_identity(g, p, seed, 2e-6);
}

TEST_CASE("energy identity closes with the high-order term active (small N)") {
  const Grid g = Grid::uniform(1, 16);
  ModelParams p;
  p.gamma = 2.0;
  p.eps = 0.05;
  p.delta = 1e-10;
  p.eta = 1e-4;
  for (unsigned seed : {31u, 32u}) check_energy_identity(g, p, seed, 2e-6, 2);
}

TEST_CASE("energy identity closes in 2-D") {
  const Grid g = Grid::uniform(2, 32);
  ModelParams p;
  p.gamma = 2.0;
  p.eps = 0.04;
  p.mu = 1e-4;
  p.eta = 1e-4;
  p.r0 = 0.01;
  p.r1 = 0.01;
  for (unsigned seed : {41u, 42u}) check_energy_identity(g, p, seed, 2e-6, 3);
}

TEST_CASE("BD identity closes against the assembled tendencies (1-D)") {
  const Grid g = Grid::uniform(1, 64);
  ModelParams p;
  p.gamma = 1.8;
  p.eps = 0.05;
  p.mu = 1e-3;
  p.eta = 1e-3;
  p.r0 = 0.02;
  p.r1 = 0.03;
  for (unsigned seed : {51u, 52u, 53u}) check_bd_identity(g, p, seed, 2e-6);
}

TEST_CASE("BD identity closes with the high-order term active (small N)") {
  const Grid g = Grid::uniform(1, 16);
  ModelParams p;
  p.gamma = 2.0;
  p.eps = 0.05;
  p.delta = 1e-10;
  p.eta = 1e-4;
  for (unsigned seed : {61u, 62u}) check_bd_identity(g, p, seed, 2e-6, 2);
}

TEST_CASE("BD identity closes in 2-D") {
  const Grid g = Grid::uniform(2, 32);
  ModelParams p;
  p.gamma = 2.0;
  p.eps = 0.04;
  p.mu = 1e-4;
  p.eta = 1e-4;
  p.r0 = 0.01;
  p.r1 = 0.01;
  for (unsigned seed : {71u, 72u}) check_bd_identity(g, p, seed, 2e-6, 3);
}

TEST_CASE("the transpose coupling variant breaks the closed ledger") {
  // the (grad u)^T grad rho contraction does not satisfy the kinetic-energy
  // cancellation; the ledgers certify the default (grad rho . grad) u form
  const Grid g = Grid::uniform(2, 32);
  ModelParams p;
  p.eps = 0.04;
  p.eps_coupling_transpose = true;
  State s = rich_state(g, p, 81u, 0.7, 0.25, 3);
  DopingProfile dop = doping_uniform(g, integrate(s.rho));
  s.V = solve_poisson(s.rho, dop, p);
  const double dFdt = flow_derivative(
      s, p, dop, [&](const State& st) { return bd_entropy(st, p, dop).total(); });
  EntropyReport bd = bd_entropy(s, p, dop);
  const double defect = dFdt + bd.dissipation_total() - bd.remainders_total();
  CHECK(std::abs(defect) > 1e-6);
}

TEST_CASE("pointwise convexity: rho(log rho - 1) + 1 >= 0") {
  for (double v : {0.01, 0.3, 1.0, 2.5, 40.0})
    CHECK(v * (std::log(v) - 1) + 1 >= 0.0);
}

TEST_CASE("sobolev certificate rejects undersized exponents") {
  const Grid g = Grid::uniform(1, 32);
  CHECK_THROWS_AS(sobolev_certificate(SpectralField::constant(g, 1.0), 1),
                  ConfigError);
}

TEST_CASE("energy and BD identities close in 3-D") {
  const Grid g = Grid::uniform(3, 16);
  ModelParams p;
  p.gamma = 2.0;
  p.eps = 0.02;
  p.mu = 1e-5;
  p.eta = 1e-5;
  p.r0 = p.r1 = 0.01;
  // products of mode-1 fields stay inside the cutoff at N = 16
  check_energy_identity(g, p, 91u, 2e-6, 1);
  check_bd_identity(g, p, 92u, 2e-6, 1);
}
