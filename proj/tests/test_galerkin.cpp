#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <limits>

#include "qnsp/errors.hpp"
#include "qnsp/galerkin.hpp"
#include "qnsp/ledger.hpp"
#include "oracle_helpers.hpp"

using namespace qnsp;
using qnsp::testing::dense_quadrature_1d;

TEST_CASE("basis is L2-orthonormal and H1-orthogonal") {
  for (int d : {1, 2}) {
    const Grid g = Grid::uniform(d, d == 1 ? 64 : 16);
    GalerkinBasis b = GalerkinBasis::real_trigonometric(g, 9);
    for (int i = 0; i < b.size(); ++i)
      for (int j = 0; j < b.size(); ++j) {
        const double l2 = inner(b.mode(i), b.mode(j));
        CHECK(std::abs(l2 - (i == j ? 1.0 : 0.0)) <= 1e-12);
        const double h1 = integrate(dot(gradient(b.mode(i)), gradient(b.mode(j))));
        if (i != j) CHECK(std::abs(h1) <= 1e-12);
        if (i == j) CHECK(h1 == doctest::Approx(b.kappa_sq(i)).epsilon(1e-10));
      }
  }
}

TEST_CASE("basis ordering is by increasing |k|") {
  const Grid g = Grid::uniform(1, 64);
  GalerkinBasis b = GalerkinBasis::real_trigonometric(g, 11);
  for (int i = 1; i < b.size(); ++i) CHECK(b.kappa_sq(i) >= b.kappa_sq(i - 1));
  CHECK(b.kappa_sq(0) == 0.0);
}

TEST_CASE("projection recovers coordinates in the span") {
  const Grid g = Grid::uniform(1, 64);
  GalerkinBasis b = GalerkinBasis::real_trigonometric(g, 9);

  std::vector<double> c3 = project(b.mode(3), b);
  for (int i = 0; i < b.size(); ++i)
    CHECK(std::abs(c3[i] - (i == 3 ? 1.0 : 0.0)) <= 1e-12);

  // a mode far above the span projects to zero
  auto hi = SpectralField::sample(
      g, [](const std::array<double, 3>& x) { return std::cos(9 * x[0]); });
  for (double c : project(hi, b)) CHECK(std::abs(c) <= 1e-12);

  SpectralField f = 2.0 * b.mode(1) + 0.5 * b.mode(7);
  std::vector<double> cf = project(f, b);
  CHECK(cf[1] == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(cf[7] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(std::abs(cf[0]) <= 1e-12);
}

TEST_CASE("mass matrix: identity for unit density, scaling, quadrature oracle") {
  const Grid g = Grid::uniform(1, 64);
  GalerkinBasis b = GalerkinBasis::real_trigonometric(g, 3);

  DenseMatrix m1 = mass_matrix(SpectralField::constant(g, 1.0), b);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      CHECK(std::abs(m1.at(i, j) - (i == j ? 1.0 : 0.0)) <= 1e-12);

  DenseMatrix mc = mass_matrix(SpectralField::constant(g, 2.5), b);
  for (int i = 0; i < 3; ++i) CHECK(mc.at(i, i) == doctest::Approx(2.5));

  // rho = 1 + 0.5 cos x against a dense quadrature oracle at 4x resolution
  auto rho = SpectralField::sample(g, [](const std::array<double, 3>& x) {
    return 1.0 + 0.5 * std::cos(x[0]);
  });
  DenseMatrix m = mass_matrix(rho, b);
  const double vol = g.volume();
  auto e0 = [&](double) { return 1.0 / std::sqrt(vol); };
  auto e1 = [&](double x) { return std::sqrt(2.0 / vol) * std::cos(x); };
  auto e2 = [&](double x) { return std::sqrt(2.0 / vol) * std::sin(x); };
  auto q = [&](auto a, auto bfn) {
    return dense_quadrature_1d(
        [&](double x) { return (1.0 + 0.5 * std::cos(x)) * a(x) * bfn(x); });
  };
  CHECK(m.at(0, 0) == doctest::Approx(q(e0, e0)).epsilon(1e-12));
  CHECK(m.at(0, 1) == doctest::Approx(q(e0, e1)).epsilon(1e-10));
  CHECK(m.at(1, 1) == doctest::Approx(q(e1, e1)).epsilon(1e-12));
  CHECK(std::abs(m.at(0, 2) - q(e0, e2)) <= 1e-12);

  // wide vacuum region: the weighted pairing degenerates on a rich span
  GalerkinBasis wide = GalerkinBasis::real_trigonometric(g, 9);
  std::vector<double> spike(g.points(), 0.0);
  spike[0] = spike[1] = spike[2] = 1.0;
  auto rho_vac = SpectralField::from_values(g, std::move(spike));
  CHECK_THROWS_AS(cholesky(mass_matrix(rho_vac, wide)), IndefiniteMassError);
  // a single vacuum point keeps low-mode pairings definite
  auto rho_pt = SpectralField::sample(g, [](const std::array<double, 3>& x) {
    return 1.0 - std::cos(x[0]);
  });
  CHECK_NOTHROW(cholesky(mass_matrix(rho_pt, b)));
}

TEST_CASE("equilibrium is a fixed point of both steppers") {
  const Grid g = Grid::uniform(1, 64);
  ModelParams p;
  p.eps = 1e-3;
  p.eta = 1e-4;
  p.mu = 1e-6;
  p.r0 = p.r1 = 1e-3;
  SpectralField one = SpectralField::constant(g, 1.0);
  DopingProfile dop = doping_uniform(g, integrate(one));
  State s{0.0, one, VectorField::zeros(g), solve_poisson(one, dop, p)};

  StepScheme sch;
  sch.dt = 1e-3;
  State s1 = step(s, p, dop, sch);
  CHECK(linf_norm(s1.rho - one) <= 1e-12);
  CHECK(linf_norm(s1.mom[0]) <= 1e-12);

  GalerkinBasis b = GalerkinBasis::real_trigonometric(g, 9);
  State s2 = step(s, p, dop, sch, &b);
  CHECK(linf_norm(s2.rho - one) <= 1e-12);
  CHECK(linf_norm(s2.mom[0]) <= 1e-12);
}

TEST_CASE("pinned heat mode decays each mode by the exact exponential") {
  const Grid g = Grid::uniform(1, 64);
  ModelParams p;
  p.eps = 1.0;
  auto rho = SpectralField::sample(g, [](const std::array<double, 3>& x) {
    return 1.0 + 0.1 * std::cos(x[0]);
  });
  DopingProfile dop = doping_uniform(g, integrate(rho));
  StepScheme sch;
  sch.dt = 0.01;
  CollocationStepper stepper(g, p, dop, sch);
  stepper.pin_velocity(VectorField::zeros(g));
  State s{0.0, rho, VectorField::zeros(g), solve_poisson(rho, dop, p)};
  State s1 = stepper.step(s);
  const double expected = 0.1 * std::exp(-sch.dt);  // eigenvalue k^2 = 1
  CHECK(s1.rho.coef()[1].real() == doctest::Approx(expected / 2).epsilon(1e-12));
  // per-mode monotone decay across several steps
  State cur = s1;
  double prev = std::abs(cur.rho.coef()[1]);
  for (int n = 0; n < 5; ++n) {
    cur = stepper.step(cur);
    const double now = std::abs(cur.rho.coef()[1]);
    CHECK(now < prev);
    prev = now;
  }
}

TEST_CASE("one galerkin step agrees with a full-span collocation step") {
  const Grid g = Grid::uniform(1, 32);
  ModelParams p;
  p.eps = 1e-3;
  auto rho = SpectralField::sample(g, [](const std::array<double, 3>& x) {
    return 1.0 + 0.1 * std::cos(x[0]);
  });
  VectorField u = VectorField::zeros(g);
  u.comp[0] = SpectralField::sample(
      g, [](const std::array<double, 3>& x) { return 0.1 * std::sin(x[0]); });
  DopingProfile dop = doping_uniform(g, integrate(rho));
  VectorField mom;
  mom.comp.push_back(dealias(rho * u[0]));
  State s{0.0, rho, mom, solve_poisson(rho, dop, p)};

  StepScheme sch;
  sch.kind = SchemeKind::explicit_rk4_reference;
  sch.dt = 1e-3;
  State c = step(s, p, dop, sch);
  // basis spanning every retained mode (cutoff 10 -> 21 real modes)
  GalerkinBasis b = GalerkinBasis::real_trigonometric(g, 21);
  State gs = step(s, p, dop, sch, &b);
  const double scale = l2_norm(c.rho) + l2_norm(c.mom[0]);
  CHECK(l2_norm(c.rho - gs.rho) + l2_norm(c.mom[0] - gs.mom[0]) <= 1e-6 * scale);
}

TEST_CASE("imex and explicit reference agree at small dt") {
  const Grid g = Grid::uniform(1, 32);
  ModelParams p;
  p.eps = 1e-3;
  p.r0 = p.r1 = 1e-3;
  auto rho = SpectralField::sample(g, [](const std::array<double, 3>& x) {
    return 1.0 + 0.05 * std::cos(x[0]);
  });
  VectorField mom = VectorField::zeros(g);
  mom.comp[0] =
      dealias(rho * SpectralField::sample(g, [](const std::array<double, 3>& x) {
                return 0.05 * std::sin(x[0]);
              }));
  DopingProfile dop = doping_uniform(g, integrate(rho));
  State s{0.0, rho, mom, solve_poisson(rho, dop, p)};

  StepScheme imex;
  imex.dt = 1e-4;
  StepScheme ref;
  ref.kind = SchemeKind::explicit_rk4_reference;
  ref.dt = 1e-4;
  State a = step(s, p, dop, imex);
  State b = step(s, p, dop, ref);
  CHECK(l2_norm(a.rho - b.rho) + l2_norm(a.mom[0] - b.mom[0]) <= 1e-10);
}

TEST_CASE("run: T = 0 yields only the initial state") {
  RunConfig cfg = default_desk_config();
  cfg.T = 0.0;
  Trajectory traj = run(cfg);
  CHECK(traj.saves.size() == 1);
  CHECK(traj.steps.empty());
  CHECK(traj.completed);
}

TEST_CASE("run: equilibrium certificates stay flat") {
  RunConfig cfg = default_desk_config();
  cfg.initial.amplitude = 0.0;
  cfg.initial.velocity_amplitude = 0.0;
  cfg.T = 0.05;
  cfg.scheme.dt = 1e-3;
  Trajectory traj = run(cfg);
  REQUIRE(traj.completed);
  const double e0 = traj.saves.front().cert.energy.total();
  for (const auto& e : traj.saves) {
    CHECK(std::abs(e.cert.energy.total() - e0) <= 1e-10 * e0);
    CHECK(e.cert.energy.dissipation_total() <= 1e-12);
  }
}

TEST_CASE("run: mass conserved to round-off, V mean exactly zero") {
  RunConfig cfg = default_desk_config();
  cfg.T = 0.02;
  cfg.scheme.dt = 5e-4;
  cfg.save_every = 4;
  Trajectory traj = run(cfg);
  REQUIRE(traj.completed);
  const double m0 = traj.saves.front().cert.mass;
  for (const auto& e : traj.saves) {
    CHECK(std::abs(e.cert.mass - m0) <= 1e-10 * m0);
    CHECK(std::abs(e.cert.mean_V) <= 1e-12);
  }
}

TEST_CASE("run: galerkin mode trajectory conserves mass") {
  RunConfig cfg = default_desk_config();
  cfg.n = {32, 8, 8};
  cfg.mode = RunMode::galerkin;
  cfg.galerkin_modes = 9;
  cfg.T = 0.01;
  cfg.scheme.dt = 1e-3;
  cfg.params.mu = 0;  // keep the projected system explicit-friendly
  cfg.params.delta = 0;
  Trajectory traj = run(cfg);
  REQUIRE(traj.completed);
  const double m0 = traj.saves.front().cert.mass;
  for (const auto& e : traj.saves)
    CHECK(std::abs(e.cert.mass - m0) <= 1e-10 * m0);
}

TEST_CASE("run: blow-up terminates early with a partial trajectory") {
  RunConfig cfg = default_desk_config();
  cfg.n = {64, 8, 8};
  cfg.scheme.kind = SchemeKind::explicit_rk4_reference;
  cfg.scheme.dt = 0.05;  // far beyond the dispersive stability limit
  cfg.T = 1.0;
  Trajectory traj = run(cfg);
  CHECK_FALSE(traj.completed);
  CHECK_FALSE(traj.termination_cause.empty());
  CHECK(traj.saves.size() >= 1);
}

TEST_CASE("positivity envelope: resting states and pinned shear") {
  // u = 0 throughout: envelope reduces to the initial bounds
  RunConfig cfg = default_desk_config();
  cfg.initial.pin_velocity = true;
  cfg.initial.velocity_amplitude = 0.0;
  cfg.params.eps = 0.5;
  cfg.T = 0.2;
  cfg.scheme.dt = 1e-3;
  cfg.save_every = 20;
  Trajectory traj = run(cfg);
  REQUIRE(traj.completed);
  EnvelopeReport env = positivity_envelope_check(
      traj, traj.saves.front().cert.min_rho, traj.saves.front().cert.max_rho);
  CHECK(env.violations == 0);
  // heat flow pulls the density toward its mean: min is nondecreasing
  for (std::size_t i = 1; i < traj.saves.size(); ++i)
    CHECK(traj.saves[i].cert.min_rho >= traj.saves[i - 1].cert.min_rho - 1e-13);

  // pinned velocity with div u = sin x: envelope widens by exp(t)
  const Grid g = cfg.grid();
  ModelParams p = cfg.effective_params();
  auto rho0 = SpectralField::sample(g, [](const std::array<double, 3>& x) {
    return 1.0 + 0.05 * std::cos(x[0]);
  });
  DopingProfile dop = doping_uniform(g, integrate(rho0));
  VectorField upin = VectorField::zeros(g);
  upin.comp[0] = SpectralField::sample(
      g, [](const std::array<double, 3>& x) { return -std::cos(x[0]); });
  StepScheme sch;
  sch.dt = 1e-3;
  CollocationStepper stepper(g, p, dop, sch);
  stepper.pin_velocity(upin);
  State s{0.0, rho0, VectorField::zeros(g), solve_poisson(rho0, dop, p)};
  Trajectory manual;
  manual.params = p;
  manual.scheme = sch;
  manual.doping = dop;
  double divu_int = 0;
  manual.saves.push_back({s, make_certificate(s, p, dop, divu_int)});
  for (int n = 0; n < 100; ++n) {
    divu_int += sch.dt * 1.0;  // ||div u||_inf = 1
    s = stepper.step(s);
    if ((n + 1) % 20 == 0)
      manual.saves.push_back({s, make_certificate(s, p, dop, divu_int)});
  }
  EnvelopeReport env2 =
      positivity_envelope_check(manual, min_value(rho0), max_value(rho0));
  CHECK(env2.violations == 0);
  CHECK(env2.entries.back().lower ==
        doctest::Approx(min_value(rho0) * std::exp(-0.1)).epsilon(1e-9));
  CHECK(env2.entries.back().upper ==
        doctest::Approx(max_value(rho0) * std::exp(0.1)).epsilon(1e-9));
}

TEST_CASE("trajectory records dt and the div-u history") {
  RunConfig cfg = default_desk_config();
  cfg.T = 0.01;
  cfg.scheme.dt = 1e-3;
  Trajectory traj = run(cfg);
  REQUIRE(traj.completed);
  CHECK(traj.steps.size() == 10);
  for (const auto& st : traj.steps) {
    CHECK(st.dt == doctest::Approx(1e-3));
    CHECK(st.div_u_inf >= 0.0);
  }
  for (std::size_t i = 1; i < traj.saves.size(); ++i)
    CHECK(traj.saves[i].cert.t > traj.saves[i - 1].cert.t);
}

TEST_CASE("adaptive dt control clamps an oversized step and lands on T") {
  RunConfig cfg = default_desk_config();
  cfg.n = {64, 8, 8};
  cfg.T = 0.05;
  cfg.scheme.dt = 0.05;  // far too large for the explicit remainder
  cfg.scheme.adaptive = true;
  Trajectory traj = run(cfg);
  REQUIRE(traj.completed);
  CHECK(traj.final().t == doctest::Approx(cfg.T).epsilon(1e-10));
  // the controller chose something below the requested step
  double dtmax = 0;
  for (const auto& s : traj.steps) dtmax = std::max(dtmax, s.dt);
  CHECK(dtmax < 0.05);
  const double m0 = traj.saves.front().cert.mass;
  for (const auto& e : traj.saves)
    CHECK(std::abs(e.cert.mass - m0) <= 1e-10 * m0);

  cfg.mode = RunMode::galerkin;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("vacuum-touching diagnostics: steps cleanly, flags the BD block") {
  RunConfig cfg;
  cfg.dim = 1;
  cfg.n = {64, 8, 8};
  cfg.params.eta = 0;
  cfg.params.delta = 0;
  cfg.params.mu = 0;
  cfg.params.eps = 0;
  cfg.params.r0 = cfg.params.r1 = 1e-2;
  cfg.params.bohm_form = BohmForm::sqrt_split;
  cfg.initial.preset = "vacuum-touching";
  cfg.initial.amplitude = 1.0;  // rho = (1 - cos x)/2, min exactly 0
  cfg.initial.velocity_amplitude = 0.05;
  cfg.T = 0.01;
  cfg.scheme.dt = 1e-4;
  cfg.save_every = 10;
  Trajectory traj = run(cfg);
  // exact vacuum under the quantum force rings at the density kink; the
  // guard eventually converts that into a clean partial trajectory
  CHECK(traj.steps.size() >= 20);
  if (!traj.completed)
    CHECK(traj.termination_cause.find("positivity guard") != std::string::npos);
  CHECK(traj.saves.front().cert.min_rho == 0.0);
  // the BD block is flagged invalid on vacuum, the energy block still reports
  for (const auto& e : traj.saves) {
    CHECK_FALSE(e.cert.entropy_valid);
    CHECK(e.cert.energy.kinetic >= 0.0);
  }
  // momentum vanished on the vacuum point at load
  const auto& m0 = traj.initial().mom[0].values();
  CHECK(std::abs(m0[0]) <= 1e-15);
  // other quantum-force forms are rejected up front
  cfg.params.bohm_form = BohmForm::divergence_log_rho;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("2-D run: conservation and both monitors stay clean") {
  RunConfig cfg;
  cfg.dim = 2;
  cfg.n = {24, 24, 8};
  cfg.params.eps = 1e-3;
  cfg.params.mu = 1e-6;
  cfg.params.eta = 1e-5;
  cfg.params.delta = 1e-14;
  cfg.params.r0 = cfg.params.r1 = 1e-3;
  cfg.initial.amplitude = 0.03;
  cfg.initial.velocity_amplitude = 0.03;
  cfg.T = 0.05;
  cfg.scheme.dt = 2.5e-4;
  cfg.save_every = 1;
  Trajectory traj = run(cfg);
  REQUIRE(traj.completed);
  const double m0 = traj.saves.front().cert.mass;
  for (const auto& e : traj.saves) {
    CHECK(std::abs(e.cert.mass - m0) <= 1e-10 * m0);
    CHECK(std::abs(e.cert.mean_V) <= 1e-12);
  }
  MonitorReport em = energy_monitor(traj);
  MonitorReport bm = bd_monitor(traj);
  CHECK(em.violations == 0);
  CHECK(bm.violations == 0);
  EnvelopeReport env = positivity_envelope_check(
      traj, traj.saves.front().cert.min_rho, traj.saves.front().cert.max_rho);
  CHECK(env.violations == 0);
}
