#include "qnsp/galerkin.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "qnsp/detail/smallmat.hpp"
#include "qnsp/errors.hpp"

namespace qnsp {

// ---------------------------------------------------------------------------
// Galerkin basis
// ---------------------------------------------------------------------------

GalerkinBasis GalerkinBasis::real_trigonometric(const Grid& g, int size) {
  GalerkinBasis b(g);
  if (size < 1) throw ConfigError("basis size must be >= 1");

  struct KVec {
    std::array<int, 3> k;
    double kap_sq;
  };
  std::vector<KVec> half;
  int kmax = 1;
  int limit = g.n(0) / 2 - 1;
  for (int a = 1; a < g.dim(); ++a) limit = std::min(limit, g.n(a) / 2 - 1);
  auto collect = [&](int K) {
    half.clear();
    std::array<int, 3> k = {0, 0, 0};
    const int k1max = g.dim() > 1 ? K : 0;
    const int k2max = g.dim() > 2 ? K : 0;
    for (k[0] = -K; k[0] <= K; ++k[0])
      for (k[1] = -k1max; k[1] <= k1max; ++k[1])
        for (k[2] = -k2max; k[2] <= k2max; ++k[2]) {
          // half-space: first nonzero component positive; k = 0 handled apart
          int first = 0;
          for (int a = 0; a < g.dim(); ++a)
            if (k[a] != 0) {
              first = k[a];
              break;
            }
          if (first <= 0) continue;
          double ks = 0;
          for (int a = 0; a < g.dim(); ++a) {
            const double kap = 2 * std::numbers::pi * k[a] / g.length(a);
            ks += kap * kap;
          }
          half.push_back({k, ks});
        }
    std::stable_sort(half.begin(), half.end(),
                     [](const KVec& x, const KVec& y) { return x.kap_sq < y.kap_sq; });
  };
  collect(kmax);
  while (1 + 2 * static_cast<int>(half.size()) < size && kmax < limit)
    collect(++kmax);
  if (1 + 2 * static_cast<int>(half.size()) < size)
    throw ConfigError("requested basis size exceeds what the grid resolves");

  const double vol = g.volume();
  b.modes_.push_back(SpectralField::constant(g, 1.0 / std::sqrt(vol)));
  b.kappa_sq_.push_back(0.0);
  const double amp = std::sqrt(2.0 / vol);
  for (const auto& kv : half) {
    if (b.size() >= size) break;
    auto phase = [&](const std::array<double, 3>& x) {
      double ph = 0;
      for (int a = 0; a < g.dim(); ++a)
        ph += 2 * std::numbers::pi * kv.k[a] * x[a] / g.length(a);
      return ph;
    };
    b.modes_.push_back(SpectralField::sample(
        g, [&](const std::array<double, 3>& x) { return amp * std::cos(phase(x)); }));
    b.kappa_sq_.push_back(kv.kap_sq);
    if (b.size() >= size) break;
    b.modes_.push_back(SpectralField::sample(
        g, [&](const std::array<double, 3>& x) { return amp * std::sin(phase(x)); }));
    b.kappa_sq_.push_back(kv.kap_sq);
  }
  return b;
}

std::vector<double> project(const SpectralField& f, const GalerkinBasis& b) {
  if (f.grid() != b.grid()) throw Error("projection grid mismatch");
  std::vector<double> out(b.size());
  for (int i = 0; i < b.size(); ++i) out[i] = inner(f, b.mode(i));
  return out;
}

DenseMatrix mass_matrix(const SpectralField& rho, const GalerkinBasis& b) {
  if (min_value(rho) < 0)
    throw IndefiniteMassError("mass matrix needs a nonnegative density");
  DenseMatrix m;
  m.n = b.size();
  m.a.assign(static_cast<std::size_t>(m.n) * m.n, 0.0);
  const auto& rv = rho.values();
  const double cv = rho.grid().cell_volume();
  for (int i = 0; i < m.n; ++i) {
    const auto& ei = b.mode(i).values();
    for (int j = i; j < m.n; ++j) {
      const auto& ej = b.mode(j).values();
      double s = 0;
      for (std::size_t x = 0; x < rv.size(); ++x) s += rv[x] * ei[x] * ej[x];
      m.at(i, j) = m.at(j, i) = s * cv;
    }
  }
  return m;
}

DenseMatrix cholesky(const DenseMatrix& m) {
  DenseMatrix l;
  l.n = m.n;
  l.a.assign(m.a.size(), 0.0);
  double diag_scale = 0;
  for (int i = 0; i < m.n; ++i) diag_scale = std::max(diag_scale, m.at(i, i));
  const double tiny = 1e-12 * std::max(1.0, diag_scale);
  for (int i = 0; i < m.n; ++i) {
    for (int j = 0; j <= i; ++j) {
      double s = m.at(i, j);
      for (int k = 0; k < j; ++k) s -= l.at(i, k) * l.at(j, k);
      if (i == j) {
        if (s <= tiny)
          throw IndefiniteMassError(
              "mass matrix is not positive definite (density touching vacuum?); "
              "use collocation mode for vacuum states");
        l.at(i, i) = std::sqrt(s);
      } else {
        l.at(i, j) = s / l.at(j, j);
      }
    }
  }
  return l;
}

std::vector<double> cholesky_solve(const DenseMatrix& chol, std::vector<double> rhs) {
  const int n = chol.n;
  for (int i = 0; i < n; ++i) {
    double s = rhs[i];
    for (int k = 0; k < i; ++k) s -= chol.at(i, k) * rhs[k];
    rhs[i] = s / chol.at(i, i);
  }
  for (int i = n - 1; i >= 0; --i) {
    double s = rhs[i];
    for (int k = i + 1; k < n; ++k) s -= chol.at(k, i) * rhs[k];
    rhs[i] = s / chol.at(i, i);
  }
  return rhs;
}

// ---------------------------------------------------------------------------
// Collocation stepper
// ---------------------------------------------------------------------------

namespace {

using Cplx = std::complex<double>;

struct SpecVec {
  std::vector<Cplx> rho;
  std::array<std::vector<Cplx>, 3> m;
  int d = 0;

  static SpecVec zeros(std::size_t nc, int d) {
    SpecVec v;
    v.d = d;
    v.rho.assign(nc, Cplx(0));
    for (int a = 0; a < d; ++a) v.m[a].assign(nc, Cplx(0));
    return v;
  }
};

void axpy(SpecVec& y, double a, const SpecVec& x) {
  for (std::size_t i = 0; i < y.rho.size(); ++i) y.rho[i] += a * x.rho[i];
  for (int c = 0; c < y.d; ++c)
    for (std::size_t i = 0; i < y.m[c].size(); ++i) y.m[c][i] += a * x.m[c][i];
}

}  // namespace

struct CollocationStepper::Impl {
  Grid grid;
  ModelParams params;
  DopingProfile doping;
  StepScheme scheme;
  const Forcing* forcing;
  std::optional<VectorField> pinned_u;

  std::size_t nc;
  int d, nv;
  // per-mode wavenumbers
  std::array<std::vector<double>, 3> kap;
  std::vector<double> kap_sq;
  // modes below the dealiasing cutoff; everything above is held inert so the
  // split stays exact where the assembled tendencies are identically zero
  std::vector<char> live;
  // per-mode frozen-coefficient exponentials exp(L dt/2), exp(L dt)
  std::vector<detail::CMat4> Ehalf, Efull;
  std::vector<Cplx> heat_half, heat_full;  // pinned mode: exp(-eps k^2 dt)
  double built_dt = -1, built_rho_bar = -1;

  Impl(const Grid& g, const ModelParams& p, DopingProfile dop, StepScheme sch,
       const Forcing* f)
      : grid(g), params(p), doping(std::move(dop)), scheme(sch), forcing(f) {
    nc = fft::coef_size(g);
    d = g.dim();
    nv = 1 + d;
    for (int a = 0; a < 3; ++a) kap[a].assign(nc, 0.0);
    kap_sq.assign(nc, 0.0);
    live.assign(nc, 1);
    detail::for_each_mode(g, [&](std::size_t i, const std::array<int, 3>& k,
                                 const std::array<double, 3>& kp) {
      double ks = 0;
      for (int a = 0; a < d; ++a) {
        kap[a][i] = kp[a];
        ks += kp[a] * kp[a];
        if (std::abs(k[a]) > g.dealias_cutoff(a)) live[i] = 0;
      }
      kap_sq[i] = ks;
    });
  }

  detail::CMat4 linear_block(std::size_t i, double rho_bar) const {
    detail::CMat4 L;
    L.n = nv;
    if (!live[i]) return L;  // zero block: exp = identity
    const double ks = kap_sq[i];
    const Cplx I(0.0, 1.0);
    L.at(0, 0) = -params.eps * ks;
    for (int a = 0; a < d; ++a) L.at(0, 1 + a) = -I * kap[a][i];
    // frozen pressure + Poisson + capillarity + high-order symbols
    double P = params.gamma * std::pow(rho_bar, params.gamma - 1.0) + ks +
               params.delta * rho_bar * std::pow(ks, 9);
    if (ks > 0) P += rho_bar / ks;
    const double diag =
        0.5 * ks + params.mu * ks * ks / rho_bar + 1.0 + params.r0 / rho_bar;
    for (int a = 0; a < d; ++a) {
      L.at(1 + a, 0) = -I * kap[a][i] * P;
      for (int b = 0; b < d; ++b)
        L.at(1 + a, 1 + b) =
            (a == b ? -diag : 0.0) - 0.5 * kap[a][i] * kap[b][i];
    }
    return L;
  }

  void build_exponentials(double rho_bar, double dt) {
    if (built_dt == dt && built_rho_bar == rho_bar) return;
    if (pinned_u) {
      heat_half.resize(nc);
      heat_full.resize(nc);
      for (std::size_t i = 0; i < nc; ++i) {
        heat_half[i] = std::exp(-params.eps * kap_sq[i] * dt / 2);
        heat_full[i] = heat_half[i] * heat_half[i];
      }
    } else {
      Ehalf.resize(nc);
      Efull.resize(nc);
      for (std::size_t i = 0; i < nc; ++i) {
        detail::CMat4 L = linear_block(i, rho_bar);
        Ehalf[i] = detail::expm((dt / 2) * L);
        Efull[i] = Ehalf[i] * Ehalf[i];
      }
    }
    built_dt = dt;
    built_rho_bar = rho_bar;
  }

  SpecVec pack(const State& s) const {
    SpecVec v;
    v.d = d;
    v.rho = s.rho.coef();
    for (int a = 0; a < d; ++a) v.m[a] = s.mom[a].coef();
    return v;
  }

  State unpack(const SpecVec& v, double t) const {
    SpectralField rho = SpectralField::from_coefficients(grid, v.rho);
    VectorField mom;
    for (int a = 0; a < d; ++a)
      mom.comp.push_back(SpectralField::from_coefficients(grid, v.m[a]));
    SpectralField V = solve_poisson(rho, doping, params);
    return State{t, rho, std::move(mom), std::move(V)};
  }

  void apply_exp(const std::vector<detail::CMat4>& E, const SpecVec& in,
                 SpecVec& out) const {
    std::array<Cplx, 4> u, w;
    for (std::size_t i = 0; i < nc; ++i) {
      u[0] = in.rho[i];
      for (int a = 0; a < d; ++a) u[1 + a] = in.m[a][i];
      const detail::CMat4& M = E[i];
      for (int r = 0; r < nv; ++r) {
        Cplx s = 0;
        for (int c = 0; c < nv; ++c) s += M.at(r, c) * u[c];
        w[r] = s;
      }
      out.rho[i] = w[0];
      for (int a = 0; a < d; ++a) out.m[a][i] = w[1 + a];
    }
  }

  SpecVec apply_exp(const std::vector<detail::CMat4>& E, const SpecVec& in) const {
    SpecVec out = SpecVec::zeros(nc, d);
    apply_exp(E, in, out);
    return out;
  }

  /// Nonlinear remainder N(U, t) = full tendency minus the frozen linear block.
  SpecVec nonlinear(const SpecVec& U, double t, double rho_bar) const {
    SpecVec N = SpecVec::zeros(nc, d);
    State st = unpack(U, t);
    VectorField rhs = assemble_momentum_rhs(st, params);
    if (forcing && forcing->mom) rhs = rhs + forcing->mom(t);
    std::array<const std::vector<Cplx>*, 3> rh;
    for (int a = 0; a < d; ++a) rh[a] = &rhs[a].coef();
    const Cplx I(0.0, 1.0);
    for (std::size_t i = 0; i < nc; ++i) {
      if (!live[i]) continue;  // inert above the cutoff
      const double ks = kap_sq[i];
      double P = params.gamma * std::pow(rho_bar, params.gamma - 1.0) + ks +
                 params.delta * rho_bar * std::pow(ks, 9);
      if (ks > 0) P += rho_bar / ks;
      const double diag =
          0.5 * ks + params.mu * ks * ks / rho_bar + 1.0 + params.r0 / rho_bar;
      Cplx kdotm = 0;
      for (int b = 0; b < d; ++b) kdotm += kap[b][i] * U.m[b][i];
      for (int a = 0; a < d; ++a) {
        Cplx lin = -I * kap[a][i] * P * U.rho[i] - diag * U.m[a][i] -
                   0.5 * kap[a][i] * kdotm;
        N.m[a][i] = (*rh[a])[i] - lin;
      }
      // continuity is fully contained in the linear block
      N.rho[i] = 0.0;
    }
    if (forcing && forcing->rho) {
      const auto fr = forcing->rho(t).coef();
      for (std::size_t i = 0; i < nc; ++i)
        if (live[i]) N.rho[i] += fr[i];
    }
    return N;
  }

  /// Pinned-velocity tendency: transport by the pinned field plus forcing;
  /// the eps-heat symbol lives in the scalar exponential.
  std::vector<Cplx> pinned_nonlinear(const std::vector<Cplx>& rho_hat,
                                     double t) const {
    SpectralField rho = SpectralField::from_coefficients(grid, rho_hat);
    VectorField flux;
    for (int a = 0; a < d; ++a)
      flux.comp.push_back(dealias(rho * (*pinned_u)[a]));
    SpectralField rhs = dealias(-1.0 * divergence(flux));
    std::vector<Cplx> out = rhs.coef();
    if (forcing && forcing->rho) {
      const auto fr = forcing->rho(t).coef();
      for (std::size_t i = 0; i < nc; ++i) out[i] += fr[i];
    }
    return out;
  }

  State step_pinned(const State& s) {
    const double h = scheme.dt;
    build_exponentials(1.0, h);
    const auto& EH = heat_half;
    const auto& E1 = heat_full;
    std::vector<Cplx> U = s.rho.coef();
    auto mulv = [&](const std::vector<Cplx>& E, std::vector<Cplx> v) {
      for (std::size_t i = 0; i < nc; ++i) v[i] *= E[i];
      return v;
    };
    auto addscaled = [&](std::vector<Cplx> a, double c, const std::vector<Cplx>& b) {
      for (std::size_t i = 0; i < nc; ++i) a[i] += c * b[i];
      return a;
    };
    const double t = s.t;
    // Lawson / Kutta third order (matches the coupled path)
    auto F1 = pinned_nonlinear(U, t);
    auto U2 = mulv(EH, addscaled(U, h / 2, F1));
    auto F2 = pinned_nonlinear(U2, t + h / 2);
    auto E1U = mulv(E1, U);
    auto E1F1 = mulv(E1, F1);
    auto EHF2 = mulv(EH, F2);
    auto U3 = addscaled(addscaled(E1U, -h, E1F1), 2 * h, EHF2);
    auto F3 = pinned_nonlinear(U3, t + h);
    auto Un = addscaled(addscaled(addscaled(E1U, h / 6, E1F1), 2 * h / 3, EHF2),
                        h / 6, F3);
    SpectralField rho = SpectralField::from_coefficients(grid, std::move(Un));
    VectorField mom;
    for (int a = 0; a < d; ++a) mom.comp.push_back(dealias(rho * (*pinned_u)[a]));
    SpectralField V = solve_poisson(rho, doping, params);
    return State{t + h, std::move(rho), std::move(mom), std::move(V)};
  }

  /// Full tendency in spectral variables (reference explicit path).
  SpecVec full_tendency(const SpecVec& U, double t) const {
    State st = unpack(U, t);
    VectorField rhs = assemble_momentum_rhs(st, params);
    if (forcing && forcing->mom) rhs = rhs + forcing->mom(t);
    SpectralField cont = continuity_rhs(st, params);
    if (forcing && forcing->rho) cont = cont + forcing->rho(t);
    SpecVec G;
    G.d = d;
    G.rho = cont.coef();
    for (int a = 0; a < d; ++a) G.m[a] = rhs[a].coef();
    return G;
  }

  /// Largest stable step for the explicit remainder: advective CFL plus the
  /// deviation parts of the capillarity/viscosity symbols at the cutoff.
  double stable_dt_estimate(const State& s) const {
    double dx = grid.dx(0), kc = 0;
    for (int a = 0; a < d; ++a) {
      dx = std::min(dx, grid.dx(a));
      kc = std::max(kc, 2 * std::numbers::pi * grid.dealias_cutoff(a) /
                            grid.length(a));
    }
    const VectorField u = velocity_from_momentum(s.rho, s.mom, params);
    const double umax = linf_norm(u);
    const double rho_bar = mean(s.rho);
    const double dev = linf_norm(s.rho + (-rho_bar)) /
                       std::max(min_value(s.rho), params.rho_floor);
    const double lambda =
        dev * (kc * kc * kc + 0.5 * kc * kc) + umax * kc + 1e-12;
    const double advective = dx / std::max(umax, 1e-12);
    return scheme.safety * std::min(advective, 2.5 / lambda);
  }

  State step(const State& s) {
    if (pinned_u) return step_pinned(s);
    const double h = scheme.dt;
    const double t = s.t;
    SpecVec U = pack(s);

    if (scheme.kind == SchemeKind::explicit_rk4_reference) {
      SpecVec K1 = full_tendency(U, t);
      SpecVec U2 = U;
      axpy(U2, h / 2, K1);
      SpecVec K2 = full_tendency(U2, t + h / 2);
      SpecVec U3 = U;
      axpy(U3, h / 2, K2);
      SpecVec K3 = full_tendency(U3, t + h / 2);
      SpecVec U4 = U;
      axpy(U4, h, K3);
      SpecVec K4 = full_tendency(U4, t + h);
      axpy(U, h / 6, K1);
      axpy(U, h / 3, K2);
      axpy(U, h / 3, K3);
      axpy(U, h / 6, K4);
      return unpack(U, t + h);
    }

    const double rho_bar = mean(s.rho);
    build_exponentials(rho_bar, h);

    if (scheme.rk_order == 2) {
      SpecVec F1 = nonlinear(U, t, rho_bar);
      SpecVec A = U;
      axpy(A, h, F1);
      SpecVec U2 = apply_exp(Efull, A);
      SpecVec F2 = nonlinear(U2, t + h, rho_bar);
      SpecVec E1U = apply_exp(Efull, U);
      SpecVec E1F1 = apply_exp(Efull, F1);
      axpy(E1U, h / 2, E1F1);
      axpy(E1U, h / 2, F2);
      return unpack(E1U, t + h);
    }
    if (scheme.rk_order == 4) {
      SpecVec F1 = nonlinear(U, t, rho_bar);
      SpecVec A = U;
      axpy(A, h / 2, F1);
      SpecVec U2 = apply_exp(Ehalf, A);
      SpecVec F2 = nonlinear(U2, t + h / 2, rho_bar);
      SpecVec EHU = apply_exp(Ehalf, U);
      SpecVec EHF2 = apply_exp(Ehalf, F2);
      SpecVec U3 = EHU;
      axpy(U3, h / 2, F2);
      SpecVec F3 = nonlinear(U3, t + h / 2, rho_bar);
      SpecVec EHF3 = apply_exp(Ehalf, F3);
      SpecVec E1U = apply_exp(Efull, U);
      SpecVec U4 = E1U;
      axpy(U4, h, EHF3);
      SpecVec F4 = nonlinear(U4, t + h, rho_bar);
      SpecVec E1F1 = apply_exp(Efull, F1);
      SpecVec out = E1U;
      axpy(out, h / 6, E1F1);
      axpy(out, h / 3, EHF2);
      axpy(out, h / 3, EHF3);
      axpy(out, h / 6, F4);
      return unpack(out, t + h);
    }
    // third order (Kutta) by default
    SpecVec F1 = nonlinear(U, t, rho_bar);
    SpecVec A = U;
    axpy(A, h / 2, F1);
    SpecVec U2 = apply_exp(Ehalf, A);
    SpecVec F2 = nonlinear(U2, t + h / 2, rho_bar);
    SpecVec E1U = apply_exp(Efull, U);
    SpecVec E1F1 = apply_exp(Efull, F1);
    SpecVec EHF2 = apply_exp(Ehalf, F2);
    SpecVec U3 = E1U;
    axpy(U3, -h, E1F1);
    axpy(U3, 2 * h, EHF2);
    SpecVec F3 = nonlinear(U3, t + h, rho_bar);
    SpecVec out = E1U;
    axpy(out, h / 6, E1F1);
    axpy(out, 2 * h / 3, EHF2);
    axpy(out, h / 6, F3);
    return unpack(out, t + h);
  }
};

CollocationStepper::CollocationStepper(const Grid& g, const ModelParams& p,
                                       DopingProfile dop, StepScheme scheme,
                                       const Forcing* forcing)
    : impl_(std::make_unique<Impl>(g, p, std::move(dop), scheme, forcing)) {}

CollocationStepper::~CollocationStepper() = default;

void CollocationStepper::pin_velocity(const VectorField& u) {
  impl_->pinned_u = u;
  impl_->built_dt = -1;
}

State CollocationStepper::step(const State& s) { return impl_->step(s); }

void CollocationStepper::set_dt(double dt) {
  if (!(dt > 0)) throw ConfigError("dt must be positive");
  impl_->scheme.dt = dt;
}

double CollocationStepper::dt() const { return impl_->scheme.dt; }

double CollocationStepper::stable_dt_estimate(const State& s) const {
  return impl_->stable_dt_estimate(s);
}

// ---------------------------------------------------------------------------
// Mass-matrix Galerkin stepper
// ---------------------------------------------------------------------------

GalerkinStepper::GalerkinStepper(const GalerkinBasis& basis, const ModelParams& p,
                                 DopingProfile dop, StepScheme scheme)
    : basis_(basis), params_(p), doping_(std::move(dop)), scheme_(scheme) {}

namespace {

struct GalState {
  SpectralField rho;
  std::vector<std::vector<double>> P;  // per component, projected momentum
};

struct GalTendency {
  SpectralField rho_dot;
  std::vector<std::vector<double>> P_dot;
};

}  // namespace

State GalerkinStepper::step(const State& s) {
  const Grid& g = basis_.grid();
  const int d = g.dim();
  const int nb = basis_.size();
  const double h = scheme_.dt;

  auto reconstruct_u = [&](const SpectralField& rho,
                           const std::vector<std::vector<double>>& P) {
    DenseMatrix chol = cholesky(mass_matrix(rho, basis_));
    VectorField u;
    for (int a = 0; a < d; ++a) {
      std::vector<double> lam = cholesky_solve(chol, P[a]);
      std::vector<double> acc(g.points(), 0.0);
      for (int i = 0; i < nb; ++i) {
        const auto& ev = basis_.mode(i).values();
        for (std::size_t x = 0; x < acc.size(); ++x) acc[x] += lam[i] * ev[x];
      }
      u.comp.push_back(SpectralField::from_values(g, std::move(acc)));
    }
    return u;
  };

  auto tendency = [&](const GalState& gs, double t) {
    VectorField u = reconstruct_u(gs.rho, gs.P);
    VectorField mom;
    for (int a = 0; a < d; ++a) mom.comp.push_back(dealias(gs.rho * u[a]));
    SpectralField V = solve_poisson(gs.rho, doping_, params_);
    State st{t, gs.rho, mom, V};
    VectorField rhs = assemble_momentum_rhs(st, u, params_);
    GalTendency td{continuity_rhs(st, params_), {}};
    for (int a = 0; a < d; ++a) td.P_dot.push_back(project(rhs[a], basis_));
    return td;
  };

  auto advance = [&](const GalState& gs, double c, const GalTendency& td) {
    GalState out{gs.rho + c * td.rho_dot, gs.P};
    for (int a = 0; a < d; ++a)
      for (int i = 0; i < nb; ++i) out.P[a][i] += c * td.P_dot[a][i];
    return out;
  };

  GalState g0{s.rho, {}};
  for (int a = 0; a < d; ++a) g0.P.push_back(project(s.mom[a], basis_));

  GalTendency k1 = tendency(g0, s.t);
  GalTendency k2 = tendency(advance(g0, h / 2, k1), s.t + h / 2);
  GalTendency k3 = tendency(advance(g0, h / 2, k2), s.t + h / 2);
  GalTendency k4 = tendency(advance(g0, h, k3), s.t + h);

  GalState out = g0;
  out = advance(out, h / 6, k1);
  out = advance(out, h / 3, k2);
  out = advance(out, h / 3, k3);
  out = advance(out, h / 6, k4);

  VectorField u = reconstruct_u(out.rho, out.P);
  VectorField mom;
  for (int a = 0; a < d; ++a) mom.comp.push_back(dealias(out.rho * u[a]));
  SpectralField V = solve_poisson(out.rho, doping_, params_);
  return State{s.t + h, std::move(out.rho), std::move(mom), std::move(V)};
}

State step(const State& s, const ModelParams& p, const DopingProfile& dop,
           const StepScheme& scheme, const GalerkinBasis* basis) {
  if (basis) {
    if (min_value(s.rho) <= 0)
      throw IndefiniteMassError("galerkin mode requires min rho > 0");
    GalerkinStepper st(*basis, p, dop, scheme);
    return st.step(s);
  }
  CollocationStepper st(s.rho.grid(), p, dop, scheme);
  return st.step(s);
}

// ---------------------------------------------------------------------------
// Run driver
// ---------------------------------------------------------------------------

Trajectory run(const RunConfig& config, const Forcing* forcing) {
  config.validate();
  const Grid g = config.grid();
  const ModelParams p = config.effective_params();

  SpectralField rho0 = config.initial_density();
  const double mass = integrate(rho0);
  double shift = 0;
  DopingProfile dop = config.doping_profile(mass, &shift);

  State state = config.initial_state(dop);

  Trajectory traj;
  traj.params = p;
  traj.scheme = config.scheme;
  traj.doping = dop;
  traj.doping_shift = shift;

  double divu_integral = 0;
  auto divu_now = [&](const State& s) {
    if (config.initial.pin_velocity) return 0.0;
    return linf_norm(divergence(velocity_from_momentum(s.rho, s.mom, p)));
  };

  traj.saves.push_back({state, make_certificate(state, p, dop, 0.0)});
  if (config.T <= 0) return traj;

  const long nsteps = std::max<long>(1, std::lround(config.T / config.scheme.dt));
  StepScheme scheme = config.scheme;
  scheme.dt = config.T / static_cast<double>(nsteps);

  CollocationStepper cstep(g, p, dop, scheme, forcing);
  std::optional<GalerkinStepper> gstep;
  std::optional<GalerkinBasis> basis;
  if (config.mode == RunMode::galerkin) {
    basis = GalerkinBasis::real_trigonometric(g, config.galerkin_modes);
    gstep.emplace(*basis, p, dop, scheme);
  }
  if (config.initial.pin_velocity) cstep.pin_velocity(VectorField::zeros(g));

  // runs that start strictly positive guard the floor; vacuum diagnostics
  // runs guard against growth of negative spectral ringing instead
  const double min0 = min_value(state.rho);
  const double guard_level =
      min0 >= p.rho_floor ? p.rho_floor / 2 : -0.01 * max_value(state.rho);

  long n = 0;
  bool done = false;
  while (!done) {
    if (scheme.adaptive && !gstep) {
      if (n % 16 == 0)
        cstep.set_dt(std::min(config.scheme.dt, cstep.stable_dt_estimate(state)));
      if (state.t + cstep.dt() >= config.T - 1e-12 * config.T)
        cstep.set_dt(config.T - state.t);
    }
    const double dt_now = gstep ? scheme.dt : cstep.dt();
    const double divu = divu_now(state);
    traj.steps.push_back({state.t, dt_now, divu});
    divu_integral += dt_now * divu;
    try {
      State next = gstep ? gstep->step(state) : cstep.step(state);
      if (!all_finite(next.rho) || !all_finite(next.mom))
        throw BlowUpError("non-finite state after step");
      if (min_value(next.rho) < guard_level)
        throw GuardError("positivity guard tripped: min rho fell below " +
                         std::to_string(guard_level));
      state = std::move(next);
    } catch (const Error& e) {
      traj.completed = false;
      traj.termination_cause = e.what();
      traj.saves.push_back(
          {state, make_certificate(state, p, dop, divu_integral)});
      return traj;
    }
    ++n;
    done = scheme.adaptive ? state.t >= config.T - 1e-12 * config.T
                           : n >= nsteps;
    if (n % config.save_every == 0 || done)
      traj.saves.push_back(
          {state, make_certificate(state, p, dop, divu_integral)});
  }
  return traj;
}

EnvelopeReport positivity_envelope_check(const Trajectory& traj, double rho_lo,
                                         double rho_hi) {
  EnvelopeReport rep;
  rep.worst_margin = std::numeric_limits<double>::infinity();
  for (const auto& e : traj.saves) {
    EnvelopeEntry en;
    en.t = e.cert.t;
    en.lower = rho_lo * std::exp(-e.cert.divu_integral);
    en.upper = rho_hi * std::exp(e.cert.divu_integral);
    en.min_rho = e.cert.min_rho;
    en.max_rho = e.cert.max_rho;
    en.margin_lo = en.min_rho - en.lower;
    en.margin_hi = en.upper - en.max_rho;
    if (en.margin_lo < 0 || en.margin_hi < 0) ++rep.violations;
    rep.worst_margin = std::min({rep.worst_margin, en.margin_lo, en.margin_hi});
    rep.entries.push_back(en);
  }
  return rep;
}

}  // namespace qnsp
