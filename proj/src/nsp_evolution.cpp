#include "iashock/nsp_evolution.hpp"
#include "iashock/error.hpp"
#include "iashock/numerics.hpp"
#include "iashock/rankine_hugoniot.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <complex>
#include <sstream>

namespace iashock {

Vec YGrid::nodes_vec() const
{
  Vec y(nodes);
  double const hh = h();
  for (int i = 0; i < nodes; ++i) y[i] = y_min + i * hh;
  y[nodes - 1] = y_max;
  return y;
}

void YGrid::validate() const
{
  require(y_max > y_min, "y grid: y_max must exceed y_min");
  require(y_min < 0.0 && y_max > 0.0, "y grid: the shock at y = 0 must lie inside the domain");
  require(nodes >= 9, "y grid: need at least 9 nodes");
}

double epsilon_for_volume_jump(double T, double jump)
{
  require(T >= 0.0 && jump > 0.0, "volume jump: need T >= 0 and jump > 0");
  double const c = std::sqrt(T + 1.0);
  return c - c / std::sqrt(1.0 + jump);
}

LagrangianProfile lagrangian_profile(const ProfileSolution &sol, const YGrid &grid)
{
  grid.validate();
  Eigen::Index const mid = sol.xi.size() / 2;
  Vec ym = num::cumtrapz(sol.n, sol.h());
  ym.array() -= ym[mid];

  LagrangianProfile p;
  p.y = grid.nodes_vec();
  p.s = sol.s;
  p.params = sol.params;
  p.left = eulerian_to_lagrangian(sol.left);
  p.right = eulerian_to_lagrangian(sol.right);

  Vec const vE = sol.n.array().inverse();
  p.v = num::interp_cubic(ym, vE, p.y);
  p.u = num::interp_cubic(ym, sol.u, p.y);
  p.phi = num::interp_cubic(ym, sol.phi, p.y);
  for (Eigen::Index i = 0; i < p.y.size(); ++i) {
    if (p.y[i] <= ym[0]) {
      p.v[i] = p.left.v;
      p.u[i] = p.left.u;
      p.phi[i] = p.left.phi;
    } else if (p.y[i] >= ym[ym.size() - 1]) {
      p.v[i] = p.right.v;
      p.u[i] = p.right.u;
      p.phi[i] = p.right.phi;
    }
  }
  Eigen::Index const N = p.y.size();
  p.v[0] = p.left.v;
  p.u[0] = p.left.u;
  p.phi[0] = p.left.phi;
  p.v[N - 1] = p.right.v;
  p.u[N - 1] = p.right.u;
  p.phi[N - 1] = p.right.phi;
  return p;
}

Vec poisson_solve(const Vec &v,
                  double h,
                  double lambda,
                  const Vec &guess,
                  double phi_left,
                  double phi_right,
                  double tol,
                  PoissonStats *stats)
{
  Eigen::Index const N = v.size();
  require(guess.size() == N && N >= 3, "poisson_solve: size mismatch");
  require(v.minCoeff() > 0.0, "poisson_solve: v must be positive");
  double const l2 = lambda * lambda / (h * h);

  Vec inv_vc(N - 1);
  for (Eigen::Index f = 0; f + 1 < N; ++f) inv_vc[f] = 2.0 / (v[f] + v[f + 1]);

  Vec phi = guess;
  phi[0] = phi_left;
  phi[N - 1] = phi_right;
  Eigen::Index const M = N - 2;
  Vec F(M), sub(M), diag(M), sup(M);
  std::vector<double> history;
  for (int it = 0; it <= 50; ++it) {
    double fmax = 0.0;
    for (Eigen::Index k = 0; k < M; ++k) {
      Eigen::Index const i = k + 1;
      double const ev = v[i] * std::exp(phi[i]);
      F[k] = -l2 * (inv_vc[i] * (phi[i + 1] - phi[i]) - inv_vc[i - 1] * (phi[i] - phi[i - 1])) - 1.0 + ev;
      sub[k] = -l2 * inv_vc[i - 1];
      sup[k] = -l2 * inv_vc[i];
      diag[k] = l2 * (inv_vc[i - 1] + inv_vc[i]) + ev;
      fmax = std::max(fmax, std::abs(F[k]));
    }
    history.push_back(fmax);
    if (stats) {
      stats->iterations = it;
      stats->residuals = history;
    }
    if (fmax < tol) return phi;
    if (!std::isfinite(fmax) || it == 50) break;
    Vec rhs = -F;
    num::thomas(sub, diag, sup, rhs);
    phi.segment(1, M) += rhs;
  }
  std::ostringstream msg;
  msg << "Poisson Newton did not converge (residual " << history.back() << ")";
  throw SolverError(ErrorKind::NewtonDiverged, msg.str(), history);
}

namespace {

template <typename S>
using VecT = Eigen::Matrix<S, Eigen::Dynamic, 1>;

template <typename S>
struct RhsT
{
  VecT<S> dv, du_expl, du_visc, poisson;
};

// flux form of the frame-shifted system; faces f sit between nodes f and f+1.
// Transport s d/dy carries information leftwards, so its face value is the
// kappa = 1/3 reconstruction biased to the right; everything else is centred.
template <typename S>
RhsT<S> rhs_t(const VecT<S> &v, const VecT<S> &u, const VecT<S> &phi, double h, double s, const PlasmaParams &p)
{
  Eigen::Index const N = v.size();
  double const T = p.T, mu = p.mu, l2 = p.lambda * p.lambda;
  VecT<S> ephi(N), pres(N);
  for (Eigen::Index i = 0; i < N; ++i) {
    ephi[i] = std::exp(phi[i]);
    pres[i] = T / v[i] + ephi[i];
  }
  VecT<S> Fv(N - 1), Fe(N - 1), Fi(N - 1), Ef(N - 1);
  for (Eigen::Index f = 0; f + 1 < N; ++f) {
    S const vc = 0.5 * (v[f] + v[f + 1]);
    S vk, uk;
    if (f + 2 < N) {
      vk = v[f] / 3.0 + 5.0 * v[f + 1] / 6.0 - v[f + 2] / 6.0;
      uk = u[f] / 3.0 + 5.0 * u[f + 1] / 6.0 - u[f + 2] / 6.0;
    } else {
      vk = vc;
      uk = 0.5 * (u[f] + u[f + 1]);
    }
    S const E = (phi[f + 1] - phi[f]) / (h * vc);
    Ef[f] = E;
    Fv[f] = s * vk + 0.5 * (u[f] + u[f + 1]);
    Fe[f] = s * uk - 0.5 * (pres[f] + pres[f + 1]) + 0.5 * l2 * E * E;
    Fi[f] = mu * (u[f + 1] - u[f]) / (h * vc);
  }
  RhsT<S> r;
  r.dv = VecT<S>::Zero(N);
  r.du_expl = VecT<S>::Zero(N);
  r.du_visc = VecT<S>::Zero(N);
  r.poisson = VecT<S>::Zero(N);
  for (Eigen::Index i = 1; i + 1 < N; ++i) {
    r.dv[i] = (Fv[i] - Fv[i - 1]) / h;
    r.du_expl[i] = (Fe[i] - Fe[i - 1]) / h;
    r.du_visc[i] = (Fi[i] - Fi[i - 1]) / h;
    r.poisson[i] = -l2 * (Ef[i] - Ef[i - 1]) / h - 1.0 + v[i] * ephi[i];
  }
  return r;
}

// (I - g L_v) u = rhs with L_v u = mu (u_y / v)_y, Dirichlet ends kept
void viscous_solve(const Vec &v, double h, double mu, double g, Vec &u, const Vec &rhs)
{
  Eigen::Index const N = v.size(), M = N - 2;
  double const c = g * mu / (h * h);
  Vec sub(M), diag(M), sup(M), b(M);
  for (Eigen::Index k = 0; k < M; ++k) {
    Eigen::Index const i = k + 1;
    double const am = 2.0 / (v[i - 1] + v[i]), ap = 2.0 / (v[i] + v[i + 1]);
    sub[k] = -c * am;
    sup[k] = -c * ap;
    diag[k] = 1.0 + c * (am + ap);
    b[k] = rhs[i];
  }
  b[0] += c * (2.0 / (v[0] + v[1])) * u[0];
  b[M - 1] += c * (2.0 / (v[N - 2] + v[N - 1])) * u[N - 1];
  num::thomas(sub, diag, sup, b);
  u.segment(1, M) = b;
}

} // namespace

SemiDiscrete semi_discrete(const Vec &v, const Vec &u, const Vec &phi, double h, double s, const PlasmaParams &p)
{
  require(v.size() == u.size() && v.size() == phi.size() && v.size() >= 4, "semi_discrete: size mismatch");
  auto r = rhs_t<double>(v, u, phi, h, s, p);
  return {std::move(r.dv), std::move(r.du_expl), std::move(r.du_visc), std::move(r.poisson)};
}

double steady_residual(const LagrangianProfile &prof)
{
  SemiDiscrete const r = semi_discrete(prof.v, prof.u, prof.phi, prof.h(), prof.s, prof.params);
  return std::max({r.dv.cwiseAbs().maxCoeff(), (r.du_expl + r.du_visc).cwiseAbs().maxCoeff(),
                   r.poisson.cwiseAbs().maxCoeff()});
}

SteadyStateResult discrete_steady_state(const LagrangianProfile &guess, double tol, int max_iter)
{
  using Cx = std::complex<double>;
  Eigen::Index const N = guess.y.size(), M = N - 2, mid = M / 2;
  require(N >= 9, "discrete_steady_state: grid too small");
  double const h = guess.h(), mass = guess.v.sum() * h, len = N * h;
  double const cs = 1e-20;

  SteadyStateResult res;
  res.profile = guess;
  res.residual_before = steady_residual(guess);
  auto &p = res.profile;

  // unknowns per interior node: v, u, phi and the running mass m_k = h (v_0 + ... + v_k);
  // the m rows keep the mass constraint banded instead of one dense row
  auto residual = [&](const LagrangianProfile &q) {
    SemiDiscrete const r = semi_discrete(q.v, q.u, q.phi, h, q.s, q.params);
    Vec R = Vec::Zero(4 * M);
    for (Eigen::Index k = 0; k < M; ++k) {
      R[4 * k] = r.dv[k + 1];
      R[4 * k + 1] = r.du_expl[k + 1] + r.du_visc[k + 1];
      R[4 * k + 2] = r.poisson[k + 1];
    }
    R[4 * mid] = (q.v.sum() * h - mass) / len;
    return R;
  };

  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  for (int it = 0; it < max_iter; ++it) {
    Vec const R = residual(p);
    double const rn = R.lpNorm<Eigen::Infinity>();
    res.history.push_back(rn);
    if (rn < tol) break;

    // complex-step Jacobian; every residual depends on nodes k-1..k+2 only,
    // so nodes five apart can be perturbed together
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(40 * M);
    VecT<Cx> const v0 = p.v.cast<Cx>(), u0 = p.u.cast<Cx>(), f0 = p.phi.cast<Cx>();
    for (int field = 0; field < 3; ++field) {
      for (int color = 0; color < 5; ++color) {
        VecT<Cx> v = v0, u = u0, f = f0;
        VecT<Cx> &w = field == 0 ? v : field == 1 ? u : f;
        for (Eigen::Index k = color; k < M; k += 5) w[k + 1] += Cx(0.0, cs);
        auto const r = rhs_t<Cx>(v, u, f, h, p.s, p.params);
        for (Eigen::Index k = 0; k < M; ++k) {
          Eigen::Index j = k - 2 + ((color - (k - 2)) % 5 + 5) % 5;
          if (j < 0 || j >= M) continue;
          double const dv = r.dv[k + 1].imag() / cs;
          double const du = (r.du_expl[k + 1] + r.du_visc[k + 1]).imag() / cs;
          double const dp = r.poisson[k + 1].imag() / cs;
          if (k != mid && dv != 0.0) trip.emplace_back(4 * k, 4 * j + field, dv);
          if (du != 0.0) trip.emplace_back(4 * k + 1, 4 * j + field, du);
          if (dp != 0.0) trip.emplace_back(4 * k + 2, 4 * j + field, dp);
        }
      }
    }
    for (Eigen::Index k = 0; k < M; ++k) {
      trip.emplace_back(4 * k + 3, 4 * k + 3, 1.0);
      trip.emplace_back(4 * k + 3, 4 * k, -h);
      if (k > 0) trip.emplace_back(4 * k + 3, 4 * (k - 1) + 3, -1.0);
    }
    trip.emplace_back(4 * mid, 4 * (M - 1) + 3, 1.0 / len);
    Eigen::SparseMatrix<double> J(4 * M, 4 * M);
    J.setFromTriplets(trip.begin(), trip.end());
    if (it == 0) lu.analyzePattern(J);
    lu.factorize(J);
    if (lu.info() != Eigen::Success) {
      throw SolverError(ErrorKind::SingularSystem, "discrete steady state: singular Jacobian", res.history);
    }
    Vec const dx = lu.solve(-R);
    for (Eigen::Index k = 0; k < M; ++k) {
      p.v[k + 1] += dx[4 * k];
      p.u[k + 1] += dx[4 * k + 1];
      p.phi[k + 1] += dx[4 * k + 2];
    }
    res.iterations = it + 1;
  }
  double const last = res.history.back();
  if (!(last < tol)) {
    Vec const R = residual(p);
    double const rn = R.lpNorm<Eigen::Infinity>();
    res.history.push_back(rn);
    if (!(rn < 1e3 * tol)) {
      std::ostringstream msg;
      msg << "discrete steady state Newton stalled at residual " << rn;
      throw SolverError(ErrorKind::NewtonDiverged, msg.str(), res.history);
    }
  }
  res.residual_after = steady_residual(p);
  res.distance = std::max({(p.v - guess.v).cwiseAbs().maxCoeff(), (p.u - guess.u).cwiseAbs().maxCoeff(),
                           (p.phi - guess.phi).cwiseAbs().maxCoeff()});
  return res;
}

double perturbation_shape(const PerturbationSpec &pert, double y)
{
  double const w = pert.width, x = (y - pert.center) / w;
  switch (pert.shape) {
  case PerturbationShape::DerivativeOfBump: return -2.0 * x / w * std::exp(-x * x);
  case PerturbationShape::Dipole: return std::exp(-(x - 1.0) * (x - 1.0)) - std::exp(-(x + 1.0) * (x + 1.0));
  }
  return 0.0;
}

double perturbation_antiderivative(const PerturbationSpec &pert, double y)
{
  double const w = pert.width, x = (y - pert.center) / w;
  switch (pert.shape) {
  case PerturbationShape::DerivativeOfBump: return std::exp(-x * x);
  case PerturbationShape::Dipole: return 0.5 * std::sqrt(M_PI) * w * (std::erf(x - 1.0) - std::erf(x + 1.0));
  }
  return 0.0;
}

LagrangianState profile_state(const LagrangianProfile &prof)
{
  LagrangianState st;
  st.y = prof.y;
  st.v = prof.v;
  st.u = prof.u;
  st.phi = prof.phi;
  st.phi_t = Vec::Zero(prof.y.size());
  st.s = prof.s;
  st.params = prof.params;
  st.left = prof.left;
  st.right = prof.right;
  return st;
}

LagrangianState make_initial(const LagrangianProfile &prof, const PerturbationSpec &pert)
{
  require(pert.width > 0.0, "perturbation width must be > 0");
  LagrangianState st = profile_state(prof);
  if (pert.amplitude == 0.0) return st;
  Eigen::Index const N = prof.y.size();
  double const reach = pert.width * (pert.shape == PerturbationShape::Dipole ? 8.0 : 7.0);
  if (pert.center - reach < prof.y[0] || pert.center + reach > prof.y[N - 1]) {
    throw SolverError(ErrorKind::DomainTooShort, "perturbation too wide for the domain");
  }

  Vec pv = Vec::Zero(N), g = Vec::Zero(N);
  for (Eigen::Index i = 1; i + 1 < N; ++i) {
    pv[i] = pert.amplitude * perturbation_shape(pert, prof.y[i]);
    double const x = (prof.y[i] - pert.center) / pert.width;
    g[i] = std::exp(-x * x);
  }
  // rank-1 correction to exact discrete zero mass
  pv -= (pv.sum() / g.sum()) * g;
  st.v += pv;
  st.u += pv;
  if (st.v.minCoeff() <= 0.0) throw SolverError(ErrorKind::PositivityLost, "initial data has v <= 0");
  st.phi = poisson_solve(st.v, prof.h(), prof.params.lambda, prof.phi, prof.left.phi, prof.right.phi);
  return st;
}

double stable_dt(const LagrangianState &st, double cfl)
{
  double const c = std::sqrt(st.params.T + 1.0);
  return cfl * st.h() / (st.s + st.u.cwiseAbs().maxCoeff() + c / st.v.minCoeff());
}

namespace {

// ARS(4,4,3): explicit tableau a (first column used), implicit ai with a zero
// first column and diagonal 1/2; stiffly accurate, c identical in both
constexpr double kA[5][5] = {{0, 0, 0, 0, 0},
                             {1.0 / 2, 0, 0, 0, 0},
                             {11.0 / 18, 1.0 / 18, 0, 0, 0},
                             {5.0 / 6, -5.0 / 6, 1.0 / 2, 0, 0},
                             {1.0 / 4, 7.0 / 4, 3.0 / 4, -7.0 / 4, 0}};
constexpr double kAi[5][5] = {{0, 0, 0, 0, 0},
                              {0, 1.0 / 2, 0, 0, 0},
                              {0, 1.0 / 6, 1.0 / 2, 0, 0},
                              {0, -1.0 / 2, 1.0 / 2, 1.0 / 2, 0},
                              {0, 3.0 / 2, -3.0 / 2, 1.0 / 2, 1.0 / 2}};

void check_positive(const Vec &v, double t)
{
  Eigen::Index i = 0;
  double const m = v.minCoeff(&i);
  if (!(m > 0.0)) {
    std::ostringstream msg;
    msg << "specific volume lost positivity at node " << i << " (v = " << m << ", t = " << t << ")";
    throw SolverError(ErrorKind::PositivityLost, msg.str());
  }
}

} // namespace

void step(LagrangianState &st, double dt)
{
  require(dt > 0.0, "step: dt must be > 0");
  double const limit = stable_dt(st, 1.0);
  if (dt > limit) {
    std::ostringstream msg;
    msg << "dt = " << dt << " exceeds the acoustic limit " << limit;
    throw SolverError(ErrorKind::CFLViolation, msg.str());
  }
  double const h = st.h();
  auto const &p = st.params;
  Vec const v0 = st.v, u0 = st.u, phi0 = st.phi;

  Vec Ev[5], Eu[5], Iu[5];
  {
    SemiDiscrete r = semi_discrete(v0, u0, phi0, h, st.s, p);
    Ev[0] = std::move(r.dv);
    Eu[0] = std::move(r.du_expl);
    Iu[0] = std::move(r.du_visc);
  }
  Vec v, dv, u = u0, phi = phi0;
  for (int k = 1; k < 5; ++k) {
    dv = Vec::Zero(v0.size());
    Vec rhs = u0;
    for (int j = 0; j < k; ++j) {
      if (kA[k][j] != 0.0) {
        dv += dt * kA[k][j] * Ev[j];
        rhs += dt * kA[k][j] * Eu[j];
      }
      if (kAi[k][j] != 0.0) rhs += dt * kAi[k][j] * Iu[j];
    }
    v = v0 + dv;
    check_positive(v, st.t);
    phi = poisson_solve(v, h, p.lambda, phi, st.left.phi, st.right.phi);
    viscous_solve(v, h, p.mu, dt * kAi[k][k], u, rhs);
    if (k < 4) {
      SemiDiscrete r = semi_discrete(v, u, phi, h, st.s, p);
      Ev[k] = std::move(r.dv);
      Eu[k] = std::move(r.du_expl);
      Iu[k] = std::move(r.du_visc);
    }
  }
  st.phi_t = (phi - phi0) / dt;
  // the last stage is the new state; v0 + dv is split into v + v_lo exactly
  if (st.v_lo.size() == dv.size()) dv += st.v_lo;
  st.v_lo.resize(dv.size());
  for (Eigen::Index i = 0; i < dv.size(); ++i) {
    double const sum = v0[i] + dv[i], back = sum - v0[i];
    v[i] = sum;
    st.v_lo[i] = (v0[i] - (sum - back)) + (dv[i] - back);
  }
  st.v = std::move(v);
  st.u = std::move(u);
  st.phi = std::move(phi);
  st.t += dt;
}

Trajectory evolve(LagrangianState st, const LagrangianProfile &base, const EvolveOptions &opts)
{
  require(opts.t_end > st.t, "evolve: t_end must exceed the current time");
  require(opts.sample_every > 0.0, "evolve: sample_every must be > 0");
  require(base.y.size() == st.y.size(), "evolve: base profile and state grids differ");
  Trajectory tr;
  Eigen::Index const N = st.y.size();
  double const yl = st.y[0] * (1.0 - opts.guard_fraction), yr = st.y[N - 1] * (1.0 - opts.guard_fraction);

  double running = 0.0;
  auto sample = [&]() {
    EnergyReport const rep = energy_report(st, base);
    running = std::max(running, rep.sup_perturbation);
    tr.samples.push_back(rep);
    if (opts.observer) opts.observer(st, rep);
    if (running == 0.0) return;
    Vec const dev = volume_deviation(st, base);
    double guard = 0.0;
    for (Eigen::Index i = 0; i < N; ++i) {
      if (st.y[i] > yl && st.y[i] < yr) continue;
      guard = std::max({guard, std::abs(dev[i]), std::abs(st.u[i] - base.u[i])});
    }
    if (guard > opts.guard_threshold * running) {
      tr.guard_hit = true;
      if (opts.abort_on_guard) {
        std::ostringstream msg;
        msg << "perturbation entered the boundary guard band at t = " << st.t << " (" << guard / running
            << " of its running max); enlarge the domain";
        throw SolverError(ErrorKind::DomainTooShort, msg.str());
      }
    }
  };

  sample();
  double const t0 = st.t;
  long k = 0;
  while (st.t < opts.t_end - 1e-12 * opts.t_end) {
    ++k;
    double const target = std::min(opts.t_end, t0 + k * opts.sample_every);
    double const span = target - st.t;
    if (span <= 0.0) continue;
    double const dt0 = stable_dt(st, opts.cfl);
    long const n = static_cast<long>(std::ceil(span / dt0 - 1e-9));
    double const dt = span / n;
    for (long j = 0; j < n; ++j) step(st, dt);
    st.t = target;
    tr.steps += n;
    tr.dt = dt;
    sample();
  }
  tr.final_state = std::move(st);
  return tr;
}

double experiment_y_min(const ExperimentSpec &spec, double s)
{
  // downstream v is the largest, so sqrt(T+1)/v- = sqrt(T+1) bounds the sound speed
  double const speed = 1.05 * (s + std::sqrt(spec.params.T + 1.0));
  return -(speed * spec.t_end + 8.0 * std::sqrt(spec.t_end) + 200.0) / (1.0 - 0.2);
}

double experiment_y_max(const ExperimentSpec &spec)
{
  // behind the shock the slow acoustic family is nearly at rest, so the right
  // end only has to outrun diffusive spreading
  return std::max(600.0, (12.0 * std::sqrt(spec.t_end) + 200.0) / (1.0 - 0.2));
}

Experiment prepare_experiment(const ExperimentSpec &spec)
{
  require(spec.h > 0.0 && spec.t_end > 0.0, "experiment: need h > 0 and t_end > 0");
  spec.params.validate();
  Experiment ex;
  ex.epsilon = epsilon_for_volume_jump(spec.params.T, spec.jump);
  ProfileOptions po;
  po.grid = default_profile_grid(spec.params, ex.epsilon, spec.profile_nodes);
  ex.eulerian = solve_profile(spec.params, ex.epsilon, po);

  double const y_min = spec.y_min != 0.0 ? spec.y_min : experiment_y_min(spec, ex.eulerian.s);
  double const y_max = spec.y_max != 0.0 ? spec.y_max : experiment_y_max(spec);
  require(y_min < 0.0 && y_max > 0.0, "experiment: need y_min < 0 < y_max");
  // keep y = 0 on a node
  int const left = static_cast<int>(std::ceil(-y_min / spec.h - 1e-9));
  int const right = static_cast<int>(std::floor(y_max / spec.h + 1e-9));
  YGrid const grid{-left * spec.h, right * spec.h, left + right + 1};
  ex.transformed = lagrangian_profile(ex.eulerian, grid);
  if (spec.refine_steady) {
    ex.steady = discrete_steady_state(ex.transformed);
    ex.base = ex.steady.profile;
  }
  else {
    ex.base = ex.transformed;
  }

  PerturbationSpec pert = spec.pert;
  if (spec.amplitude_override != 0.0) {
    pert.amplitude = spec.amplitude_override;
  }
  else {
    require(spec.E0_target >= 0.0, "experiment: E0 target must be >= 0");
    pert.amplitude = 1.0;
    // E0 is exactly quadratic in the amplitude
    double const unit = initial_energy(make_initial(ex.base, pert), ex.base);
    pert.amplitude = std::sqrt(spec.E0_target / unit);
  }
  ex.amplitude = pert.amplitude;
  ex.initial = make_initial(ex.base, pert);
  ex.E0 = initial_energy(ex.initial, ex.base);
  return ex;
}

} // namespace iashock
