#include "iashock/profile_ode.hpp"
#include "iashock/error.hpp"
#include "iashock/numerics.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace iashock {

namespace {

using Cx = std::complex<double>;

constexpr double kStep = 1e-30;

std::array<Cx, 4> extended_rhs(const std::array<Cx, 4> &U, const PlasmaParams &p)
{
  auto const f = profile_rhs_t<Cx>(U[0], U[1], U[2], p, U[3]);
  return {f[0], f[1], f[2], Cx(0.0)};
}

} // namespace

std::array<double, 3> profile_rhs(const ProfileState &state, const PlasmaParams &params, double s)
{
  require(state.n > 0.0 && state.Z > 0.0, "profile_rhs: n and Z must be > 0");
  require(s != 0.0, "profile_rhs: s must be nonzero");
  return profile_rhs_t<double>(state.n, state.Z, state.W, params, s);
}

Eigen::Matrix4d extended_jacobian(const PlasmaParams &params, const ProfileState &state, double tau)
{
  Eigen::Matrix4d J;
  std::array<double, 4> const base{state.n, state.Z, state.W, tau};
  for (int j = 0; j < 4; ++j) {
    std::array<Cx, 4> U;
    for (int k = 0; k < 4; ++k) U[k] = Cx(base[k], k == j ? kStep : 0.0);
    auto const f = extended_rhs(U, params);
    for (int i = 0; i < 4; ++i) J(i, j) = f[i].imag() / kStep;
  }
  return J;
}

Eigen::Matrix3d profile_jacobian(const PlasmaParams &params, const ProfileState &state, double s)
{
  return extended_jacobian(params, state, s).topLeftCorner<3, 3>();
}

std::array<double, 4> jacobian_eigenvalues_reference(const PlasmaParams &params)
{
  params.validate();
  double const c = std::sqrt(params.T + 1.0);
  double const a = 1.0 / (2.0 * params.mu * c);
  double const r = std::sqrt(a * a + 1.0 / (params.lambda * params.lambda));
  return {-a - r, 0.0, 0.0, -a + r};
}

std::array<double, 4> jacobian_eigenvalues_numeric(const PlasmaParams &params)
{
  params.validate();
  Eigen::Matrix4d const J = extended_jacobian(params, ProfileState{}, std::sqrt(params.T + 1.0));
  Eigen::EigenSolver<Eigen::Matrix4d> es(J, false);
  std::array<double, 4> ev;
  for (int i = 0; i < 4; ++i) ev[i] = es.eigenvalues()[i].real();
  std::sort(ev.begin(), ev.end());
  return ev;
}

double g_dot_zero(const PlasmaParams &params, double n_plus)
{
  return std::sqrt(params.T + 1.0) * (1.0 - n_plus) / (2.0 * params.mu);
}

double linearized_tail_rate(const PlasmaParams &params, double s, const EquilibriumState &state, Side side)
{
  Eigen::Matrix3d const J = profile_jacobian(params, ProfileState{state.n, state.n, 0.0}, s);
  Eigen::EigenSolver<Eigen::Matrix3d> es(J, false);
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 3; ++i) {
    Cx const ev = es.eigenvalues()[i];
    if (std::abs(ev.imag()) > 1e-12 * std::abs(ev)) continue;
    double const re = ev.real();
    if (side == Side::Left && re > 0.0) best = std::min(best, re);
    if (side == Side::Right && re < 0.0) best = std::min(best, -re);
  }
  if (!std::isfinite(best)) {
    throw SolverError(ErrorKind::ComplexRates, "no real slow eigenvalue at the far field");
  }
  return best;
}

GridSpec default_profile_grid(const PlasmaParams &params, double epsilon, int nodes, double L_factor)
{
  auto const d = parametrize_downstream(params.T, epsilon, 1.0);
  return GridSpec{L_factor / g_dot_zero(params, d.state.n), nodes};
}

namespace {

struct Discretization
{
  PlasmaParams     p;
  double           s;
  EquilibriumState left, right;
  double           h;
  Eigen::Index     N;
  Eigen::Index     mid;
  double           n_mid;
};

// unknowns interleaved as [n_0, phi_0, n_1, phi_1, ...]. The momentum
// equation is collocated at interval midpoints (box scheme); the Poisson
// equation at nodes with Dirichlet potential at both ends. Row 2(N-1) holds
// the phase condition; n at the ends is left free and checked afterwards.
void assemble(const Discretization &d, const Vec &x, Vec &F, Eigen::SparseMatrix<double> *J)
{
  Eigen::Index const N = d.N;
  double const h = d.h, s = d.s, mu = d.p.mu, l2 = d.p.lambda * d.p.lambda, T = d.p.T;
  F.resize(2 * N);
  std::vector<Eigen::Triplet<double>> trip;
  if (J) trip.reserve(12 * N);

  auto n   = [&](Eigen::Index i) { return x[2 * i]; };
  auto phi = [&](Eigen::Index i) { return x[2 * i + 1]; };

  for (Eigen::Index i = 0; i + 1 < N; ++i) {
    Eigen::Index const r = 2 * i;
    double const nb = 0.5 * (n(i) + n(i + 1));
    double const pb = 0.5 * (phi(i) + phi(i + 1));
    double const eb = std::exp(pb);
    double const W = (phi(i + 1) - phi(i)) / h;
    double const dn = (n(i + 1) - n(i)) / h;
    double const nm1 = nb - 1.0;
    double const B = (T - s * s) * nm1 + s * s * nm1 * nm1 / nb - 0.5 * l2 * W * W + eb - 1.0;
    F[r] = mu * s * dn / (nb * nb) - B;
    if (J) {
      double const dB_dn = (T - s * s) + s * s * (1.0 - 1.0 / (nb * nb));
      double const common = -mu * s * dn / (nb * nb * nb) - 0.5 * dB_dn;
      trip.emplace_back(r, 2 * (i + 1), mu * s / (h * nb * nb) + common);
      trip.emplace_back(r, 2 * i, -mu * s / (h * nb * nb) + common);
      trip.emplace_back(r, 2 * (i + 1) + 1, -0.5 * eb + l2 * W / h);
      trip.emplace_back(r, 2 * i + 1, -0.5 * eb - l2 * W / h);
    }
  }
  F[2 * (N - 1)] = n(d.mid) - d.n_mid;
  if (J) trip.emplace_back(2 * (N - 1), 2 * d.mid, 1.0);

  F[1] = phi(0) - d.left.phi;
  F[2 * (N - 1) + 1] = phi(N - 1) - d.right.phi;
  if (J) {
    trip.emplace_back(1, 1, 1.0);
    trip.emplace_back(2 * (N - 1) + 1, 2 * (N - 1) + 1, 1.0);
  }
  for (Eigen::Index i = 1; i < N - 1; ++i) {
    Eigen::Index const rp = 2 * i + 1;
    double const ei = std::exp(phi(i));
    F[rp] = -l2 * (phi(i + 1) - 2 * phi(i) + phi(i - 1)) / (h * h) - n(i) + ei;
    if (J) {
      trip.emplace_back(rp, 2 * (i + 1) + 1, -l2 / (h * h));
      trip.emplace_back(rp, 2 * (i - 1) + 1, -l2 / (h * h));
      trip.emplace_back(rp, 2 * i + 1, 2 * l2 / (h * h) + ei);
      trip.emplace_back(rp, 2 * i, -1.0);
    }
  }
  if (J) {
    J->resize(2 * N, 2 * N);
    J->setFromTriplets(trip.begin(), trip.end());
  }
}

struct NewtonResult
{
  bool                converged = false;
  int                 iterations = 0;
  double              residual   = 0.0;
  std::vector<double> history;
};

NewtonResult newton(const Discretization &d, Vec &x, double tol, int max_iter)
{
  NewtonResult res;
  Vec F, Ft;
  Eigen::SparseMatrix<double> J;
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  assemble(d, x, F, &J);
  double fnorm = F.lpNorm<Eigen::Infinity>();
  for (int it = 1; it <= max_iter; ++it) {
    if (it == 1) lu.analyzePattern(J);
    lu.factorize(J);
    if (lu.info() != Eigen::Success) break;
    Vec const dx = lu.solve(-F);
    if (!dx.allFinite()) break;
    // damped step: halve until the residual decreases and n stays positive
    double t = 1.0;
    Vec xt;
    bool accepted = false;
    for (int k = 0; k < 30; ++k, t *= 0.5) {
      xt = x + t * dx;
      bool positive = true;
      for (Eigen::Index i = 0; i < d.N; ++i) positive = positive && xt[2 * i] > 0.0;
      if (!positive) continue;
      assemble(d, xt, Ft, nullptr);
      double const fn = Ft.lpNorm<Eigen::Infinity>();
      if (std::isfinite(fn) && (fn < fnorm || t * dx.lpNorm<Eigen::Infinity>() < tol)) {
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
    x = xt;
    double const step = t * dx.lpNorm<Eigen::Infinity>();
    res.history.push_back(step);
    res.iterations = it;
    assemble(d, x, F, &J);
    fnorm = F.lpNorm<Eigen::Infinity>();
    if (step < tol && t == 1.0) {
      res.converged = true;
      break;
    }
  }
  res.residual = fnorm;
  return res;
}

Discretization make_discretization(const PlasmaParams &params, double epsilon, const GridSpec &grid)
{
  auto const ds = parametrize_downstream(params.T, epsilon, 1.0);
  Discretization d;
  d.p = params;
  d.s = ds.s;
  d.left = EquilibriumState{1.0, 0.0, 0.0};
  d.right = ds.state;
  d.h = grid.h();
  d.N = grid.nodes;
  d.mid = grid.nodes / 2;
  d.n_mid = 0.5 * (d.left.n + d.right.n);
  return d;
}

ProfileSolution solve_at(const PlasmaParams &params, double epsilon, const ProfileOptions &opts, Vec x, int depth)
{
  GridSpec const &grid = opts.grid;
  Discretization const d = make_discretization(params, epsilon, grid);
  Vec const xi = grid.nodes_vec();

  if (x.size() == 0) {
    double const g = g_dot_zero(params, d.right.n);
    x.resize(2 * d.N);
    for (Eigen::Index i = 0; i < d.N; ++i) {
      double const w = 0.5 * (1.0 + std::tanh(g * xi[i]));
      double const n0 = d.left.n + (d.right.n - d.left.n) * w;
      x[2 * i] = n0;
      x[2 * i + 1] = std::log(n0);
    }
  }

  NewtonResult nr = newton(d, x, opts.newton_tol, opts.max_newton);
  if (!nr.converged) {
    if (depth >= opts.max_halvings) {
      std::ostringstream msg;
      msg << "profile Newton failed at epsilon = " << epsilon << " (residual " << nr.residual << ")";
      throw SolverError(depth == 0 ? ErrorKind::NewtonDiverged : ErrorKind::AmplitudeTooLarge, msg.str(),
                        nr.history);
    }
    // continuation: solve at half amplitude, stretch in amplitude and width
    ProfileSolution const half = solve_at(params, 0.5 * epsilon, opts, Vec(), depth + 1);
    double const amp_ratio = (d.right.n - 1.0) / (half.right.n - 1.0);
    double const width_ratio = g_dot_zero(params, half.right.n) / g_dot_zero(params, d.right.n);
    x.resize(2 * d.N);
    Vec const xs = xi / width_ratio;
    double const x0h = half.xi[0], hh = half.h();
    for (Eigen::Index i = 0; i < d.N; ++i) {
      double const nh = num::interp_uniform(half.n, x0h, hh, xs[i]);
      double const ph = num::interp_uniform(half.phi, x0h, hh, xs[i]);
      x[2 * i] = 1.0 + amp_ratio * (nh - 1.0);
      x[2 * i + 1] = amp_ratio * ph;
    }
    nr = newton(d, x, opts.newton_tol, opts.max_newton);
    if (!nr.converged) {
      std::ostringstream msg;
      msg << "continuation failed at epsilon = " << epsilon << " (residual " << nr.residual << ")";
      throw SolverError(ErrorKind::AmplitudeTooLarge, msg.str(), nr.history);
    }
  }

  ProfileSolution sol;
  sol.xi = xi;
  sol.n.resize(d.N);
  sol.phi.resize(d.N);
  for (Eigen::Index i = 0; i < d.N; ++i) {
    sol.n[i] = x[2 * i];
    sol.phi[i] = x[2 * i + 1];
  }
  sol.u = d.s * (1.0 - sol.n.array().inverse());
  sol.s = d.s;
  sol.epsilon = epsilon;
  sol.left = d.left;
  sol.right = d.right;
  sol.params = params;
  sol.residual_norm = nr.residual;
  sol.newton_iterations = nr.iterations;
  sol.update_history = nr.history;

  double const amp = std::abs(d.right.n - d.left.n);
  sol.endpoint_mismatch =
    std::max(std::abs(sol.n[0] - d.left.n), std::abs(sol.n[d.N - 1] - d.right.n)) / amp;
  if (sol.endpoint_mismatch > opts.domain_tol) {
    std::ostringstream msg;
    msg << "profile tails not settled at the domain ends (relative mismatch " << sol.endpoint_mismatch
        << "); increase L";
    throw SolverError(ErrorKind::DomainTooShort, msg.str());
  }
  return sol;
}

} // namespace

ProfileSolution solve_profile(const PlasmaParams &params, double epsilon, const ProfileOptions &opts)
{
  params.validate();
  opts.grid.validate();
  require(opts.grid.nodes % 2 == 1, "solve_profile: node count must be odd so that xi = 0 is a node");
  parametrize_downstream(params.T, epsilon, opts.eps_max_factor);
  return solve_at(params, epsilon, opts, Vec(), 0);
}

double mass_integral_residual(const ProfileSolution &sol)
{
  return (sol.u.array() - sol.s * (1.0 - sol.n.array().inverse())).abs().maxCoeff();
}

Vec first_integral_residual_field(const ProfileSolution &sol)
{
  double const h = sol.h(), s = sol.s, mu = sol.params.mu, T = sol.params.T;
  double const l2 = sol.params.lambda * sol.params.lambda;
  Vec const dn = num::d1(sol.n, h);
  Vec const dphi = num::d1(sol.phi, h);
  Vec const ddphi = num::d2(sol.phi, h);
  auto const n = sol.n.array();
  Eigen::ArrayXd const lhs = mu * s * dn.array() / n.square();
  Eigen::ArrayXd const rhs = (T + 1.0 - s * s) * (n - 1.0) + s * s * (n - 1.0).square() / n -
                             0.5 * l2 * dphi.array().square() + l2 * ddphi.array();
  return lhs - rhs;
}

double first_integral_residual(const ProfileSolution &sol)
{
  Vec const r = first_integral_residual_field(sol);
  Eigen::Index const N = r.size();
  return r.segment(2, N - 4).cwiseAbs().maxCoeff();
}

DecayFit fit_tail(const Vec &x, const Vec &f, double far, Side side, double lo, double hi)
{
  std::vector<double> xs, ys;
  Eigen::Index const N = x.size();
  Eigen::Index const mid = N / 2;
  if (side == Side::Left) {
    for (Eigen::Index i = 0; i < mid; ++i) {
      double const d = std::abs(f[i] - far);
      if (d > lo && d < hi) {
        xs.push_back(x[i]);
        ys.push_back(std::log(d));
      }
    }
  } else {
    for (Eigen::Index i = mid; i < N; ++i) {
      double const d = std::abs(f[i] - far);
      if (d > lo && d < hi) {
        xs.push_back(x[i]);
        ys.push_back(std::log(d));
      }
    }
  }
  if (xs.size() < 20) {
    std::ostringstream msg;
    msg << "tail window holds " << xs.size() << " nodes, need >= 20";
    throw SolverError(ErrorKind::TailUnresolved, msg.str());
  }
  Vec const X = Eigen::Map<const Vec>(xs.data(), xs.size());
  Vec const Y = Eigen::Map<const Vec>(ys.data(), ys.size());
  auto const [a, b] = num::linear_fit(X, Y);
  DecayFit fit;
  fit.rate = side == Side::Left ? b : -b;
  fit.intercept = a;
  fit.points = static_cast<int>(xs.size());
  return fit;
}

DecayFit decay_rate_estimate(const ProfileSolution &sol, Side side, double lo, double hi)
{
  double const far = side == Side::Left ? sol.left.n : sol.right.n;
  return fit_tail(sol.xi, sol.n, far, side, lo, hi);
}

bool strictly_decreasing(const Vec &f, double far_left, double far_right)
{
  double const eps = std::numeric_limits<double>::epsilon();
  double const tl = 512 * eps * std::max(1.0, std::abs(far_left));
  double const tr = 512 * eps * std::max(1.0, std::abs(far_right));
  for (Eigen::Index i = 0; i + 1 < f.size(); ++i) {
    if (f[i + 1] < f[i]) continue;
    bool const sat_left = std::abs(f[i] - far_left) <= tl && std::abs(f[i + 1] - far_left) <= tl;
    bool const sat_right = std::abs(f[i] - far_right) <= tr && std::abs(f[i + 1] - far_right) <= tr;
    if (!sat_left && !sat_right) return false;
  }
  return true;
}

StructureReport profile_structure(const ProfileSolution &sol)
{
  StructureReport r;
  r.n_decreasing = strictly_decreasing(sol.n, sol.left.n, sol.right.n);
  r.u_decreasing = strictly_decreasing(sol.u, sol.left.u, sol.right.u);
  r.phi_decreasing = strictly_decreasing(sol.phi, sol.left.phi, sol.right.phi);
  Vec const dn = num::d1(sol.n, sol.h());
  Vec const dphi = num::d1(sol.phi, sol.h());
  double const floor = 1e-6 * dn.cwiseAbs().maxCoeff();
  r.C_lower = std::numeric_limits<double>::infinity();
  r.C_upper = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 2; i < dn.size() - 2; ++i) {
    if (std::abs(dn[i]) < floor) continue;
    double const ratio = dphi[i] / dn[i];
    r.C_lower = std::min(r.C_lower, ratio);
    r.C_upper = std::max(r.C_upper, ratio);
  }
  return r;
}

} // namespace iashock
