#include "iashock/kdv_burgers.hpp"
#include "iashock/error.hpp"
#include "iashock/numerics.hpp"
#include "iashock/profile_ode.hpp"
#include "iashock/rankine_hugoniot.hpp"
#include "iashock/weighted_norm.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <cmath>
#include <sstream>

namespace iashock {

const char *to_string(KdvbKind kind)
{
  switch (kind) {
  case KdvbKind::N1: return "n1";
  case KdvbKind::U1: return "u1";
  case KdvbKind::Phi1: return "phi1";
  }
  return "?";
}

KdvbKind kdvb_kind_from_string(const std::string &name)
{
  if (name == "n1" || name == "n") return KdvbKind::N1;
  if (name == "u1" || name == "u") return KdvbKind::U1;
  if (name == "phi1" || name == "phi") return KdvbKind::Phi1;
  throw SolverError(ErrorKind::InvalidArgument, "unknown KdV-Burgers field '" + name + "'");
}

KdvbVariant KdvbVariant::modified_for(double T, double epsilon)
{
  auto const d = parametrize_downstream(T, epsilon);
  return KdvbVariant{true, epsilon, d.a_eps};
}

KdvbCoefficients kdvb_coefficients(double T, double delta, KdvbKind kind, const KdvbVariant &variant)
{
  require(T >= 0.0, "kdvb: T must be >= 0");
  require(delta >= 0.0, "kdvb: delta must be >= 0");
  double const c = std::sqrt(T + 1.0);
  double const e = variant.modified ? variant.epsilon : 0.0;
  switch (kind) {
  case KdvbKind::N1: return {2 * c - e, c * c, c, delta};
  case KdvbKind::U1: return {2 + (variant.modified ? e / (c - e) : 0.0), 1.0, 1.0, delta / c};
  case KdvbKind::Phi1: return {2 * c - (variant.modified ? variant.a_eps * c * c : 0.0), c * c, c, delta};
  }
  return {};
}

namespace {

// box scheme on (f, q = f'); for c4 = 0 the scalar trapezoidal rule on f
// alone. Right end: f = far (only when c4 > 0); middle node: f = far/2.
struct Box
{
  KdvbCoefficients c;
  double           h;
  Eigen::Index     N, mid;
  double           far;
};

void assemble(const Box &b, const Vec &x, Vec &F, Eigen::SparseMatrix<double> *J)
{
  Eigen::Index const N = b.N;
  double const h = b.h;
  auto const &c = b.c;
  std::vector<Eigen::Triplet<double>> trip;
  if (c.c4 > 0.0) {
    F.resize(2 * N);
    if (J) trip.reserve(10 * N);
    auto f = [&](Eigen::Index i) { return x[2 * i]; };
    auto q = [&](Eigen::Index i) { return x[2 * i + 1]; };
    auto G = [&](Eigen::Index i) { return c.c3 * q(i) - c.c1 * f(i) - c.c2 * f(i) * f(i); };
    for (Eigen::Index i = 0; i + 1 < N; ++i) {
      Eigen::Index const r = 2 * i;
      F[r] = f(i + 1) - f(i) - 0.5 * h * (q(i) + q(i + 1));
      F[r + 1] = c.c4 * (q(i + 1) - q(i)) - 0.5 * h * (G(i) + G(i + 1));
      if (J) {
        trip.emplace_back(r, 2 * (i + 1), 1.0);
        trip.emplace_back(r, 2 * i, -1.0);
        trip.emplace_back(r, 2 * i + 1, -0.5 * h);
        trip.emplace_back(r, 2 * (i + 1) + 1, -0.5 * h);
        for (Eigen::Index k : {i, i + 1}) {
          double const sgn = k == i ? -1.0 : 1.0;
          trip.emplace_back(r + 1, 2 * k + 1, sgn * c.c4 - 0.5 * h * c.c3);
          trip.emplace_back(r + 1, 2 * k, 0.5 * h * (c.c1 + 2 * c.c2 * f(k)));
        }
      }
    }
    F[2 * (N - 1)] = f(N - 1) - b.far;
    F[2 * (N - 1) + 1] = f(b.mid) - 0.5 * b.far;
    if (J) {
      trip.emplace_back(2 * (N - 1), 2 * (N - 1), 1.0);
      trip.emplace_back(2 * (N - 1) + 1, 2 * b.mid, 1.0);
      J->resize(2 * N, 2 * N);
    }
  } else {
    F.resize(N);
    if (J) trip.reserve(3 * N);
    auto g = [&](double f) { return (c.c1 * f + c.c2 * f * f) / c.c3; };
    auto dg = [&](double f) { return (c.c1 + 2 * c.c2 * f) / c.c3; };
    for (Eigen::Index i = 0; i + 1 < N; ++i) {
      F[i] = x[i + 1] - x[i] - 0.5 * h * (g(x[i]) + g(x[i + 1]));
      if (J) {
        trip.emplace_back(i, i + 1, 1.0 - 0.5 * h * dg(x[i + 1]));
        trip.emplace_back(i, i, -1.0 - 0.5 * h * dg(x[i]));
      }
    }
    F[N - 1] = x[b.mid] - 0.5 * b.far;
    if (J) {
      trip.emplace_back(N - 1, b.mid, 1.0);
      J->resize(N, N);
    }
  }
  if (J) J->setFromTriplets(trip.begin(), trip.end());
}

} // namespace

KdvbProfile solve_kdvb(double T, double delta, KdvbKind kind, const KdvbVariant &variant, const KdvbOptions &opts)
{
  opts.grid.validate();
  require(opts.grid.nodes % 2 == 1, "solve_kdvb: node count must be odd so that z = 0 is a node");
  if (variant.modified) require(variant.epsilon > 0.0, "solve_kdvb: modified variant needs epsilon > 0");

  KdvbProfile p;
  p.T = T;
  p.delta = delta;
  p.kind = kind;
  p.variant = variant;
  p.coeffs = kdvb_coefficients(T, delta, kind, variant);
  p.z = opts.grid.nodes_vec();
  p.far_left = 0.0;
  p.far_right = p.coeffs.far_right();

  Box b{p.coeffs, opts.grid.h(), opts.grid.nodes, opts.grid.nodes / 2, p.far_right};
  bool const second = p.coeffs.c4 > 0.0;
  Eigen::Index const N = b.N;

  // logistic guess with the delta = 0 left rate
  double const rate = p.coeffs.c1 / p.coeffs.c3;
  Vec x(second ? 2 * N : N);
  for (Eigen::Index i = 0; i < N; ++i) {
    double const e = std::exp(-rate * p.z[i]);
    double const f = b.far / (1.0 + e);
    if (second) {
      x[2 * i] = f;
      x[2 * i + 1] = std::isfinite(e) ? b.far * rate * e / ((1.0 + e) * (1.0 + e)) : 0.0;
    } else {
      x[i] = f;
    }
  }

  Vec F, Ft;
  Eigen::SparseMatrix<double> J;
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  assemble(b, x, F, &J);
  double fnorm = F.lpNorm<Eigen::Infinity>();
  std::vector<double> history;
  bool converged = false;
  for (int it = 1; it <= opts.max_newton; ++it) {
    if (it == 1) lu.analyzePattern(J);
    lu.factorize(J);
    if (lu.info() != Eigen::Success) break;
    Vec const dx = lu.solve(-F);
    if (!dx.allFinite()) break;
    double t = 1.0;
    Vec xt;
    bool accepted = false;
    for (int k = 0; k < 30; ++k, t *= 0.5) {
      xt = x + t * dx;
      assemble(b, xt, Ft, nullptr);
      double const fn = Ft.lpNorm<Eigen::Infinity>();
      if (std::isfinite(fn) && (fn < fnorm || t * dx.lpNorm<Eigen::Infinity>() < opts.newton_tol)) {
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
    x = xt;
    double const step = t * dx.lpNorm<Eigen::Infinity>();
    history.push_back(step);
    p.iterations = it;
    assemble(b, x, F, &J);
    fnorm = F.lpNorm<Eigen::Infinity>();
    if (step < opts.newton_tol || (t == 1.0 && fnorm < 1e-14)) {
      converged = true;
      break;
    }
  }
  p.residual = fnorm;
  if (!converged) {
    std::ostringstream msg;
    msg << "KdV-Burgers Newton failed for " << to_string(kind) << " (residual " << fnorm << ")";
    throw SolverError(ErrorKind::NewtonDiverged, msg.str(), history);
  }

  p.field.resize(N);
  p.slope.resize(N);
  for (Eigen::Index i = 0; i < N; ++i) {
    p.field[i] = second ? x[2 * i] : x[i];
    p.slope[i] = second ? x[2 * i + 1] : (p.coeffs.c1 * x[i] + p.coeffs.c2 * x[i] * x[i]) / p.coeffs.c3;
  }

  double const mismatch =
    std::max(std::abs(p.field[0] - p.far_left), std::abs(p.field[N - 1] - p.far_right)) / std::abs(p.far_right);
  if (mismatch > opts.far_tol) {
    std::ostringstream msg;
    msg << "KdV-Burgers far fields not reached (relative mismatch " << mismatch << "); increase L";
    throw SolverError(ErrorKind::FarFieldMismatch, msg.str());
  }
  return p;
}

KdvbTriple solve_kdvb_triple(double T, double delta, const KdvbVariant &variant, const KdvbOptions &opts)
{
  return {solve_kdvb(T, delta, KdvbKind::N1, variant, opts), solve_kdvb(T, delta, KdvbKind::U1, variant, opts),
          solve_kdvb(T, delta, KdvbKind::Phi1, variant, opts)};
}

double kdvb_equation_residual(const KdvbProfile &p)
{
  double const h = p.h();
  Vec const d1 = num::d1(p.field, h);
  Vec const d2 = num::d2(p.field, h);
  auto const &c = p.coeffs;
  Eigen::ArrayXd const r =
    c.c4 * d2.array() - c.c3 * d1.array() + c.c1 * p.field.array() + c.c2 * p.field.array().square();
  return r.segment(2, r.size() - 4).abs().maxCoeff();
}

double kdvb_logistic_limit(double T, double z)
{
  double const n1p = -2.0 / std::sqrt(T + 1.0);
  return n1p / (1.0 + std::exp(-2.0 * z));
}

PhaseEigenvalues kdvb_phase_eigenvalues(double T, double delta)
{
  require(T >= 0.0 && delta > 0.0, "kdvb_phase_eigenvalues: need T >= 0 and delta > 0");
  double const c = std::sqrt(T + 1.0);
  double const dm = T + 1.0 - 8.0 * c * delta;
  if (dm < 0.0) {
    std::ostringstream msg;
    msg << "T+1 - 8 sqrt(T+1) delta = " << dm << " < 0: oscillatory tail regime";
    throw SolverError(ErrorKind::ComplexRates, msg.str());
  }
  double const dp = T + 1.0 + 8.0 * c * delta;
  PhaseEigenvalues e;
  e.minus1 = (c - std::sqrt(dm)) / (2 * delta);
  e.minus2 = (c + std::sqrt(dm)) / (2 * delta);
  e.plus1 = (c - std::sqrt(dp)) / (2 * delta);
  e.plus2 = (c + std::sqrt(dp)) / (2 * delta);
  return e;
}

std::array<double, 2> kdvb_equilibrium_eigenvalues_numeric(const KdvbCoefficients &c, double far)
{
  require(c.c4 > 0.0, "equilibrium eigenvalues need c4 > 0");
  Eigen::Matrix2d A;
  A << 0.0, 1.0, -(c.c1 + 2 * c.c2 * far) / c.c4, c.c3 / c.c4;
  Eigen::EigenSolver<Eigen::Matrix2d> es(A, false);
  auto const ev = es.eigenvalues();
  if (std::abs(ev[0].imag()) > 0.0 || std::abs(ev[1].imag()) > 0.0) {
    throw SolverError(ErrorKind::ComplexRates, "complex equilibrium eigenvalues");
  }
  double a = ev[0].real(), b = ev[1].real();
  if (a > b) std::swap(a, b);
  return {a, b};
}

double kdvb_discriminant_root(double T)
{
  return std::sqrt(T + 1.0) / 8.0;
}

std::array<KdvbProfile, 2> first_order_fields(const KdvbProfile &n1)
{
  if (n1.kind != KdvbKind::N1 || n1.variant.modified) {
    throw SolverError(ErrorKind::InvalidArgument, "first_order_fields expects the classic n1 profile");
  }
  double const c = std::sqrt(n1.T + 1.0);
  KdvbProfile u = n1, phi = n1;
  u.kind = KdvbKind::U1;
  u.coeffs = kdvb_coefficients(n1.T, n1.delta, KdvbKind::U1, n1.variant);
  u.field = c * n1.field;
  u.slope = c * n1.slope;
  u.far_right = c * n1.far_right;
  phi.kind = KdvbKind::Phi1;
  phi.coeffs = kdvb_coefficients(n1.T, n1.delta, KdvbKind::Phi1, n1.variant);
  return {u, phi};
}

CorrectionFields second_order_correction(const KdvbTriple &classic, const KdvbTriple &modified, double epsilon)
{
  require(epsilon > 0.0, "second_order_correction: epsilon must be > 0");
  auto same = [](const KdvbProfile &a, const KdvbProfile &b) {
    return a.z.size() == b.z.size() && (a.z - b.z).cwiseAbs().maxCoeff() == 0.0;
  };
  if (!same(classic.n, modified.n) || !same(classic.u, modified.u) || !same(classic.phi, modified.phi)) {
    throw SolverError(ErrorKind::GridMismatch, "second_order_correction: profiles live on different grids");
  }
  CorrectionFields c;
  c.n2 = (modified.n.field - classic.n.field) / epsilon;
  c.u2 = (modified.u.field - classic.u.field) / epsilon;
  c.phi2 = (modified.phi.field - classic.phi.field) / epsilon;
  c.sup_n2 = num::sup(c.n2);
  c.sup_u2 = num::sup(c.u2);
  c.sup_phi2 = num::sup(c.phi2);
  return c;
}

MonotonicityReport monotonicity_report(const KdvbProfile &p)
{
  MonotonicityReport r;
  r.monotone = strictly_decreasing(p.field, p.far_left, p.far_right);
  double const hi = std::max(p.far_left, p.far_right), lo = std::min(p.far_left, p.far_right);
  r.overshoot = std::max({0.0, p.field.maxCoeff() - hi, lo - p.field.minCoeff()});
  return r;
}

std::array<double, 2> weighted_tail_norms(const KdvbProfile &p, double alpha)
{
  Eigen::Index const N = p.z.size(), mid = N / 2;
  Vec const gl = p.field.head(mid + 1).array() - p.far_left;
  Vec const gr = p.field.tail(N - mid).array() - p.far_right;
  WeightedNormSpec spec{alpha, 0};
  return {weighted_l2(p.z.head(mid + 1), gl, spec), weighted_l2(p.z.tail(N - mid), gr, spec)};
}

} // namespace iashock
