#include "iashock/approximation.hpp"
#include "iashock/error.hpp"
#include "iashock/numerics.hpp"
#include "iashock/rankine_hugoniot.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <future>
#include <sstream>

namespace iashock {

ScaledProfile build_scaled_profile(const ScalingParams &scaling, double T, const GridSpec &zgrid)
{
  scaling.validate();
  zgrid.validate();
  ProfileOptions opts;
  opts.grid = GridSpec{zgrid.L * scaling.mu_bar, zgrid.nodes};
  ProfileSolution const sol = solve_profile(scaling.physical(T), scaling.epsilon, opts);

  ScaledProfile p;
  p.z = zgrid.nodes_vec();
  p.n = sol.n;
  p.u = sol.u;
  p.phi = sol.phi;
  p.s = sol.s;
  p.T = T;
  p.scaling = scaling;
  p.newton_iterations = sol.newton_iterations;
  return p;
}

ScaledResiduals scaled_profile_residuals(const ScaledProfile &p)
{
  double const h = p.h(), s = p.s, e = p.scaling.epsilon, ed = e * p.scaling.delta();
  Vec const dn = num::d1(p.n, h);
  Vec const dphi = num::d1(p.phi, h);
  Vec const ddphi = num::d2(p.phi, h);
  auto const n = p.n.array();
  Eigen::Index const N = p.z.size();

  ScaledResiduals r;
  r.u_identity = (p.u.array() - s * (n - 1.0) / n).abs().maxCoeff();
  Eigen::ArrayXd const pois = -ed * ddphi.array() - (n - p.phi.array().exp());
  r.poisson = pois.segment(2, N - 4).abs().maxCoeff();
  Eigen::ArrayXd const mom = e * s * dn.array() / n.square() -
                             ((p.T + 1.0 - s * s) * (n - 1.0) + s * s * (n - 1.0).square() / n -
                              0.5 * ed * dphi.array().square() + ed * ddphi.array());
  r.momentum = mom.segment(2, N - 4).abs().maxCoeff();
  return r;
}

namespace {

bool same_grid(const Vec &a, const Vec &b)
{
  return a.size() == b.size() && (a - b).cwiseAbs().maxCoeff() <= 1e-12 * (1.0 + a.cwiseAbs().maxCoeff());
}

KdvbProfile shifted(const KdvbProfile &p, double shift)
{
  KdvbProfile q = p;
  Vec const zq = p.z.array() + shift;
  q.field = num::interp_cubic(p.z, p.field, zq);
  q.slope = num::interp_cubic(p.z, p.slope, zq);
  return q;
}

} // namespace

KdvbTriple align_first_order(const ScaledProfile &exact, const KdvbTriple &modified, double epsilon, double *shift)
{
  for (auto const *p : {&modified.n, &modified.u, &modified.phi}) {
    if (!same_grid(p->z, exact.z)) {
      throw SolverError(ErrorKind::GridMismatch, "remainder: first-order profiles and exact profile grids differ");
    }
  }
  Eigen::Index const mid = exact.z.size() / 2;
  double const target = (exact.n[mid] - 1.0) / epsilon;
  auto const &n1 = modified.n;

  // n1eps(sigma) = target, Newton on the interpolant
  double sigma = 0.0;
  double const h = n1.h(), z0 = n1.z[0];
  for (int it = 0; it < 50; ++it) {
    double const f = num::interp_uniform(n1.field, z0, h, sigma) - target;
    if (std::abs(f) <= 1e-15 * std::abs(target)) break;
    double const df = num::interp_uniform(n1.slope, z0, h, sigma);
    if (df == 0.0) {
      throw SolverError(ErrorKind::GridMismatch, "remainder: alignment failed, flat first-order profile at z = 0");
    }
    double const step = f / df;
    sigma -= step;
    if (std::abs(step) < 1e-15) break;
  }
  if (shift) *shift = sigma;
  if (sigma == 0.0) return modified;
  return {shifted(modified.n, sigma), shifted(modified.u, sigma), shifted(modified.phi, sigma)};
}

RemainderFields compute_remainder_direct(const ScaledProfile &exact, const KdvbTriple &modified, double epsilon)
{
  require(epsilon > 0.0, "remainder: epsilon must be > 0");
  RemainderFields r;
  KdvbTriple const m = align_first_order(exact, modified, epsilon, &r.shift);
  double const e2 = epsilon * epsilon;
  r.z = exact.z;
  r.epsilon = epsilon;
  r.delta = m.n.delta;
  r.n_R = (exact.n.array() - 1.0 - epsilon * m.n.field.array()) / e2;
  r.u_R = (exact.u - epsilon * m.u.field) / e2;
  r.phi_R = (exact.phi - epsilon * m.phi.field) / e2;
  r.n_R[exact.z.size() / 2] = 0.0;
  return r;
}

Vec compute_u_remainder(const Vec &n_R, const ScaledProfile &exact, const KdvbTriple &modified, double epsilon)
{
  require(epsilon > 0.0, "u remainder: epsilon must be > 0");
  require(n_R.size() == exact.n.size(), "u remainder: size mismatch");
  auto const n = exact.n.array();
  auto const N = modified.n.field.array();
  auto const U = modified.u.field.array();
  double const s = exact.s;
  return (s - epsilon * U) * n_R.array() / n + (s * N - U - epsilon * N * U) / (epsilon * n);
}

Vec remainder_coefficient(const KdvbProfile &n1)
{
  return 2.0 * (1.0 + std::sqrt(n1.T + 1.0) * n1.field.array());
}

RTerms compute_r_terms(const KdvbTriple &m,
                       const KdvbProfile &n1,
                       const Vec &n_R,
                       const Vec &phi_R,
                       double epsilon,
                       double delta,
                       double T)
{
  require(epsilon > 0.0 && delta >= 0.0, "r terms: need epsilon > 0, delta >= 0");
  Eigen::Index const sz = n_R.size();
  require(phi_R.size() == sz && m.n.field.size() == sz && m.phi.field.size() == sz && n1.field.size() == sz,
          "r terms: size mismatch");

  double const h = m.n.h(), e = epsilon, d = delta, c = std::sqrt(T + 1.0);
  double const s = c - e;
  Eigen::ArrayXd const N = m.n.field.array();
  Eigen::ArrayXd const N1 = num::d1(m.n.field, h).array();
  Eigen::ArrayXd const N2 = num::d2(m.n.field, h).array();
  Eigen::ArrayXd const P = m.phi.field.array();
  Eigen::ArrayXd const P1 = num::d1(m.phi.field, h).array();
  Eigen::ArrayXd const P2 = num::d2(m.phi.field, h).array();
  Eigen::ArrayXd const R = n_R.array();
  Eigen::ArrayXd const R1 = num::d1(n_R, h).array();
  Eigen::ArrayXd const Q = phi_R.array();
  Eigen::ArrayXd const Q1 = num::d1(phi_R, h).array();
  Eigen::ArrayXd const Q2 = num::d2(phi_R, h).array();
  Eigen::ArrayXd const n1c = n1.field.array();
  Eigen::ArrayXd const a = 1.0 + e * N; // 1 + eps n1eps
  Eigen::ArrayXd const eP = (e * P).exp();

  RTerms r;
  r.r1 = (1.0 / c + N) * N1 + d * a / (e * c) * (a * P2 - N2) - d * a.square() * P1.square() / (2 * c);

  r.r2 = (e * R / c) * (2 * c * c * (N - n1c) / e - 1.0 + 2 * (2 * c - e) * N + 3 * c * c * N.square() +
                        2 * d * a * P2 - e * d * a * P1.square()) +
         e * d * (2 * N + e * N.square()) * Q2 / c + e * R1 / c - e * d * P1 * a.square() * Q1 / c;

  r.r3 = e * (c * c * (2.0 + 3 * e * N) - s * s + e * e * d * P2 - 0.5 * d * e * e * e * P1.square()) * R.square() / c +
         c * e * e * e * R.cube() + 2 * e * e * d * a * R * Q2 / c + e * e * e * e * d * R.square() * Q2 / c -
         e * e * e * d * P1 * Q1 * (2 * R * a + e * e * R.square()) / c -
         e * e * d * Q1.square() * (a + e * e * R).square() / (2 * c);

  r.r4 = (a - eP) / (e * e);
  r.r5 = (1.0 - eP) * Q;
  // 1 - e^x + x computed without cancellation
  Eigen::ArrayXd const x = e * e * Q;
  r.r6 = eP * (-(x.unaryExpr([](double v) { return std::expm1(v); }) - x)) / (e * e);
  r.poisson_dispersion = d * P2;
  return r;
}

RemainderResidual remainder_equation_residual(const RemainderFields &rem,
                                              const RTerms &r,
                                              const KdvbProfile &n1,
                                              double T)
{
  double const h = rem.z[1] - rem.z[0], c = std::sqrt(T + 1.0), ed = rem.epsilon * rem.delta;
  Vec const A = remainder_coefficient(n1);
  Vec const dn = num::d1(rem.n_R, h);
  Vec const ddphi = num::d2(rem.phi_R, h);
  Eigen::ArrayXd const e1 = dn.array() - A.array() * rem.n_R.array() - rem.delta / c * ddphi.array() -
                            (r.r1 + r.r2 + r.r3).array();
  Eigen::ArrayXd const e2 = -ed * ddphi.array() - (rem.n_R - rem.phi_R + r.r4 + r.r5 + r.r6 + r.poisson_dispersion).array();
  Eigen::Index const N = e1.size();
  return {e1.segment(2, N - 4).abs().maxCoeff(), e2.segment(2, N - 4).abs().maxCoeff()};
}

LinearRemainder solve_linear_remainder(const KdvbProfile &n1,
                                       const Vec &h1,
                                       const Vec &h2,
                                       double epsilon,
                                       double delta)
{
  Eigen::Index const N = n1.z.size();
  require(h1.size() == N && h2.size() == N, "linear remainder: source size mismatch");
  require(N % 2 == 1, "linear remainder: node count must be odd");
  require(epsilon > 0.0 && delta >= 0.0, "linear remainder: need epsilon > 0, delta >= 0");

  double const h = n1.h(), c = std::sqrt(n1.T + 1.0), ed = epsilon * delta;
  Vec const A = remainder_coefficient(n1);
  Eigen::Index const mid = N / 2;
  auto nI = [](Eigen::Index i) { return 2 * i; };
  auto pI = [](Eigen::Index i) { return 2 * i + 1; };

  // second difference of phi at node j as a row fragment; ends borrow the
  // neighbouring interior stencil
  auto d2_row = [&](std::vector<Eigen::Triplet<double>> &t, Eigen::Index row, Eigen::Index j, double scale) {
    j = std::clamp<Eigen::Index>(j, 1, N - 2);
    t.emplace_back(row, pI(j - 1), scale / (h * h));
    t.emplace_back(row, pI(j), -2.0 * scale / (h * h));
    t.emplace_back(row, pI(j + 1), scale / (h * h));
  };

  std::vector<Eigen::Triplet<double>> t;
  t.reserve(12 * N);
  Vec b = Vec::Zero(2 * N);
  for (Eigen::Index i = 0; i + 1 < N; ++i) {
    Eigen::Index const row = 2 * i;
    double const Am = 0.5 * (A[i] + A[i + 1]);
    t.emplace_back(row, nI(i + 1), 1.0 / h - 0.5 * Am);
    t.emplace_back(row, nI(i), -1.0 / h - 0.5 * Am);
    d2_row(t, row, i, -0.5 * delta / c);
    d2_row(t, row, i + 1, -0.5 * delta / c);
    b[row] = 0.5 * (h1[i] + h1[i + 1]);
  }
  t.emplace_back(2 * (N - 1), nI(mid), 1.0);

  for (Eigen::Index i = 0; i < N; ++i) {
    Eigen::Index const row = 2 * i + 1;
    if (i == 0 || i == N - 1) {
      t.emplace_back(row, pI(i), 1.0);
      continue;
    }
    d2_row(t, row, i, -ed);
    t.emplace_back(row, nI(i), -1.0);
    t.emplace_back(row, pI(i), 1.0);
    b[row] = h2[i];
  }

  Eigen::SparseMatrix<double> M(2 * N, 2 * N);
  M.setFromTriplets(t.begin(), t.end());
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(M);
  if (lu.info() != Eigen::Success) {
    std::ostringstream msg;
    msg << "linear remainder system is singular (" << lu.lastErrorMessage() << ")";
    throw SolverError(ErrorKind::SingularSystem, msg.str());
  }
  Vec const x = lu.solve(b);
  if (!x.allFinite()) {
    std::ostringstream msg;
    msg << "linear remainder solve produced non-finite values (log|det| = " << lu.logAbsDeterminant() << ")";
    throw SolverError(ErrorKind::SingularSystem, msg.str());
  }
  LinearRemainder out;
  out.n.resize(N);
  out.phi.resize(N);
  for (Eigen::Index i = 0; i < N; ++i) {
    out.n[i] = x[nI(i)];
    out.phi[i] = x[pI(i)];
  }
  return out;
}

FixedPointResult solve_remainder_fixed_point(const ScaledProfile &exact,
                                             const KdvbTriple &modified,
                                             const KdvbProfile &n1,
                                             double epsilon,
                                             const WeightedNormSpec &spec,
                                             int max_iter,
                                             double tol)
{
  require(max_iter >= 1 && tol > 0.0, "fixed point: max_iter >= 1 and tol > 0 required");
  double shift = 0.0;
  KdvbTriple const m = align_first_order(exact, modified, epsilon, &shift);
  double const delta = m.n.delta, T = exact.T;
  Eigen::Index const N = exact.z.size();

  FixedPointResult res;
  res.fields.z = exact.z;
  res.fields.epsilon = epsilon;
  res.fields.delta = delta;
  res.fields.shift = shift;

  Vec n = Vec::Zero(N), phi = Vec::Zero(N);
  int bad = 0;
  for (int it = 1; it <= max_iter; ++it) {
    RTerms const r = compute_r_terms(m, n1, n, phi, epsilon, delta, T);
    Vec const h1 = r.r1 + r.r2 + r.r3;
    Vec const h2 = r.r4 + r.r5 + r.r6 + r.poisson_dispersion;
    LinearRemainder next = solve_linear_remainder(n1, h1, h2, epsilon, delta);
    double const inc = x_norm(exact.z, next.n - n, next.phi - phi, epsilon, delta, spec);
    n = std::move(next.n);
    phi = std::move(next.phi);
    res.iterations = it;
    if (!res.increments.empty()) {
      double const ratio = inc / res.increments.back();
      res.ratios.push_back(ratio);
      bad = ratio >= 1.0 ? bad + 1 : 0;
      if (bad >= 3) {
        std::ostringstream msg;
        msg << "remainder iteration not contracting (ratio " << ratio << " at iteration " << it << ")";
        throw SolverError(ErrorKind::NotContracting, msg.str(), res.ratios);
      }
    }
    res.increments.push_back(inc);
    if (inc < tol * x_norm(exact.z, n, phi, epsilon, delta, spec)) {
      res.converged = true;
      break;
    }
  }

  res.fields.n_R = n;
  res.fields.phi_R = phi;
  res.fields.u_R = compute_u_remainder(n, exact, m, epsilon);
  return res;
}

namespace {

double rel_spread(const std::vector<double> &v)
{
  auto const [lo, hi] = std::minmax_element(v.begin(), v.end());
  return *hi / *lo - 1.0;
}

struct Stage
{
  ScaledProfile   exact;
  KdvbTriple      modified;
  KdvbProfile     n1;
  RemainderFields direct;
};

Stage build_stage(const ValidationConfig &cfg, double epsilon, int nodes)
{
  GridSpec const grid{cfg.L, nodes};
  Stage st;
  st.exact = build_scaled_profile(ScalingParams::from_delta(epsilon, cfg.delta, cfg.mu_bar), cfg.T, grid);
  KdvbOptions ko;
  ko.grid = grid;
  st.modified = solve_kdvb_triple(cfg.T, cfg.delta, KdvbVariant::modified_for(cfg.T, epsilon), ko);
  st.n1 = solve_kdvb(cfg.T, cfg.delta, KdvbKind::N1, KdvbVariant::classic(), ko);
  st.direct = compute_remainder_direct(st.exact, st.modified, epsilon);
  return st;
}

// sup over the coarse nodes of |fine - coarse|, scaled for a 2nd-order method
double richardson(const Vec &fine, const Vec &coarse)
{
  Eigen::Index const nc = coarse.size();
  double m = 0.0;
  for (Eigen::Index i = 0; i < nc; ++i) m = std::max(m, std::abs(fine[2 * i] - coarse[i]));
  return 4.0 / 3.0 * m;
}

} // namespace

EpsilonResult validate_epsilon(const ValidationConfig &cfg, double epsilon)
{
  require(cfg.nodes % 2 == 1, "validate: node count must be odd");
  require(cfg.alpha > 0.0 && cfg.alpha < 2.0, "validate: alpha must lie in (0, 2)");
  require(cfg.k >= 2, "validate: k must be >= 2");
  Stage const st = build_stage(cfg, epsilon, cfg.nodes);
  auto const &ex = st.exact;
  auto const &rem = st.direct;
  double const e2 = epsilon * epsilon;
  WeightedNormSpec const spec{cfg.alpha, cfg.k, cfg.noise_floor};

  EpsilonResult out;
  out.epsilon = epsilon;
  out.shift = rem.shift;
  out.sup_nR = num::sup(rem.n_R);
  out.sup_uR = num::sup(rem.u_R);
  out.sup_phiR = num::sup(rem.phi_R);
  out.err_n = e2 * out.sup_nR;
  out.err_u = e2 * out.sup_uR;
  out.err_phi = e2 * out.sup_phiR;
  out.nR_at_zero = rem.n_R[rem.n_R.size() / 2];
  Eigen::Index const N = rem.n_R.size();
  out.far_field_R = std::max(std::abs(rem.n_R[0]), std::abs(rem.n_R[N - 1])) / out.sup_nR;
  out.norm_nR = weighted_hk(rem.z, rem.n_R, spec);
  out.norm_phiR = weighted_hk(rem.z, rem.phi_R, spec);
  out.x_norm = x_norm(rem.z, rem.n_R, rem.phi_R, epsilon, cfg.delta, spec);
  out.profile_residuals = scaled_profile_residuals(ex);

  double shift = 0.0;
  KdvbTriple const m = align_first_order(ex, st.modified, epsilon, &shift);
  Vec const uR = compute_u_remainder(rem.n_R, ex, m, epsilon);
  out.u_formula_gap = (uR - rem.u_R).cwiseAbs().maxCoeff();

  RTerms const r = compute_r_terms(m, st.n1, rem.n_R, rem.phi_R, epsilon, cfg.delta, cfg.T);
  out.eq_residual = remainder_equation_residual(rem, r, st.n1, cfg.T);
  WeightedNormSpec l2 = spec;
  l2.k = 0;
  double const norm_pair = std::hypot(out.norm_nR, out.norm_phiR);
  double const phi_l2 = weighted_l2(rem.z, rem.phi_R, l2);
  out.ratio_r2 = weighted_l2(rem.z, r.r2, l2) / (std::sqrt(epsilon) * norm_pair);
  out.ratio_r3 = weighted_l2(rem.z, r.r3, l2) / epsilon;
  out.ratio_r5 = weighted_l2(rem.z, r.r5, l2) / (epsilon * phi_l2);
  out.ratio_r6 = weighted_l2(rem.z, r.r6, l2) / (e2 * phi_l2 * phi_l2);

  if (cfg.fixed_point) {
    FixedPointResult const fp = solve_remainder_fixed_point(ex, st.modified, st.n1, epsilon, spec, cfg.max_iter, cfg.fp_tol);
    out.fp_converged = fp.converged;
    out.fp_iterations = fp.iterations;
    out.fp_ratios = fp.ratios;
    out.fp_increments = fp.increments;
    out.fp_gap = (fp.fields.n_R - rem.n_R).cwiseAbs().maxCoeff();

    Stage const coarse = build_stage(cfg, epsilon, cfg.nodes / 2 + 1);
    FixedPointResult const fpc =
      solve_remainder_fixed_point(coarse.exact, coarse.modified, coarse.n1, epsilon, spec, cfg.max_iter, cfg.fp_tol);
    out.err_est_direct = richardson(rem.n_R, coarse.direct.n_R);
    out.err_est_fp = richardson(fp.fields.n_R, fpc.fields.n_R);
  }
  return out;
}

DeltaSweep delta_sweep(const ValidationConfig &cfg, double epsilon, const std::vector<double> &deltas)
{
  require(!deltas.empty(), "delta sweep: empty delta list");
  DeltaSweep out;
  out.epsilon = epsilon;
  out.entries.resize(deltas.size());

  auto one = [&](double delta) {
    ValidationConfig c = cfg;
    c.delta = delta;
    DeltaEntry e;
    e.delta = delta;
    Vec R[2], RB[2];
    for (int level = 0; level < 2; ++level) {
      int const nodes = level == 0 ? cfg.nodes : cfg.nodes / 2 + 1;
      GridSpec const grid{cfg.L, nodes};
      ScaledProfile const ex = build_scaled_profile(ScalingParams::from_delta(epsilon, delta, cfg.mu_bar), cfg.T, grid);
      KdvbOptions ko;
      ko.grid = grid;
      KdvbVariant const var = KdvbVariant::modified_for(cfg.T, epsilon);
      KdvbProfile const nk = solve_kdvb(cfg.T, delta, KdvbKind::N1, var, ko);
      KdvbProfile const nb = solve_kdvb(cfg.T, 0.0, KdvbKind::N1, var, ko);
      double const e2 = epsilon * epsilon;
      R[level] = (ex.n.array() - 1.0 - epsilon * nk.field.array()) / e2;
      RB[level] = (ex.n.array() - 1.0 - epsilon * nb.field.array()) / e2;
      if (level == 0) {
        e.sup_nR = num::sup(R[0]);
        e.burgers_gap = (R[0] - RB[0]).cwiseAbs().maxCoeff();
      }
    }
    e.err_est = richardson(R[0], R[1]);
    e.err_est_burgers = richardson(RB[0], RB[1]);
    return e;
  };

  std::vector<std::future<DeltaEntry>> jobs;
  for (double d : deltas) jobs.push_back(std::async(std::launch::async, one, d));
  std::vector<double> sups;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    out.entries[i] = jobs[i].get();
    sups.push_back(out.entries[i].sup_nR);
  }
  out.spread_nR = rel_spread(sups);
  return out;
}

ValidationReport run_validation(const ValidationConfig &cfg)
{
  require(!cfg.eps_list.empty(), "validate: empty epsilon list");
  ValidationReport rep;
  rep.config = cfg;
  rep.runs.resize(cfg.eps_list.size());

  std::size_t const workers = cfg.threads > 0 ? static_cast<std::size_t>(cfg.threads) : cfg.eps_list.size();
  for (std::size_t start = 0; start < cfg.eps_list.size(); start += workers) {
    std::vector<std::future<EpsilonResult>> jobs;
    std::size_t const stop = std::min(cfg.eps_list.size(), start + workers);
    for (std::size_t i = start; i < stop; ++i) {
      jobs.push_back(std::async(std::launch::async, validate_epsilon, std::cref(cfg), cfg.eps_list[i]));
    }
    for (std::size_t i = start; i < stop; ++i) rep.runs[i] = jobs[i - start].get();
  }

  std::vector<double> sn, su, sp;
  for (std::size_t i = 0; i < rep.runs.size(); ++i) {
    auto const &a = rep.runs[i];
    sn.push_back(a.sup_nR);
    su.push_back(a.sup_uR);
    sp.push_back(a.sup_phiR);
    if (i == 0) continue;
    auto const &p = rep.runs[i - 1];
    double const er = std::log(p.epsilon / a.epsilon);
    rep.ratio_n.push_back(p.err_n / a.err_n);
    rep.ratio_u.push_back(p.err_u / a.err_u);
    rep.ratio_phi.push_back(p.err_phi / a.err_phi);
    rep.order_n.push_back(std::log(rep.ratio_n.back()) / er);
    rep.order_u.push_back(std::log(rep.ratio_u.back()) / er);
    rep.order_phi.push_back(std::log(rep.ratio_phi.back()) / er);
  }
  rep.spread_nR = rel_spread(sn);
  rep.spread_uR = rel_spread(su);
  rep.spread_phiR = rel_spread(sp);
  return rep;
}

} // namespace iashock
