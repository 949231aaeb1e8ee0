#include "iashock/approximation.hpp"
#include "iashock/energy_diagnostics.hpp"
#include "iashock/error.hpp"
#include "iashock/kdv_burgers.hpp"
#include "iashock/nsp_evolution.hpp"
#include "iashock/profile_ode.hpp"
#include "iashock/rankine_hugoniot.hpp"

#include <algorithm>
#include <chrono>
#include <cstdarg>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

using namespace iashock;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome
{
  bool        pass = false;
  std::string detail;
};

std::string fmt(const char *f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char *f, ...)
{
  char buf[1024];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

int failures = 0;

void criterion(int id, const char *title, double budget_s, const std::function<Outcome()> &body)
{
  auto const t0 = Clock::now();
  Outcome o;
  try {
    o = body();
  }
  catch (const SolverError &e) {
    o = {false, std::string("solver error: ") + e.what()};
  }
  double const dt = std::chrono::duration<double>(Clock::now() - t0).count();
  bool const in_time = dt < budget_s;
  bool const pass = o.pass && in_time;
  if (!pass) ++failures;
  std::printf("%s %2d %s: %s; runtime %.2f s (< %g s%s)\n", pass ? "PASS" : "FAIL", id, title, o.detail.c_str(), dt,
              budget_s, in_time ? "" : ", exceeded");
  std::fflush(stdout);
}

Outcome rh_exactness()
{
  double worst = 0.0;
  for (double T : {0.0, 0.5, 1.0, 3.0}) {
    for (double eps : {0.01, 0.05, 0.1, 0.15, 0.2}) {
      Downstream const d = parametrize_downstream(T, eps);
      auto const r = rh_residual_eulerian(EquilibriumState{1.0, 0.0, 0.0}, d.state, d.s, T);
      worst = std::max({worst, std::abs(r[0]), std::abs(r[1])});
    }
  }
  return {worst < 1e-12, fmt("20 pairs, max residual %.2e (< 1e-12)", worst)};
}

Outcome eigenvalues()
{
  double worst_sigma = 0.0;
  for (double T : {0.0, 0.5, 1.0, 3.0}) {
    for (double mu : {0.5, 1.0, 2.0}) {
      for (double lambda : {0.3, 1.0, 4.0}) {
        PlasmaParams const p{T, mu, lambda};
        auto const a = jacobian_eigenvalues_reference(p);
        auto const b = jacobian_eigenvalues_numeric(p);
        for (int i = 0; i < 4; ++i) worst_sigma = std::max(worst_sigma, std::abs(a[i] - b[i]));
      }
    }
  }
  double worst_lambda = 0.0;
  for (double T : {0.0, 1.0, 3.0}) {
    for (double d : {1e-3, 0.01, 0.05, 0.1}) {
      PhaseEigenvalues const q = kdvb_phase_eigenvalues(T, d);
      KdvbCoefficients const c = kdvb_coefficients(T, d, KdvbKind::N1, KdvbVariant::classic());
      auto const l = kdvb_equilibrium_eigenvalues_numeric(c, 0.0);
      auto const r = kdvb_equilibrium_eigenvalues_numeric(c, c.far_right());
      // relative to the fast eigenvalue, which is O(1/delta)
      worst_lambda = std::max({worst_lambda, std::abs(l[0] - q.minus1) / std::abs(q.minus2),
                               std::abs(l[1] - q.minus2) / std::abs(q.minus2),
                               std::abs(r[0] - q.plus1) / std::abs(q.plus2),
                               std::abs(r[1] - q.plus2) / std::abs(q.plus2)});
    }
  }
  double const s4 = jacobian_eigenvalues_reference(PlasmaParams{0.0, 1.0, 1.0})[3];
  double const s4_num = jacobian_eigenvalues_numeric(PlasmaParams{0.0, 1.0, 1.0})[3];
  bool const pass = worst_sigma < 1e-10 && worst_lambda < 1e-10 && std::abs(s4 - 0.6180339887) < 1e-9 &&
                    std::abs(s4_num - 0.6180339887) < 1e-9;
  return {pass, fmt("sigma max diff %.2e, lambda max rel diff %.2e (< 1e-10), sigma4 = %.10f / numeric %.10f "
                    "(0.6180339887 +- 1e-9)",
                    worst_sigma, worst_lambda, s4, s4_num)};
}

double logistic_error(int nodes)
{
  KdvbOptions o;
  o.grid = GridSpec{8.0, nodes};
  KdvbProfile const p = solve_kdvb(0.0, 0.0, KdvbKind::N1, KdvbVariant::classic(), o);
  double e = 0.0;
  for (Eigen::Index i = 0; i < p.z.size(); ++i) e = std::max(e, std::abs(p.field[i] - kdvb_logistic_limit(0.0, p.z[i])));
  return e;
}

Outcome logistic_oracle()
{
  double const e1 = logistic_error(4001), e2 = logistic_error(8001);
  double const r = e1 / e2;
  return {e1 <= 1e-6 && r >= 3.5 && r <= 4.5,
          fmt("L = 8: sup error %.2e at 4001 nodes (<= 1e-6), %.2e at 8001, ratio %.3f (in [3.5, 4.5])", e1, e2, r)};
}

Outcome kdvb_tails()
{
  bool pass = true;
  std::string detail;
  for (double d : {0.001, 0.01, 0.05}) {
    KdvbOptions o;
    o.grid = GridSpec{30.0, 4001};
    KdvbProfile const p = solve_kdvb(0.0, d, KdvbKind::N1, KdvbVariant::classic(), o);
    PhaseEigenvalues const ev = kdvb_phase_eigenvalues(0.0, d);
    double const left = fit_tail(p.z, p.field, p.far_left, Side::Left).rate;
    double const right = fit_tail(p.z, p.field, p.far_right, Side::Right).rate;
    double const el = std::abs(left / ev.minus1 - 1.0), er = std::abs(right / std::abs(ev.plus1) - 1.0);
    pass = pass && el < 0.05 && er < 0.05;
    detail += fmt("%sdelta %g: left %.5f vs %.5f, right %.5f vs %.5f", detail.empty() ? "" : "; ", d, left, ev.minus1,
                  right, std::abs(ev.plus1));
  }
  return {pass, detail + " (within 5%)"};
}

ProfileSolution profile_at(double eps, int nodes)
{
  PlasmaParams const p{0.0, 1.0, 1.0};
  ProfileOptions o;
  o.grid = default_profile_grid(p, eps, nodes);
  return solve_profile(p, eps, o);
}

Outcome profile_structure_check()
{
  ProfileSolution const a = profile_at(0.02, 8001);
  ProfileSolution const coarse = profile_at(0.02, 4001);
  ProfileSolution const half = profile_at(0.01, 8001);
  StructureReport const st = profile_structure(a);
  bool const mono = st.n_decreasing && st.u_decreasing && st.phi_decreasing;
  double const mass = mass_integral_residual(a);
  double const fi = first_integral_residual(coarse) / first_integral_residual(a);
  double const rate = decay_rate_estimate(a, Side::Left).rate;
  double const g0 = g_dot_zero(a.params, a.right.n);
  double const rate_half = decay_rate_estimate(half, Side::Left).rate;
  bool const pa = mono, pb = mass < 1e-8, pc = fi >= 3.5 && fi <= 4.5, pd = std::abs(rate / g0 - 1.0) <= 0.05,
             pe = std::abs(rate / rate_half / 2.0 - 1.0) <= 0.1;
  return {pa && pb && pc && pd && pe,
          fmt("(a) monotone n/u/phi %d/%d/%d %s; (b) max|u - s(1-1/n)| %.2e %s; (c) first-integral refinement ratio "
              "%.3f %s; (d) left rate %.5f vs gdot(0) %.5f, ratio %.3f %s; (e) rate ratio eps 0.02/0.01 %.4f %s",
              st.n_decreasing, st.u_decreasing, st.phi_decreasing, pa ? "ok" : "FAIL", mass, pb ? "ok" : "FAIL", fi,
              pc ? "ok" : "FAIL", rate, g0, rate / g0, pd ? "ok" : "FAIL", rate / rate_half, pe ? "ok" : "FAIL")};
}

ValidationReport const &validation()
{
  static ValidationReport const r = run_validation(ValidationConfig{});
  return r;
}

Outcome approximation_order()
{
  ValidationReport const &r = validation();
  bool pass = r.runs.size() == 3;
  std::string detail = "error ratios per halving n/u/phi:";
  for (std::size_t i = 0; i < r.ratio_n.size(); ++i) {
    for (double x : {r.ratio_n[i], r.ratio_u[i], r.ratio_phi[i]}) pass = pass && x >= 3.0 && x <= 5.0;
    detail += fmt(" %.3f/%.3f/%.3f", r.ratio_n[i], r.ratio_u[i], r.ratio_phi[i]);
  }
  for (double x : {r.spread_nR, r.spread_uR, r.spread_phiR}) pass = pass && x < 0.5;
  detail += fmt(" (in [3, 5]); sup remainder spread n/u/phi %.3f/%.3f/%.3f (< 0.5)", r.spread_nR, r.spread_uR,
                r.spread_phiR);
  return {pass, detail};
}

Outcome delta_uniformity()
{
  DeltaSweep const d = delta_sweep(ValidationConfig{}, 0.02, {1e-2, 1e-3, 1e-4});
  DeltaEntry const &last = d.entries.back();
  double const budget = last.err_est + last.err_est_burgers;
  bool const pass = d.spread_nR < 0.5 && last.burgers_gap <= budget;
  return {pass, fmt("sup|n_R| %.5f/%.5f/%.5f, spread %.3f (< 0.5); delta 1e-4 gap to Burgers expansion %.2e "
                    "(<= combined error estimate %.2e)",
                    d.entries[0].sup_nR, d.entries[1].sup_nR, d.entries[2].sup_nR, d.spread_nR, last.burgers_gap,
                    budget)};
}

Outcome remainder_cross_validation()
{
  ValidationReport const &r = validation();
  bool contracts = true, agrees = true;
  double worst_ratio = 0.0, worst_gap = 0.0, worst_budget = 0.0;
  for (auto const &e : r.runs) {
    contracts = contracts && e.fp_converged && e.fp_ratios.size() >= 2;
    for (std::size_t i = 1; i < e.fp_ratios.size(); ++i) worst_ratio = std::max(worst_ratio, e.fp_ratios[i]);
    double const budget = std::max(e.err_est_direct, e.err_est_fp);
    agrees = agrees && e.fp_gap <= budget;
    if (e.fp_gap / budget > worst_gap / std::max(worst_budget, 1e-300)) {
      worst_gap = e.fp_gap;
      worst_budget = budget;
    }
  }
  contracts = contracts && worst_ratio < 0.5;

  // manufactured n* = z e^{-z^2/4}, phi* = e^{-z^2/4}/2 for the linear problem
  double const eps = 0.02, delta = 0.01;
  double err[2];
  int k = 0;
  for (int nodes : {2001, 4001}) {
    KdvbOptions ko;
    ko.grid = GridSpec{30.0, nodes};
    KdvbProfile const n1 = solve_kdvb(0.0, delta, KdvbKind::N1, KdvbVariant::classic(), ko);
    Vec const A = remainder_coefficient(n1);
    Eigen::Index const N = n1.z.size();
    Vec n(N), phi(N), h1(N), h2(N);
    for (Eigen::Index i = 0; i < N; ++i) {
      double const z = n1.z[i], g = std::exp(-z * z / 4.0);
      double const d2p = 0.5 * (z * z / 4.0 - 0.5) * g;
      n[i] = z * g;
      phi[i] = 0.5 * g;
      h1[i] = (1.0 - z * z / 2.0) * g - A[i] * n[i] - delta * d2p;
      h2[i] = -eps * delta * d2p - n[i] + phi[i];
    }
    LinearRemainder const sol = solve_linear_remainder(n1, h1, h2, eps, delta);
    err[k++] = std::max((sol.n - n).cwiseAbs().maxCoeff(), (sol.phi - phi).cwiseAbs().maxCoeff());
  }
  double const mr = err[0] / err[1];
  bool const second = mr >= 3.5 && mr <= 4.5;
  return {contracts && agrees && second,
          fmt("max contraction ratio after the first iterate %.3f (< 0.5); worst fixed-point vs direct gap %.2e "
              "(<= estimate %.2e); manufactured error %.2e -> %.2e, ratio %.3f (in [3.5, 4.5])",
              worst_ratio, worst_gap, worst_budget, err[0], err[1], mr)};
}

Outcome stability()
{
  // one run to 2 t_end on a domain sized for it; the first half is the t_end run
  ExperimentSpec spec;
  double const t_end = spec.t_end;
  spec.t_end = 2.0 * t_end;
  Experiment const ex = prepare_experiment(spec);
  EvolveOptions o;
  o.t_end = spec.t_end;
  o.sample_every = 10.0;
  Trajectory const tr = evolve(ex.initial, ex.base, o);
  std::vector<EnergyReport> first;
  for (auto const &r : tr.samples) {
    if (r.t <= t_end * (1.0 + 1e-12)) first.push_back(r);
  }
  StabilityVerdict const v = stability_verdict(first, ex.E0);
  StabilityVerdict const vv = stability_verdict(tr.samples, ex.E0);
  double const doubling = gronwall_doubling_growth(tr.samples, ex.E0);
  double const max_mass = std::max(v.max_mass, vv.max_mass);
  bool const pa = max_mass <= 1e-10, pb = v.bounded && v.G_late_growth <= 0.05 && doubling <= 0.05,
             pc = v.terminal_ratio < 0.2, pd = std::min(v.min_margin, vv.min_margin) > 0.0;
  return {pa && pb && pc && pd && !tr.guard_hit,
          fmt("jump %.3f, E0 %.3e, %ld nodes, t_end %g; (a) max |mass| %.2e %s; (b) G max %.4f, late growth %.4f, "
              "growth when t_end doubles %.4f (<= 0.05) %s; (c) terminal/running max %.4f %s; (d) min E1 margin %.4f %s",
              ex.base.v[ex.base.v.size() - 1] - ex.base.v[0], ex.E0, static_cast<long>(ex.base.y.size()), t_end,
              max_mass, pa ? "ok" : "FAIL", v.G_max, v.G_late_growth, doubling, pb ? "ok" : "FAIL", v.terminal_ratio,
              pc ? "ok" : "FAIL", std::min(v.min_margin, vv.min_margin), pd ? "ok" : "FAIL")};
}

Outcome steady_fidelity()
{
  PlasmaParams const p{1.0, 1.0, 1.0};
  double const eps = epsilon_for_volume_jump(1.0, 0.05);
  ProfileOptions po;
  po.grid = default_profile_grid(p, eps, 8001);
  ProfileSolution const sol = solve_profile(p, eps, po);
  LagrangianProfile const prof = lagrangian_profile(sol, YGrid{-600.0, 600.0, 1201});
  SteadyStateResult const fixed = discrete_steady_state(prof);
  LagrangianState st = profile_state(prof);
  double const dt = stable_dt(st);
  for (int k = 0; k < 10000; ++k) step(st, dt);
  double const change = std::max({(st.v - prof.v).cwiseAbs().maxCoeff(), (st.u - prof.u).cwiseAbs().maxCoeff(),
                                  (st.phi - prof.phi).cwiseAbs().maxCoeff()});
  // distance from the transformed profile to the discrete fixed point
  double const d_h = fixed.distance;
  return {change < 10.0 * d_h,
          fmt("10^4 steps of dt %.4f: change %.2e, discrete steady defect %.2e (bound %.2e); rate residual %.2e",
              dt, change, d_h, 10.0 * d_h, fixed.residual_before)};
}

} // namespace

int main(int argc, char **argv)
{
  // optional list of criterion numbers to run
  std::vector<int> only;
  for (int i = 1; i < argc; ++i) only.push_back(std::atoi(argv[i]));
  auto want = [&](int id) { return only.empty() || std::find(only.begin(), only.end(), id) != only.end(); };

  if (want(1)) criterion(1, "R-H parametrization exactness", 1.0, rh_exactness);
  if (want(2)) criterion(2, "eigenvalue closed forms", 1.0, eigenvalues);
  if (want(3)) criterion(3, "delta = 0 logistic oracle", 5.0, logistic_oracle);
  if (want(4)) criterion(4, "KdV-Burgers tail rates", 30.0, kdvb_tails);
  if (want(5)) criterion(5, "full profile structure", 120.0, profile_structure_check);
  if (want(6)) criterion(6, "KdV-Burgers approximation order", 300.0, approximation_order);
  if (want(7)) criterion(7, "delta-uniformity", 300.0, delta_uniformity);
  if (want(8)) criterion(8, "remainder cross-validation", 300.0, remainder_cross_validation);
  if (want(9)) criterion(9, "nonlinear stability", 900.0, stability);
  if (want(10)) criterion(10, "steady-state fidelity", 300.0, steady_fidelity);
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
