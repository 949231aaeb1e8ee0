#include "iashock/energy_diagnostics.hpp"
#include "iashock/error.hpp"
#include "iashock/numerics.hpp"

#include <algorithm>
#include <cmath>

namespace iashock {

namespace {

void check_grids(const LagrangianState &st, const LagrangianProfile &base)
{
  if (st.y.size() != base.y.size()) {
    throw SolverError(ErrorKind::GridMismatch, "energy diagnostics: state and base profile grids differ");
  }
}

double l2sq(const Vec &f, double h)
{
  return num::trapezoid(f.array().square().matrix(), h);
}

// sum_{i<=k} ||f^(i)||^2
double hksq(const Vec &f, int k, double h)
{
  double s = l2sq(f, h);
  if (k >= 1) s += l2sq(num::d1(f, h), h);
  if (k >= 2) s += l2sq(num::d2(f, h), h);
  return s;
}

} // namespace

Vec volume_deviation(const LagrangianState &st, const LagrangianProfile &base)
{
  check_grids(st, base);
  Vec d = st.v - base.v;
  if (st.v_lo.size() == d.size()) d += st.v_lo;
  return d;
}

Antiderivatives antiderivatives(const LagrangianState &st, const LagrangianProfile &base)
{
  check_grids(st, base);
  double const h = st.h();
  Antiderivatives a;
  a.Phi = num::cumtrapz(volume_deviation(st, base), h);
  a.Psi = num::cumtrapz(st.u - base.u, h);
  a.leak_Phi = std::abs(a.Phi[a.Phi.size() - 1]);
  a.leak_Psi = std::abs(a.Psi[a.Psi.size() - 1]);
  return a;
}

double energy_E(const LagrangianState &st, const LagrangianProfile &base)
{
  Antiderivatives const a = antiderivatives(st, base);
  double const h = st.h();
  return hksq(a.Phi, 2, h) + hksq(a.Psi, 2, h) + hksq(st.phi - base.phi, 2, h);
}

double dissipation_D(const LagrangianState &st, const LagrangianProfile &base)
{
  Antiderivatives const a = antiderivatives(st, base);
  double const h = st.h();
  Vec const vy = num::d1(base.v, h);
  Vec const wgt = (st.s * base.v.array() * vy.array()).max(0.0);
  double d = num::trapezoid((wgt.array() * a.Psi.array().square()).matrix(), h);
  d += hksq(volume_deviation(st, base), 1, h);
  d += hksq(st.phi_t, 1, h);
  d += hksq(st.u - base.u, 2, h);
  d += hksq(st.phi - base.phi, 2, h);
  return d;
}

E1Result energy_E1(const LagrangianState &st, const LagrangianProfile &base)
{
  Antiderivatives const a = antiderivatives(st, base);
  double const h = st.h(), l2 = st.params.lambda * st.params.lambda, T = st.params.T;
  Vec const pt = st.phi - base.phi;
  Vec const pty = num::d1(pt, h);
  auto const vb = base.v.array();
  Eigen::ArrayXd const emb = (-base.phi.array()).exp();
  Eigen::ArrayXd const integrand = vb.square() * a.Psi.array().square() / 2 + l2 * vb * pt.array().square() / 2 +
                                   (T + 1) * a.Phi.array().square() / 2 +
                                   l2 * l2 * emb * pty.array().square() / (2 * vb) - l2 * pty.array() * a.Phi.array();
  E1Result r;
  r.value = num::trapezoid(integrand.matrix(), h);
  // smallest eigenvalue of [[(T+1)/2, -l2/2], [-l2/2, l2^2 e^-phibar / (2 vbar)]]
  double const aa = (T + 1) / 2, b = -l2 / 2;
  Eigen::ArrayXd const dd = l2 * l2 * emb / (2 * vb);
  Eigen::ArrayXd const lam = (aa + dd) / 2 - (((aa - dd) / 2).square() + b * b).sqrt();
  r.margin = lam.minCoeff();
  return r;
}

double initial_energy(const LagrangianState &st, const LagrangianProfile &base)
{
  Antiderivatives const a = antiderivatives(st, base);
  double const h = st.h();
  return hksq(volume_deviation(st, base), 1, h) + hksq(st.u - base.u, 1, h) + l2sq(a.Phi, h) + l2sq(a.Psi, h);
}

EnergyReport energy_report(const LagrangianState &st, const LagrangianProfile &base)
{
  check_grids(st, base);
  Antiderivatives const a = antiderivatives(st, base);
  double const h = st.h();
  EnergyReport r;
  r.t = st.t;
  r.E = energy_E(st, base);
  r.D = dissipation_D(st, base);
  E1Result const e1 = energy_E1(st, base);
  r.E1 = e1.value;
  r.E1_margin = e1.margin;
  Vec const dv = volume_deviation(st, base), du = st.u - base.u;
  r.sup_v = num::sup(dv);
  r.sup_u = num::sup(du);
  r.sup_phi = num::sup(st.phi - base.phi);
  r.sup_perturbation = std::max({r.sup_v, r.sup_u, r.sup_phi});
  r.mass_v = dv.sum() * h;
  r.mass_u = du.sum() * h;
  r.leak_Phi = a.leak_Phi;
  r.leak_Psi = a.leak_Psi;
  return r;
}

std::vector<double> gronwall_ratio(const std::vector<EnergyReport> &s, double E0)
{
  require(E0 > 0.0, "gronwall_ratio: E0 must be > 0");
  std::vector<double> g(s.size());
  double integral = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i > 0) integral += 0.5 * (s[i].D + s[i - 1].D) * (s[i].t - s[i - 1].t);
    g[i] = (s[i].E + integral) / E0;
  }
  return g;
}

double gronwall_doubling_growth(const std::vector<EnergyReport> &s, double E0)
{
  require(s.size() >= 2, "gronwall_doubling_growth: need at least two samples");
  std::vector<double> const g = gronwall_ratio(s, E0);
  double const t_half = s.front().t + 0.5 * (s.back().t - s.front().t);
  double half = g.front(), full = g.front();
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (s[i].t <= t_half * (1.0 + 1e-12)) half = std::max(half, g[i]);
    full = std::max(full, g[i]);
  }
  return half > 0.0 ? full / half - 1.0 : 0.0;
}

StabilityVerdict stability_verdict(const std::vector<EnergyReport> &s,
                                   double E0,
                                   double transient_fraction,
                                   double g_bound,
                                   double late_tol)
{
  require(!s.empty(), "stability_verdict: empty trajectory");
  StabilityVerdict v;
  v.E0 = E0;
  v.min_margin = s.front().E1_margin;
  for (auto const &r : s) {
    v.running_max = std::max(v.running_max, r.sup_perturbation);
    v.max_mass = std::max({v.max_mass, std::abs(r.mass_v), std::abs(r.mass_u)});
    v.max_leak = std::max({v.max_leak, r.leak_Phi, r.leak_Psi});
    v.min_margin = std::min(v.min_margin, r.E1_margin);
  }
  v.terminal = s.back().sup_perturbation;
  v.terminal_ratio = v.running_max > 0.0 ? v.terminal / v.running_max : 0.0;
  if (E0 == 0.0) {
    v.bounded = true;
    v.pass = true;
    return v;
  }

  std::vector<double> const g = gronwall_ratio(s, E0);
  for (std::size_t i = 0; i < s.size(); ++i) v.sup_E_ratio = std::max(v.sup_E_ratio, s[i].E / E0);
  v.G_max = *std::max_element(g.begin(), g.end());
  v.G_final = g.back();
  v.bounded = std::isfinite(v.G_max) && v.G_max < g_bound;

  // after the transient G should not trend upwards
  double const t_end = s.back().t, t_w = s.front().t + transient_fraction * (t_end - s.front().t);
  std::size_t i0 = 0;
  while (i0 + 1 < s.size() && s[i0].t < t_w) ++i0;
  double const g_ref = g[i0];
  double g_hi = g_ref;
  for (std::size_t i = i0; i < g.size(); ++i) g_hi = std::max(g_hi, g[i]);
  v.G_late_growth = g_ref > 0.0 ? g_hi / g_ref - 1.0 : 0.0;

  v.pass = v.bounded && v.G_late_growth <= late_tol && v.terminal_ratio < 0.2;
  return v;
}

} // namespace iashock
