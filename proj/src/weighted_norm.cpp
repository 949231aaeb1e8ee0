#include "iashock/weighted_norm.hpp"
#include "iashock/error.hpp"
#include "iashock/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace iashock {

double weight(double alpha, double z)
{
  return std::exp(alpha * std::sqrt(1.0 + z * z));
}

namespace {

Vec derivative(const Vec &f, int order, double h)
{
  if (order == 0) return f;
  if (order == 1) return num::d1(f, h);
  if (order == 2) return num::d2(f, h);
  Vec g = num::d2(f, h);
  for (int o = 2; o + 2 <= order; o += 2) g = num::d2(g, h);
  if (order % 2 == 1) g = num::d1(g, h);
  return g;
}

struct Core
{
  Eigen::Index lo = 0, hi = 0; // inclusive signal range
  double       rate_lo = 0.0, rate_hi = 0.0;
};

// fitted decay rate of log|f| over up to 20 nodes inward from index i
double edge_rate(const Vec &z, const Vec &f, Eigen::Index i, int dir)
{
  std::vector<double> xs, ys;
  for (int k = 0; k < 20; ++k) {
    Eigen::Index const j = i + dir * k;
    if (j < 0 || j >= f.size()) break;
    double const a = std::abs(f[j]);
    if (!(a > 0.0)) break;
    xs.push_back(z[j]);
    ys.push_back(std::log(a));
  }
  if (xs.size() < 5) return 0.0;
  Vec const X = Eigen::Map<const Vec>(xs.data(), xs.size());
  Vec const Y = Eigen::Map<const Vec>(ys.data(), ys.size());
  double const slope = num::linear_fit(X, Y).second;
  // positive when |f| decays outward from the core
  return dir > 0 ? slope : -slope;
}

Core find_core(const Vec &z, const Vec &f, double floor)
{
  Core c;
  Eigen::Index const N = f.size();
  c.lo = 0;
  c.hi = N - 1;
  if (floor > 0.0) {
    double const tau = floor * num::sup(f);
    while (c.lo < N - 1 && std::abs(f[c.lo]) < tau) ++c.lo;
    while (c.hi > c.lo && std::abs(f[c.hi]) < tau) --c.hi;
  }
  c.rate_lo = edge_rate(z, f, c.lo, +1);
  c.rate_hi = edge_rate(z, f, c.hi, -1);
  return c;
}

double tail_piece(double alpha, double z, double value, double rate)
{
  double const w = weight(alpha, z) * value;
  if (w == 0.0) return 0.0;
  if (rate <= alpha) return std::numeric_limits<double>::infinity();
  return w * w / (2.0 * (rate - alpha));
}

double core_sq(const Vec &z, const Vec &g, const Core &c, double alpha)
{
  Eigen::Index const n = c.hi - c.lo + 1;
  if (n < 2) return 0.0;
  Vec w(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double const v = weight(alpha, z[c.lo + i]) * g[c.lo + i];
    w[i] = v * v;
  }
  return num::trapezoid(w, z[1] - z[0]);
}

} // namespace

WeightedNormDetail weighted_hk_detail(const Vec &z, const Vec &f, const WeightedNormSpec &spec)
{
  require(z.size() == f.size() && z.size() >= 8, "weighted norm: need matching arrays of length >= 8");
  require(spec.alpha >= 0.0 && spec.k >= 0, "weighted norm: alpha >= 0 and k >= 0 required");
  WeightedNormDetail d;
  if (num::sup(f) == 0.0) return d;
  double const h = z[1] - z[0];
  Core const c = find_core(z, f, spec.noise_floor);
  d.decay_rate = std::min(c.rate_lo, c.rate_hi);
  double total = 0.0;
  for (int i = 0; i <= spec.k; ++i) {
    Vec const g = derivative(f, i, h);
    total += core_sq(z, g, c, spec.alpha);
    // derivatives of an exponential tail scale with rate^i
    double const tl = tail_piece(spec.alpha, z[c.lo], f[c.lo] * std::pow(c.rate_lo, i), c.rate_lo);
    double const tr = tail_piece(spec.alpha, z[c.hi], f[c.hi] * std::pow(c.rate_hi, i), c.rate_hi);
    if (!std::isfinite(tl) || !std::isfinite(tr)) {
      d.tail_finite = false;
      continue;
    }
    d.tail += tl + tr;
  }
  total += d.tail;
  d.value = std::sqrt(total);
  return d;
}

double weighted_hk(const Vec &z, const Vec &f, const WeightedNormSpec &spec)
{
  return weighted_hk_detail(z, f, spec).value;
}

double weighted_l2(const Vec &z, const Vec &f, const WeightedNormSpec &spec)
{
  WeightedNormSpec s = spec;
  s.k = 0;
  return weighted_hk(z, f, s);
}

double weighted_derivative_norm(const Vec &z, const Vec &f, int order, const WeightedNormSpec &spec)
{
  require(z.size() == f.size() && z.size() >= 8, "weighted norm: need matching arrays of length >= 8");
  if (num::sup(f) == 0.0) return 0.0;
  double const h = z[1] - z[0];
  Core const c = find_core(z, f, spec.noise_floor);
  Vec const g = derivative(f, order, h);
  double total = core_sq(z, g, c, spec.alpha);
  double const tl = tail_piece(spec.alpha, z[c.lo], f[c.lo] * std::pow(c.rate_lo, order), c.rate_lo);
  double const tr = tail_piece(spec.alpha, z[c.hi], f[c.hi] * std::pow(c.rate_hi, order), c.rate_hi);
  if (std::isfinite(tl) && std::isfinite(tr)) total += tl + tr;
  return std::sqrt(total);
}

double x_norm(const Vec &z, const Vec &n, const Vec &phi, double epsilon, double delta, const WeightedNormSpec &spec)
{
  double const nn = weighted_hk(z, n, spec);
  double const np = weighted_hk(z, phi, spec);
  double const ed = epsilon * delta;
  return std::sqrt(nn * nn + np * np) + std::sqrt(ed) * weighted_derivative_norm(z, phi, spec.k + 1, spec) +
         ed * weighted_derivative_norm(z, phi, spec.k + 2, spec);
}

} // namespace iashock
