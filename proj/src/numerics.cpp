#include "iashock/numerics.hpp"
#include "iashock/error.hpp"

#include <algorithm>
#include <cmath>

namespace iashock::num {

Vec d1(const Vec &f, double h)
{
  Eigen::Index const n = f.size();
  require(n >= 5, "d1 needs at least 5 nodes");
  Vec d(n);
  double const c = 1.0 / (12.0 * h);
  d[0] = c * (-25 * f[0] + 48 * f[1] - 36 * f[2] + 16 * f[3] - 3 * f[4]);
  d[1] = c * (-3 * f[0] - 10 * f[1] + 18 * f[2] - 6 * f[3] + f[4]);
  for (Eigen::Index i = 2; i < n - 2; ++i) {
    d[i] = c * (f[i - 2] - 8 * f[i - 1] + 8 * f[i + 1] - f[i + 2]);
  }
  d[n - 2] = -c * (-3 * f[n - 1] - 10 * f[n - 2] + 18 * f[n - 3] - 6 * f[n - 4] + f[n - 5]);
  d[n - 1] = -c * (-25 * f[n - 1] + 48 * f[n - 2] - 36 * f[n - 3] + 16 * f[n - 4] - 3 * f[n - 5]);
  return d;
}

Vec d2(const Vec &f, double h)
{
  Eigen::Index const n = f.size();
  require(n >= 6, "d2 needs at least 6 nodes");
  Vec d(n);
  double const c = 1.0 / (12.0 * h * h);
  d[0] = c * (45 * f[0] - 154 * f[1] + 214 * f[2] - 156 * f[3] + 61 * f[4] - 10 * f[5]);
  d[1] = c * (10 * f[0] - 15 * f[1] - 4 * f[2] + 14 * f[3] - 6 * f[4] + f[5]);
  for (Eigen::Index i = 2; i < n - 2; ++i) {
    d[i] = c * (-f[i - 2] + 16 * f[i - 1] - 30 * f[i] + 16 * f[i + 1] - f[i + 2]);
  }
  d[n - 2] = c * (10 * f[n - 1] - 15 * f[n - 2] - 4 * f[n - 3] + 14 * f[n - 4] - 6 * f[n - 5] + f[n - 6]);
  d[n - 1] = c * (45 * f[n - 1] - 154 * f[n - 2] + 214 * f[n - 3] - 156 * f[n - 4] + 61 * f[n - 5] -
                  10 * f[n - 6]);
  return d;
}

Vec d1_c2(const Vec &f, double h)
{
  Eigen::Index const n = f.size();
  require(n >= 3, "d1_c2 needs at least 3 nodes");
  Vec d(n);
  d[0] = (-3 * f[0] + 4 * f[1] - f[2]) / (2 * h);
  for (Eigen::Index i = 1; i < n - 1; ++i) d[i] = (f[i + 1] - f[i - 1]) / (2 * h);
  d[n - 1] = (3 * f[n - 1] - 4 * f[n - 2] + f[n - 3]) / (2 * h);
  return d;
}

Vec d2_c2(const Vec &f, double h)
{
  Eigen::Index const n = f.size();
  require(n >= 4, "d2_c2 needs at least 4 nodes");
  Vec d(n);
  double const c = 1.0 / (h * h);
  d[0] = c * (2 * f[0] - 5 * f[1] + 4 * f[2] - f[3]);
  for (Eigen::Index i = 1; i < n - 1; ++i) d[i] = c * (f[i + 1] - 2 * f[i] + f[i - 1]);
  d[n - 1] = c * (2 * f[n - 1] - 5 * f[n - 2] + 4 * f[n - 3] - f[n - 4]);
  return d;
}

double trapezoid(const Vec &f, double h)
{
  if (f.size() < 2) return 0.0;
  return h * (f.sum() - 0.5 * (f[0] + f[f.size() - 1]));
}

Vec cumtrapz(const Vec &f, double h)
{
  Vec c(f.size());
  if (f.size() == 0) return c;
  c[0] = 0.0;
  for (Eigen::Index i = 1; i < f.size(); ++i) c[i] = c[i - 1] + 0.5 * h * (f[i - 1] + f[i]);
  return c;
}

double sup(const Vec &f)
{
  return f.size() ? f.cwiseAbs().maxCoeff() : 0.0;
}

std::pair<double, double> linear_fit(const Vec &x, const Vec &y)
{
  require(x.size() == y.size() && x.size() >= 2, "linear_fit needs matching arrays of length >= 2");
  double const xm = x.mean(), ym = y.mean();
  double const sxy = ((x.array() - xm) * (y.array() - ym)).sum();
  double const sxx = (x.array() - xm).square().sum();
  require(sxx > 0.0, "linear_fit: degenerate abscissa");
  double const b = sxy / sxx;
  return {ym - b * xm, b};
}

void thomas(Vec sub, Vec diag, Vec sup, Vec &rhs)
{
  Eigen::Index const n = diag.size();
  for (Eigen::Index i = 1; i < n; ++i) {
    double const m = sub[i] / diag[i - 1];
    diag[i] -= m * sup[i - 1];
    rhs[i] -= m * rhs[i - 1];
  }
  rhs[n - 1] /= diag[n - 1];
  for (Eigen::Index i = n - 2; i >= 0; --i) rhs[i] = (rhs[i] - sup[i] * rhs[i + 1]) / diag[i];
}

Vec interp_cubic(const Vec &x, const Vec &f, const Vec &xq)
{
  Eigen::Index const n = x.size();
  require(n >= 4 && f.size() == n, "interp_cubic needs >= 4 matching samples");
  Vec out(xq.size());
  for (Eigen::Index q = 0; q < xq.size(); ++q) {
    double const t = xq[q];
    if (t <= x[0]) {
      out[q] = f[0];
      continue;
    }
    if (t >= x[n - 1]) {
      out[q] = f[n - 1];
      continue;
    }
    auto const it = std::upper_bound(x.data(), x.data() + n, t);
    Eigen::Index j = (it - x.data()) - 2;
    j = std::clamp<Eigen::Index>(j, 0, n - 4);
    double v = 0.0;
    for (int a = 0; a < 4; ++a) {
      double w = 1.0;
      for (int b = 0; b < 4; ++b) {
        if (b != a) w *= (t - x[j + b]) / (x[j + a] - x[j + b]);
      }
      v += w * f[j + a];
    }
    out[q] = v;
  }
  return out;
}

double interp_uniform(const Vec &f, double x0, double h, double xq)
{
  Eigen::Index const n = f.size();
  double const s = (xq - x0) / h;
  if (s <= 0.0) return f[0];
  if (s >= n - 1) return f[n - 1];
  Eigen::Index j = static_cast<Eigen::Index>(std::floor(s)) - 1;
  j = std::clamp<Eigen::Index>(j, 0, n - 4);
  double const t = s - j;
  // Lagrange weights on nodes 0..3 at position t
  double const w0 = -(t - 1) * (t - 2) * (t - 3) / 6.0;
  double const w1 = t * (t - 2) * (t - 3) / 2.0;
  double const w2 = -t * (t - 1) * (t - 3) / 2.0;
  double const w3 = t * (t - 1) * (t - 2) / 6.0;
  return w0 * f[j] + w1 * f[j + 1] + w2 * f[j + 2] + w3 * f[j + 3];
}

} // namespace iashock::num
