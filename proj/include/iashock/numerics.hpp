#pragma once

#include "types.hpp"

#include <utility>

namespace iashock::num {

// 4th-order finite differences, one-sided near the ends
Vec d1(const Vec &f, double h);
Vec d2(const Vec &f, double h);

// 2nd-order centred differences, one-sided 2nd order at the ends
Vec d1_c2(const Vec &f, double h);
Vec d2_c2(const Vec &f, double h);

double trapezoid(const Vec &f, double h);
Vec    cumtrapz(const Vec &f, double h);

double sup(const Vec &f);

// least-squares fit y = a + b x, returns {a, b}
std::pair<double, double> linear_fit(const Vec &x, const Vec &y);

// solves a tridiagonal system in place; sub[0] and sup[n-1] are ignored
void thomas(Vec sub, Vec diag, Vec sup, Vec &rhs);

// cubic Lagrange interpolation from a strictly increasing, possibly
// non-uniform abscissa; values outside the range are clamped to the ends
Vec interp_cubic(const Vec &x, const Vec &f, const Vec &xq);

// interpolation from a uniform grid with first node x0 and spacing h
double interp_uniform(const Vec &f, double x0, double h, double xq);

} // namespace iashock::num
