#pragma once

#include "types.hpp"

namespace iashock {

struct WeightedNormSpec
{
  double alpha = 1.0;
  int    k     = 2;
  // nodes where |f| < noise_floor * sup|f| beyond the last signal node are
  // replaced by an exponential tail with the fitted decay rate; 0 keeps all
  double noise_floor = 0.0;
};

double weight(double alpha, double z);

struct WeightedNormDetail
{
  double value      = 0.0;
  double tail       = 0.0; // analytic tail contribution to value^2
  double decay_rate = 0.0; // fitted at the cut, max of both sides' minimum
  bool   tail_finite = true;
};

// sqrt(sum_{i<=k} ||w_alpha f^(i)||^2) on a uniform grid, trapezoidal
// quadrature, 4th-order differences
WeightedNormDetail weighted_hk_detail(const Vec &z, const Vec &f, const WeightedNormSpec &spec);
double             weighted_hk(const Vec &z, const Vec &f, const WeightedNormSpec &spec);
// k = 0 shorthand
double weighted_l2(const Vec &z, const Vec &f, const WeightedNormSpec &spec);
// ||w f^(order)||, only the single derivative order
double weighted_derivative_norm(const Vec &z, const Vec &f, int order, const WeightedNormSpec &spec);

// ||[n,phi]||_{H^k_a} + sqrt(eps delta) ||w phi^(k+1)|| + eps delta ||w phi^(k+2)||
double x_norm(const Vec &z, const Vec &n, const Vec &phi, double epsilon, double delta, const WeightedNormSpec &spec);

} // namespace iashock
