#include "iashock/rankine_hugoniot.hpp"
#include "iashock/error.hpp"

#include <cmath>
#include <sstream>

namespace iashock {

double sound_speed(double T)
{
  require(T >= 0.0, "sound_speed: T must be >= 0");
  return std::sqrt(T + 1.0);
}

std::array<double, 2> rh_residual_eulerian(const EquilibriumState &left,
                                           const EquilibriumState &right,
                                           double                  s,
                                           double                  T)
{
  double const nl = left.n, ul = left.u, nr = right.n, ur = right.u;
  double const mass = -s * (nr - nl) + nr * ur - nl * ul;
  double const mom  = -s * (nr * ur - nl * ul) + nr * ur * ur - nl * ul * ul + (T + 1.0) * (nr - nl);
  return {mass, mom};
}

Downstream parametrize_downstream(double T, double epsilon, double eps_max_factor)
{
  double const c = sound_speed(T);
  if (!(epsilon > 0.0) || epsilon > eps_max_factor * c || epsilon >= c) {
    std::ostringstream msg;
    msg << "epsilon = " << epsilon << " outside (0, " << eps_max_factor << "*sqrt(T+1)]";
    throw SolverError(ErrorKind::InvalidArgument, msg.str());
  }
  Downstream d;
  d.s = c - epsilon;
  double const np = d.s * d.s / (T + 1.0);
  d.state = quasi_neutral(np, d.s * (1.0 - 1.0 / np));
  // log(s^2/(T+1))/eps + 2/c, evaluated without cancellation
  d.a_eps = 2.0 * std::log1p(-epsilon / c) / epsilon + 2.0 / c;
  return d;
}

std::array<double, 2> rh_residual_lagrangian(const LagrangianEquilibrium &left,
                                             const LagrangianEquilibrium &right,
                                             double                       s,
                                             double                       T)
{
  double const mass = -s * (right.v - left.v) - (right.u - left.u);
  double const mom  = -s * (right.u - left.u) + (T + 1.0) * (1.0 / right.v - 1.0 / left.v);
  return {mass, mom};
}

LagrangianEquilibrium eulerian_to_lagrangian(const EquilibriumState &state)
{
  require(state.n > 0.0, "eulerian_to_lagrangian: n must be > 0");
  return {1.0 / state.n, state.u, state.phi};
}

EquilibriumState lagrangian_to_eulerian(const LagrangianEquilibrium &state)
{
  require(state.v > 0.0, "lagrangian_to_eulerian: v must be > 0");
  return {1.0 / state.v, state.u, state.phi};
}

EquilibriumState quasi_neutral(double n, double u)
{
  require(n > 0.0, "quasi_neutral: n must be > 0");
  return {n, u, std::log(n)};
}

} // namespace iashock
