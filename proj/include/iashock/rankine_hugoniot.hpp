#pragma once

#include "types.hpp"

#include <array>

namespace iashock {

struct Downstream
{
  double           s = 0.0;
  EquilibriumState state;
  double           a_eps = 0.0;
};

double sound_speed(double T);

std::array<double, 2> rh_residual_eulerian(const EquilibriumState &left,
                                           const EquilibriumState &right,
                                           double                  s,
                                           double                  T);

// eps_max_factor bounds eps by eps_max_factor * sqrt(T+1)
Downstream parametrize_downstream(double T, double epsilon, double eps_max_factor = 0.5);

std::array<double, 2> rh_residual_lagrangian(const LagrangianEquilibrium &left,
                                             const LagrangianEquilibrium &right,
                                             double                       s,
                                             double                       T);

LagrangianEquilibrium eulerian_to_lagrangian(const EquilibriumState &state);
EquilibriumState      lagrangian_to_eulerian(const LagrangianEquilibrium &state);

EquilibriumState quasi_neutral(double n, double u);

} // namespace iashock
