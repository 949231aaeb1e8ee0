#pragma once

#include "types.hpp"

namespace iashock {

// uniform node grid on [y_min, y_max]
struct YGrid
{
  double y_min = -400.0;
  double y_max = 400.0;
  int    nodes = 801;

  double h() const { return (y_max - y_min) / (nodes - 1); }
  Vec    nodes_vec() const;
  void   validate() const;
};

// shock profile in Lagrangian mass coordinates, frame y = x - s t
struct LagrangianProfile
{
  Vec                   y, v, u, phi;
  double                s = 0.0;
  PlasmaParams          params;
  LagrangianEquilibrium left, right;

  double h() const { return y[1] - y[0]; }
};

struct LagrangianState
{
  Vec                   y, v, u, phi;
  Vec                   phi_t; // backward difference over the last step
  // low-order part of v kept by the compensated update; empty means zero.
  // without it increments below half an ulp of v are rounded away and the
  // discrete mass drifts once the perturbation has spread out
  Vec                   v_lo;
  double                t = 0.0;
  double                s = 0.0;
  PlasmaParams          params;
  LagrangianEquilibrium left, right;

  double h() const { return y[1] - y[0]; }
};

} // namespace iashock
