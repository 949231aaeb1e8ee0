#pragma once

#include <Eigen/Dense>

namespace iashock {

using Vec = Eigen::VectorXd;

struct PlasmaParams
{
  double T      = 0.0;
  double mu     = 1.0;
  double lambda = 1.0;

  void validate() const;
};

struct ScalingParams
{
  double epsilon    = 0.02;
  double mu_bar     = 1.0;
  double lambda_bar = 0.1;

  double delta() const { return lambda_bar * lambda_bar / (mu_bar * mu_bar); }
  PlasmaParams physical(double T) const;
  static ScalingParams from_delta(double epsilon, double delta, double mu_bar = 1.0);
  void validate() const;
};

struct EquilibriumState
{
  double n   = 1.0;
  double u   = 0.0;
  double phi = 0.0;
};

struct LagrangianEquilibrium
{
  double v   = 1.0;
  double u   = 0.0;
  double phi = 0.0;
};

// uniform node grid on [-L, L]
struct GridSpec
{
  double L     = 100.0;
  int    nodes = 4001;

  double h() const { return 2.0 * L / (nodes - 1); }
  Vec    nodes_vec() const;
  void   validate() const;
};

} // namespace iashock
