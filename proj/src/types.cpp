#include "iashock/types.hpp"
#include "iashock/error.hpp"

#include <cmath>

namespace iashock {

void PlasmaParams::validate() const
{
  require(T >= 0.0, "temperature T must be >= 0");
  require(mu > 0.0, "viscosity mu must be > 0");
  require(lambda > 0.0, "Debye length lambda must be > 0");
}

PlasmaParams ScalingParams::physical(double T) const
{
  return PlasmaParams{T, epsilon * mu_bar, std::sqrt(epsilon) * lambda_bar};
}

ScalingParams ScalingParams::from_delta(double epsilon, double delta, double mu_bar)
{
  return ScalingParams{epsilon, mu_bar, std::sqrt(delta) * mu_bar};
}

void ScalingParams::validate() const
{
  require(epsilon > 0.0, "epsilon must be > 0");
  require(mu_bar > 0.0, "mu_bar must be > 0");
  require(lambda_bar > 0.0, "lambda_bar must be > 0");
}

Vec GridSpec::nodes_vec() const
{
  Vec x(nodes);
  double const hh = h();
  for (int i = 0; i < nodes; ++i) x[i] = -L + i * hh;
  x[nodes - 1] = L;
  if (nodes % 2 == 1) x[nodes / 2] = 0.0;
  return x;
}

void GridSpec::validate() const
{
  require(L > 0.0, "grid half-length L must be > 0");
  require(nodes >= 9, "grid needs at least 9 nodes");
}

} // namespace iashock
