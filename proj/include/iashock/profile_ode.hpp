#pragma once

#include "rankine_hugoniot.hpp"
#include "types.hpp"

#include <Eigen/Dense>

#include <array>
#include <complex>
#include <vector>

namespace iashock {

struct ProfileState
{
  double n = 1.0;
  double Z = 1.0; // e^phi
  double W = 0.0; // dphi/dxi
};

// right-hand side of the (n, Z, W) system; Scalar may be complex for
// complex-step Jacobians
template <typename Scalar>
std::array<Scalar, 3> profile_rhs_t(Scalar n, Scalar Z, Scalar W, const PlasmaParams &p, Scalar s)
{
  Scalar const nm1 = n - 1.0;
  Scalar const bracket =
    (p.T - s * s) * nm1 + s * s * nm1 * nm1 / n - 0.5 * p.lambda * p.lambda * W * W + Z - 1.0;
  return {n * n / (p.mu * s) * bracket, Z * W, -(n - Z) / (p.lambda * p.lambda)};
}

std::array<double, 3> profile_rhs(const ProfileState &state, const PlasmaParams &params, double s);

// Jacobian of the 4-field system (n, Z, W, tau) with tau' = 0, by complex step
Eigen::Matrix4d extended_jacobian(const PlasmaParams &params, const ProfileState &state, double tau);
// Jacobian of the 3-field system at fixed speed s, by complex step
Eigen::Matrix3d profile_jacobian(const PlasmaParams &params, const ProfileState &state, double s);

// closed-form (sigma1, sigma2, sigma3, sigma4) at (U-, sqrt(T+1))
std::array<double, 4> jacobian_eigenvalues_reference(const PlasmaParams &params);
// sorted real parts of the numerically diagonalized extended Jacobian
std::array<double, 4> jacobian_eigenvalues_numeric(const PlasmaParams &params);

double g_dot_zero(const PlasmaParams &params, double n_plus);

enum class Side
{
  Left,
  Right
};

// decay rate of the slow eigen-direction at the far field on the given side:
// smallest positive eigenvalue at U- (left) or |largest negative| at U+ (right)
double linearized_tail_rate(const PlasmaParams &params, double s, const EquilibriumState &state, Side side);

struct ProfileOptions
{
  GridSpec grid;
  double   newton_tol     = 1e-10; // on the update max-norm
  int      max_newton     = 50;
  int      max_halvings   = 4; // continuation depth in epsilon
  double   eps_max_factor = 0.5;
  double   domain_tol     = 1e-8; // endpoint distance to the far fields / amplitude
};

struct ProfileSolution
{
  Vec                 xi, n, u, phi;
  double              s       = 0.0;
  double              epsilon = 0.0;
  EquilibriumState    left, right;
  PlasmaParams        params;
  double              residual_norm     = 0.0;
  int                 newton_iterations = 0;
  std::vector<double> update_history;
  double              endpoint_mismatch = 0.0;

  double h() const { return xi[1] - xi[0]; }
  Eigen::Index size() const { return xi.size(); }
};

// L = L_factor / g_dot_zero
GridSpec default_profile_grid(const PlasmaParams &params, double epsilon, int nodes = 4001, double L_factor = 40.0);

ProfileSolution solve_profile(const PlasmaParams &params, double epsilon, const ProfileOptions &opts);

// max |u - s(1 - 1/n)|
double mass_integral_residual(const ProfileSolution &sol);
// max over nodes 2..N-3 of the integrated momentum equation residual
double first_integral_residual(const ProfileSolution &sol);
Vec    first_integral_residual_field(const ProfileSolution &sol);

struct DecayFit
{
  double rate      = 0.0;
  double intercept = 0.0;
  int    points    = 0;
};

// fit of log|f - far| against x over nodes with lo < |f - far| < hi on one side
DecayFit fit_tail(const Vec &x, const Vec &f, double far, Side side, double lo = 1e-9, double hi = 1e-3);
DecayFit decay_rate_estimate(const ProfileSolution &sol, Side side, double lo = 1e-9, double hi = 1e-3);

struct StructureReport
{
  bool   n_decreasing   = false;
  bool   u_decreasing   = false;
  bool   phi_decreasing = false;
  double C_lower        = 0.0; // min phi'/n'
  double C_upper        = 0.0; // max phi'/n'
};

// strict node-to-node decrease, ignoring pairs saturated at a far field
bool strictly_decreasing(const Vec &f, double far_left, double far_right);
StructureReport profile_structure(const ProfileSolution &sol);

} // namespace iashock
