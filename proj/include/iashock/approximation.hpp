#pragma once

#include "kdv_burgers.hpp"
#include "profile_ode.hpp"
#include "types.hpp"
#include "weighted_norm.hpp"

#include <vector>

namespace iashock {

struct ScaledProfile
{
  Vec           z, n, u, phi;
  double        s = 0.0;
  double        T = 0.0;
  ScalingParams scaling;
  int           newton_iterations = 0;

  double h() const { return z[1] - z[0]; }
};

// profile at mu = eps mu_bar, lambda = sqrt(eps) lambda_bar on z = xi / mu_bar
ScaledProfile build_scaled_profile(const ScalingParams &scaling, double T, const GridSpec &zgrid);

struct ScaledResiduals
{
  double u_identity = 0.0; // max |u - s(n-1)/n|
  double poisson    = 0.0; // max |-eps delta phi'' - (n - e^phi)|
  double momentum   = 0.0; // integrated momentum equation
};

ScaledResiduals scaled_profile_residuals(const ScaledProfile &profile);

struct RemainderFields
{
  Vec    z, n_R, u_R, phi_R;
  double epsilon = 0.0;
  double delta   = 0.0;
  double shift   = 0.0; // translation applied to the modified first order
};

// modified first-order fields after the alignment shift, on the exact grid
KdvbTriple align_first_order(const ScaledProfile &exact, const KdvbTriple &modified, double epsilon, double *shift);

RemainderFields compute_remainder_direct(const ScaledProfile &exact, const KdvbTriple &modified, double epsilon);

Vec compute_u_remainder(const Vec &n_R, const ScaledProfile &exact, const KdvbTriple &modified, double epsilon);

struct RTerms
{
  Vec r1, r2, r3, r4, r5, r6;
  // delta * phi_{1,eps}'' left over in the Poisson remainder equation
  Vec poisson_dispersion;
};

RTerms compute_r_terms(const KdvbTriple &modified,
                       const KdvbProfile &n1,
                       const Vec &n_R,
                       const Vec &phi_R,
                       double epsilon,
                       double delta,
                       double T);

// A(z) = 2 (1 + sqrt(T+1) n1(z))
Vec remainder_coefficient(const KdvbProfile &n1);

struct RemainderResidual
{
  double first  = 0.0;
  double second = 0.0;
};

RemainderResidual remainder_equation_residual(const RemainderFields &rem,
                                              const RTerms &r,
                                              const KdvbProfile &n1,
                                              double T);

struct LinearRemainder
{
  Vec n, phi;
};

// n' = A n + delta/sqrt(T+1) phi'' + h1,  -eps delta phi'' = n - phi + h2,
// n(0) = 0, phi = 0 at both ends
LinearRemainder solve_linear_remainder(const KdvbProfile &n1,
                                       const Vec &h1,
                                       const Vec &h2,
                                       double epsilon,
                                       double delta);

struct FixedPointResult
{
  RemainderFields     fields;
  std::vector<double> increments; // X-norm of U_{i+1} - U_i
  std::vector<double> ratios;
  int                 iterations = 0;
  bool                converged  = false;
};

FixedPointResult solve_remainder_fixed_point(const ScaledProfile &exact,
                                             const KdvbTriple &modified,
                                             const KdvbProfile &n1,
                                             double epsilon,
                                             const WeightedNormSpec &spec,
                                             int max_iter = 40,
                                             double tol = 1e-9); // relative to ||U||_X

struct ValidationConfig
{
  double              T     = 0.0;
  double              delta = 0.01;
  std::vector<double> eps_list{0.04, 0.02, 0.01};
  double              mu_bar      = 1.0;
  double              alpha       = 1.0;
  int                 k           = 2;
  double              L           = 60.0;
  int                 nodes       = 8001;
  double              noise_floor = 1e-10;
  bool                fixed_point = true;
  int                 max_iter    = 40;
  double              fp_tol      = 1e-9;
  int                 threads     = 0; // 0: one per epsilon
};

struct EpsilonResult
{
  double epsilon = 0.0;
  // sup |n_eps - 1 - eps n1eps| and analogues
  double err_n = 0.0, err_u = 0.0, err_phi = 0.0;
  double sup_nR = 0.0, sup_uR = 0.0, sup_phiR = 0.0;
  double nR_at_zero  = 0.0;
  double far_field_R = 0.0; // max endpoint |n_R| / sup|n_R|
  double norm_nR = 0.0, norm_phiR = 0.0, x_norm = 0.0;
  double u_formula_gap = 0.0;
  double shift         = 0.0;
  double ratio_r2 = 0.0, ratio_r3 = 0.0, ratio_r5 = 0.0, ratio_r6 = 0.0;
  RemainderResidual eq_residual;
  ScaledResiduals   profile_residuals;
  // fixed point
  bool                fp_converged = false;
  int                 fp_iterations = 0;
  std::vector<double> fp_ratios;
  std::vector<double> fp_increments;
  double              fp_gap = 0.0; // sup |n_R(fp) - n_R(direct)|
  // Richardson estimates from a half-resolution rerun
  double err_est_direct = 0.0, err_est_fp = 0.0;
};

struct ValidationReport
{
  ValidationConfig           config;
  std::vector<EpsilonResult> runs;
  // log2 of error ratios between consecutive epsilons
  std::vector<double> order_n, order_u, order_phi;
  std::vector<double> ratio_n, ratio_u, ratio_phi;
  double              spread_nR = 0.0, spread_uR = 0.0, spread_phiR = 0.0; // max/min - 1
};

struct DeltaEntry
{
  double delta  = 0.0;
  double sup_nR = 0.0;
  // sup |n1eps(delta) - n1eps(0)| / eps: distance between the KdV-Burgers and
  // Burgers based remainders
  double burgers_gap = 0.0;
  // Richardson estimates for the two remainders
  double err_est = 0.0, err_est_burgers = 0.0;
};

struct DeltaSweep
{
  double                  epsilon = 0.0;
  std::vector<DeltaEntry> entries;
  double                  spread_nR = 0.0;
};

// fixed eps, remainder against the KdV-Burgers first order for each delta and
// against the delta = 0 (Burgers) first order
DeltaSweep delta_sweep(const ValidationConfig &config, double epsilon, const std::vector<double> &deltas);

EpsilonResult    validate_epsilon(const ValidationConfig &config, double epsilon);
ValidationReport run_validation(const ValidationConfig &config);

} // namespace iashock
