#pragma once

#include "types.hpp"

#include <Eigen/Dense>

#include <array>
#include <string>

namespace iashock {

enum class KdvbKind
{
  N1,
  U1,
  Phi1
};

const char *to_string(KdvbKind kind);
KdvbKind    kdvb_kind_from_string(const std::string &name);

struct KdvbVariant
{
  bool   modified = false;
  double epsilon  = 0.0;
  double a_eps    = 0.0;

  static KdvbVariant classic() { return {}; }
  // epsilon and a_eps taken from parametrize_downstream(T, epsilon)
  static KdvbVariant modified_for(double T, double epsilon);
};

// once-integrated profile equation  c4 f'' - c3 f' + c1 f + c2 f^2 = 0
struct KdvbCoefficients
{
  double c1 = 0.0, c2 = 0.0, c3 = 0.0, c4 = 0.0;

  double far_right() const { return -c1 / c2; }
};

KdvbCoefficients kdvb_coefficients(double T, double delta, KdvbKind kind, const KdvbVariant &variant);

struct KdvbOptions
{
  GridSpec grid{30.0, 4001};
  double   newton_tol = 1e-12;
  int      max_newton = 50;
  double   far_tol    = 1e-5; // endpoint mismatch relative to |far_right|
};

struct KdvbProfile
{
  Vec              z, field, slope; // slope = d field / dz
  double           delta     = 0.0;
  double           T         = 0.0;
  double           far_left  = 0.0;
  double           far_right = 0.0;
  KdvbKind         kind      = KdvbKind::N1;
  KdvbVariant      variant;
  KdvbCoefficients coeffs;
  double           residual   = 0.0;
  int              iterations = 0;

  double h() const { return z[1] - z[0]; }
};

struct KdvbTriple
{
  KdvbProfile n, u, phi;
};

KdvbProfile solve_kdvb(double T, double delta, KdvbKind kind, const KdvbVariant &variant, const KdvbOptions &opts);
KdvbTriple  solve_kdvb_triple(double T, double delta, const KdvbVariant &variant, const KdvbOptions &opts);

// max residual of the integrated equation using 4th-order differences of
// the computed field, over nodes 2..N-3
double kdvb_equation_residual(const KdvbProfile &profile);

double kdvb_logistic_limit(double T, double z);

struct PhaseEigenvalues
{
  double minus1 = 0.0, minus2 = 0.0, plus1 = 0.0, plus2 = 0.0;
};

PhaseEigenvalues kdvb_phase_eigenvalues(double T, double delta);
// eigenvalues of the (f, f') system Jacobian at f = far, numerically
std::array<double, 2> kdvb_equilibrium_eigenvalues_numeric(const KdvbCoefficients &c, double far);
// delta at which T+1 = 8 sqrt(T+1) delta
double kdvb_discriminant_root(double T);

std::array<KdvbProfile, 2> first_order_fields(const KdvbProfile &n1);

struct CorrectionFields
{
  Vec    n2, u2, phi2;
  double sup_n2 = 0.0, sup_u2 = 0.0, sup_phi2 = 0.0;
};

CorrectionFields second_order_correction(const KdvbTriple &classic, const KdvbTriple &modified, double epsilon);

struct MonotonicityReport
{
  bool   monotone  = false;
  double overshoot = 0.0;
};

MonotonicityReport monotonicity_report(const KdvbProfile &profile);

// L2 norms of w_alpha (f - far) over the left and right half-lines
std::array<double, 2> weighted_tail_norms(const KdvbProfile &profile, double alpha);

} // namespace iashock
