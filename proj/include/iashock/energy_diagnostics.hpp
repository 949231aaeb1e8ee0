#pragma once

#include "lagrangian.hpp"

#include <vector>

namespace iashock {

struct Antiderivatives
{
  Vec    Phi, Psi;
  double leak_Phi = 0.0; // |Phi| at the right end
  double leak_Psi = 0.0;
};

// v - vbar including the carried low-order part of v
Vec volume_deviation(const LagrangianState &state, const LagrangianProfile &base);

// cumulative trapezoid of v - vbar and u - ubar from the left end
Antiderivatives antiderivatives(const LagrangianState &state, const LagrangianProfile &base);

// ||Phi||_{H^2}^2 + ||Psi||_{H^2}^2 + ||phi - phibar||_{H^2}^2
double energy_E(const LagrangianState &state, const LagrangianProfile &base);

// uses state.phi_t for the time derivative of the potential
double dissipation_D(const LagrangianState &state, const LagrangianProfile &base);

struct E1Result
{
  double value  = 0.0;
  double margin = 0.0; // min over nodes of the smallest eigenvalue of the (Phi, phi_y) form
};

E1Result energy_E1(const LagrangianState &state, const LagrangianProfile &base);

// ||[v0 - vbar, u0 - ubar]||_{H^1}^2 + ||[Phi0, Psi0]||^2
double initial_energy(const LagrangianState &state, const LagrangianProfile &base);

struct EnergyReport
{
  double t         = 0.0;
  double E         = 0.0;
  double D         = 0.0;
  double E1        = 0.0;
  double E1_margin = 0.0;
  double sup_v = 0.0, sup_u = 0.0, sup_phi = 0.0;
  double sup_perturbation = 0.0; // max of the three
  double mass_v = 0.0, mass_u = 0.0;
  double leak_Phi = 0.0, leak_Psi = 0.0;
};

EnergyReport energy_report(const LagrangianState &state, const LagrangianProfile &base);

struct StabilityVerdict
{
  double E0 = 0.0;
  double sup_E_ratio = 0.0;  // sup_t E / E0
  double G_max       = 0.0;  // sup_t (E + int D) / E0
  double G_final     = 0.0;
  double G_late_growth = 0.0; // relative growth of G over the post-transient window
  double running_max   = 0.0; // max_t sup_y |perturbation|
  double terminal      = 0.0;
  double terminal_ratio = 0.0;
  double max_mass       = 0.0;
  double max_leak       = 0.0;
  double min_margin     = 0.0;
  bool   bounded        = false;
  bool   pass           = false;
};

// G(t) = (E(t) + int_0^t D) / E0; PASS when G stays below g_bound, grows by
// less than late_tol after the transient and the terminal sup ratio is < 0.2
StabilityVerdict stability_verdict(const std::vector<EnergyReport> &samples,
                                   double E0,
                                   double transient_fraction = 0.25,
                                   double g_bound = 100.0,
                                   double late_tol = 0.05);

// G(t) = (E(t) + int_0^t D) / E0 at every sample, trapezoid in time
std::vector<double> gronwall_ratio(const std::vector<EnergyReport> &samples, double E0);

// max_t G over the whole run / max_t G over the first half - 1, i.e. how much
// the bound grows when t_end doubles
double gronwall_doubling_growth(const std::vector<EnergyReport> &samples, double E0);

} // namespace iashock
