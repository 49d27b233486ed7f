#pragma once

// Rayleigh quotients, the energies I and J, the Psi partition, the Nehari
// scale, h(tau) and tau0, and the closed-form constants.

#include <functional>
#include <string>

#include "fracsys/core.hpp"

namespace fracsys {

enum class Region { Omega1, Omega, Omega2 };
std::string to_string(Region r);

struct RegionTag {
  Region tag = Region::Omega1;
  double psi_value = 0.0;
};

struct EnergyReport {
  double I_value = 0.0;
  double J_value = 0.0;
  double grad_norm = 0.0;
  RegionTag region;
};

// ||u||^2 / (int |u|^{2*})^{2/2*}
double rayleigh_S(const Field& u);
// (||u||^2 + ||v||^2) / (int |u|^alpha |v|^beta)^{2/2*}
double rayleigh_Sab(const FieldPair& pair, const SystemParams& params);

// (alpha/beta)^{beta/(alpha+beta)} + (alpha/beta)^{-alpha/(alpha+beta)}
double lemma_S_factor(double alpha, double beta);
// min over t > 0 of (1 + t^2) / t^{2 beta/(alpha+beta)} by golden-section search.
double lemma_S_factor_oracle(double alpha, double beta);

double energy_I(const FieldPair& pair, const ForcingPair& forcing, const SystemParams& params);
double energy_J(const FieldPair& pair, const ForcingPair& forcing, const SystemParams& params);
// Riesz-preconditioned gradient of J:
// (u - R((alpha/2*) u_+^{alpha-1} v_+^beta + f), v - R((beta/2*) u_+^alpha v_+^{beta-1} + g)).
FieldPair grad_J(const FieldPair& pair, const ForcingPair& forcing, const SystemParams& params);

// ||(u,v)||^2 - (2* - 1) int |u|^alpha |v|^beta
double psi(const FieldPair& pair, const SystemParams& params);
inline constexpr double kPsiRelTol = 1e-8;
// |Psi| <= tol_rel * ||(u,v)||^2 is tagged Omega; (0,0) is tagged Omega1.
RegionTag psi_region(const FieldPair& pair, const SystemParams& params, double tol_rel = kPsiRelTol);
double nehari_scale(const FieldPair& pair, const SystemParams& params);

EnergyReport energy_report(const FieldPair& pair, const ForcingPair& forcing, const SystemParams& params);

// Minimizer of a unimodal function on [a, b].
double golden_section(const std::function<double(double)>& fn, double a, double b, double tol = 1e-12);

// (1 + tau^2) / (mu + tau^beta)^{2/2*}
double h_tau(double tau, double mu, const SystemParams& params);
// Positive root of mu 2* + alpha tau^beta - beta tau^{beta-2} that minimizes h.
// Throws MuOutOfRangeError when h(0+) <= h(1) or no root is the global minimizer.
double tau0_solve(double mu, const SystemParams& params);
// Minimizer of h by golden-section search on a log scale.
double tau0_golden(double mu, const SystemParams& params);

// (4s/(N+2s)) (2* - 1)^{-(N-2s)/(4s)}
double c0_threshold(const GridSpec& g, const SystemParams& params);
// C0 * sab^{N/(4s)}
double admissibility_threshold(const GridSpec& g, const SystemParams& params, double sab_estimate);
bool forcing_admissible(const ForcingPair& forcing, const SystemParams& params, double sab_estimate);

// Constant for
// ||x+a|^alpha |y+b|^beta - |x|^alpha |y|^beta| <= eps (|x|^p + |y|^p) + C (|a|^p + |b|^p),
// p = alpha + beta, assembled from elementary Young and mean-value bounds. Needs 0 < eps <= 1.
double splitting_C_eps(double eps, double alpha, double beta);

}  // namespace fracsys
