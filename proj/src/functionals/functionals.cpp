#include "fracsys/functionals.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "fracsys/kernels.hpp"

namespace fracsys {

std::string to_string(Region r) {
  switch (r) {
    case Region::Omega1: return "Omega1";
    case Region::Omega: return "Omega";
    case Region::Omega2: return "Omega2";
  }
  return "?";
}

double rayleigh_S(const Field& u) {
  const double p = u.grid().two_star();
  double den = integral_power(u, p);
  if (!(den > 0.0)) throw DomainError("rayleigh_S: zero field");
  return hs_norm2(u) / std::pow(den, 2.0 / p);
}

double rayleigh_Sab(const FieldPair& pair, const SystemParams& params) {
  double c = coupling_integral(pair, params);
  if (!(c > 0.0)) throw DomainError("rayleigh_Sab: vanishing coupling");
  return hs_norm2(pair) / std::pow(c, 2.0 / params.two_star());
}

double lemma_S_factor(double alpha, double beta) {
  if (!(alpha > 1.0) || !(beta > 1.0)) throw ParameterError("lemma_S_factor: need alpha, beta > 1");
  const double r = alpha / beta, p = alpha + beta;
  return std::pow(r, beta / p) + std::pow(r, -alpha / p);
}

double lemma_S_factor_oracle(double alpha, double beta) {
  if (!(alpha > 1.0) || !(beta > 1.0)) throw ParameterError("lemma_S_factor_oracle: need alpha, beta > 1");
  const double e = 2.0 * beta / (alpha + beta);
  auto g = [&](double lt) {
    double t = std::exp(lt);
    return (1.0 + t * t) / std::pow(t, e);
  };
  double lt = golden_section(g, std::log(1e-3), std::log(1e3), 1e-13);
  return g(lt);
}

namespace {

double forcing_pairing(const FieldPair& pair, const ForcingPair& forcing) {
  if (forcing.is_zero()) return 0.0;
  return l2_inner(forcing.f, pair.u) + l2_inner(forcing.g, pair.v);
}

}  // namespace

double energy_I(const FieldPair& pair, const ForcingPair& forcing, const SystemParams& params) {
  return 0.5 * hs_norm2(pair) - coupling_integral(pair, params) / params.two_star() -
         forcing_pairing(pair, forcing);
}

double energy_J(const FieldPair& pair, const ForcingPair& forcing, const SystemParams& params) {
  return 0.5 * hs_norm2(pair) - coupling_integral_positive(pair, params) / params.two_star() -
         forcing_pairing(pair, forcing);
}

FieldPair grad_J(const FieldPair& pair, const ForcingPair& forcing, const SystemParams& params) {
  const auto& g = pair.grid();
  const double p = params.two_star();
  Field du(g), dv(g);
  kernels::coupling_derivative(pair.u.values(), pair.v.values(), params.alpha, params.beta, params.alpha / p,
                               params.beta / p, true, du.data(), dv.data());
  if (!forcing.is_zero()) {
    du += forcing.f;
    dv += forcing.g;
  }
  return FieldPair(pair.u - riesz_representative(du), pair.v - riesz_representative(dv));
}

double psi(const FieldPair& pair, const SystemParams& params) {
  return hs_norm2(pair) - (params.two_star() - 1.0) * coupling_integral(pair, params);
}

RegionTag psi_region(const FieldPair& pair, const SystemParams& params, double tol_rel) {
  double n2 = hs_norm2(pair);
  double c = coupling_integral(pair, params);
  RegionTag t;
  t.psi_value = n2 - (params.two_star() - 1.0) * c;
  if (n2 == 0.0 && c == 0.0) {
    t.tag = Region::Omega1;
    t.psi_value = 0.0;
  } else if (std::abs(t.psi_value) <= tol_rel * n2) {
    t.tag = Region::Omega;
  } else {
    t.tag = t.psi_value > 0.0 ? Region::Omega1 : Region::Omega2;
  }
  return t;
}

double nehari_scale(const FieldPair& pair, const SystemParams& params) {
  double c = coupling_integral(pair, params);
  if (!(c > 0.0)) throw DomainError("nehari_scale: vanishing coupling");
  const double p = params.two_star();
  return std::pow(hs_norm2(pair) / ((p - 1.0) * c), 1.0 / (p - 2.0));
}

EnergyReport energy_report(const FieldPair& pair, const ForcingPair& forcing, const SystemParams& params) {
  EnergyReport r;
  r.I_value = energy_I(pair, forcing, params);
  r.J_value = energy_J(pair, forcing, params);
  r.grad_norm = std::sqrt(hs_norm2(grad_J(pair, forcing, params)));
  r.region = psi_region(pair, params);
  return r;
}

double golden_section(const std::function<double(double)>& fn, double a, double b, double tol) {
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - invphi * (b - a), d = a + invphi * (b - a);
  double fc = fn(c), fd = fn(d);
  while (std::abs(b - a) > tol * (1.0 + std::abs(a) + std::abs(b))) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - invphi * (b - a);
      fc = fn(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + invphi * (b - a);
      fd = fn(d);
    }
  }
  return 0.5 * (a + b);
}

double h_tau(double tau, double mu, const SystemParams& params) {
  return (1.0 + tau * tau) / std::pow(mu + std::pow(tau, params.beta), 2.0 / params.two_star());
}

namespace {

constexpr double kTauLo = 1e-8;
constexpr int kTauSamples = 200;

double tau_hi(const SystemParams& params) { return 10.0 * std::sqrt(params.beta / params.alpha); }

std::vector<double> log_grid(double lo, double hi, int n) {
  std::vector<double> t(n);
  for (int i = 0; i < n; ++i) t[i] = lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1));
  return t;
}

void check_mu_small(double mu, const SystemParams& params) {
  if (!(mu > 0.0)) throw ParameterError("tau0: mu must be positive");
  const double q = 2.0 / params.two_star();
  if (!(std::pow(mu, -q) > 2.0 * std::pow(1.0 + mu, -q)))
    throw MuOutOfRangeError("mu too large: h(0+) <= h(1)");
}

}  // namespace

double tau0_solve(double mu, const SystemParams& params) {
  check_mu_small(mu, params);
  const double a = params.alpha, b = params.beta, p = params.two_star();
  auto phi = [&](double t) { return mu * p + a * std::pow(t, b) - b * std::pow(t, b - 2.0); };
  auto dphi = [&](double t) { return a * b * std::pow(t, b - 1.0) - b * (b - 2.0) * std::pow(t, b - 3.0); };

  auto ts = log_grid(kTauLo, tau_hi(params), kTauSamples);
  std::vector<double> roots;
  for (int i = 0; i + 1 < kTauSamples; ++i) {
    double lo = ts[i], hi = ts[i + 1];
    double flo = phi(lo), fhi = phi(hi);
    // h' has the sign of phi; a minimum of h is a - to + crossing.
    if (!(flo < 0.0 && fhi >= 0.0)) continue;
    for (int k = 0; k < 200 && hi - lo > 1e-15 * hi; ++k) {
      double mid = 0.5 * (lo + hi);
      (phi(mid) < 0.0 ? lo : hi) = mid;
    }
    double t = 0.5 * (lo + hi);
    for (int k = 0; k < 3; ++k) {
      double d = dphi(t);
      if (d == 0.0) break;
      double tn = t - phi(t) / d;
      if (!(tn > ts[i] && tn < ts[i + 1])) break;
      t = tn;
    }
    roots.push_back(t);
  }
  if (roots.empty()) throw MuOutOfRangeError("tau0: no positive root minimizes h");

  double best = roots.front();
  for (double r : roots)
    if (h_tau(r, mu, params) < h_tau(best, mu, params)) best = r;
  const double hb = h_tau(best, mu, params);
  const double h0 = std::pow(mu, -2.0 / p);
  if (!(hb < h0)) throw MuOutOfRangeError("tau0: root is not the global minimizer of h");
  for (double t : ts)
    if (h_tau(t, mu, params) < hb * (1.0 - 1e-12))
      throw MuOutOfRangeError("tau0: root is not the global minimizer of h");
  return best;
}

double tau0_golden(double mu, const SystemParams& params) {
  check_mu_small(mu, params);
  const long double a = params.beta, q = 2.0L / params.two_star(), m = mu;
  auto h = [&](long double t) { return (1.0L + t * t) / std::pow(m + std::pow(t, a), q); };
  auto ts = log_grid(kTauLo, tau_hi(params), 4 * kTauSamples);
  std::size_t ib = 0;
  for (std::size_t i = 1; i < ts.size(); ++i)
    if (h(ts[i]) < h(ts[ib])) ib = i;
  long double lo = std::log(static_cast<long double>(ts[ib == 0 ? 0 : ib - 1]));
  long double hi = std::log(static_cast<long double>(ts[std::min(ib + 1, ts.size() - 1)]));
  const long double invphi = (std::sqrt(5.0L) - 1.0L) / 2.0L;
  long double c = hi - invphi * (hi - lo), d = lo + invphi * (hi - lo);
  long double fc = h(std::exp(c)), fd = h(std::exp(d));
  for (int it = 0; it < 200 && hi - lo > 1e-16L; ++it) {
    if (fc < fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - invphi * (hi - lo);
      fc = h(std::exp(c));
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + invphi * (hi - lo);
      fd = h(std::exp(d));
    }
  }
  return static_cast<double>(std::exp(0.5L * (lo + hi)));
}

double c0_threshold(const GridSpec& g, const SystemParams& params) {
  const double N = g.dim, s = g.s;
  return (4.0 * s / (N + 2.0 * s)) * std::pow(params.two_star() - 1.0, -(N - 2.0 * s) / (4.0 * s));
}

double admissibility_threshold(const GridSpec& g, const SystemParams& params, double sab_estimate) {
  return c0_threshold(g, params) * std::pow(sab_estimate, g.dim / (4.0 * g.s));
}

bool forcing_admissible(const ForcingPair& forcing, const SystemParams& params, double sab_estimate) {
  if (forcing.is_zero()) return true;
  const auto& g = forcing.f.grid();
  double d = std::max(dual_norm(forcing.f), dual_norm(forcing.g));
  return d < admissibility_threshold(g, params, sab_estimate);
}

namespace {

// | |x+a|^gamma - |x|^gamma | <= delta |x|^gamma + c |a|^gamma for delta <= gamma 2^{gamma-1}.
double mean_value_constant(double gamma, double delta) {
  double theta = delta / (gamma * std::pow(2.0, gamma - 1.0));
  return gamma * std::pow(1.0 + 1.0 / theta, gamma - 1.0);
}

// X^alpha Y^beta <= cx X^p + cy Y^p. Given the coefficient K of the product and
// the target coefficient on one side, returns the coefficient on the other.
double young_other(double K, double alpha, double beta, double target, bool target_on_y) {
  const double p = alpha + beta;
  if (target_on_y) {
    double eta = std::pow(target * p / (K * beta), beta / p);
    return K * (alpha / p) * std::pow(eta, -p / alpha);
  }
  double eta = std::pow(K * alpha / (target * p), alpha / p);
  return K * (beta / p) * std::pow(eta, p / beta);
}

}  // namespace

double splitting_C_eps(double eps, double alpha, double beta) {
  if (!(eps > 0.0 && eps <= 1.0)) throw ParameterError("splitting_C_eps: need 0 < eps <= 1");
  if (!(alpha > 1.0) || !(beta > 1.0)) throw ParameterError("splitting_C_eps: need alpha, beta > 1");
  const double p = alpha + beta;
  const double two_b = std::pow(2.0, beta - 1.0);
  const double d1 = eps / (4.0 * two_b), d2 = eps / 4.0;
  const double ca = mean_value_constant(alpha, d1), cb = mean_value_constant(beta, d2);

  // |D| <= 2^{beta-1}(|y|^b + |b|^b)(d1 |x|^a + ca |a|^a) + |x|^a (d2 |y|^b + cb |b|^b).
  // The |x|^a|y|^b terms carry eps/2, |x|^a|b|^b from the first bracket eps/4.
  // Mixed terms: |a|^a|y|^b gets eps/2 on |y|^p, |x|^a|b|^b (cb) gets eps/4 on |x|^p.
  const double k_ay = two_b * ca;
  const double k_ab = two_b * ca;
  double coef_a = young_other(k_ay, alpha, beta, eps / 2.0, true) + k_ab * alpha / p;
  double coef_b = (eps / 4.0) * beta / p + k_ab * beta / p + young_other(cb, alpha, beta, eps / 4.0, false);
  return std::max(coef_a, coef_b);
}

}  // namespace fracsys
