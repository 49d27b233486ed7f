#include <cmath>
#include <numbers>

#include "fracsys/decomposition.hpp"
#include "fracsys/kernels.hpp"

namespace fracsys {

std::vector<double> dyadic_ladder(const GridSpec& g) {
  std::vector<double> r;
  for (double R = 2.0 * g.h(); R <= 0.5 * g.L * (1.0 + 1e-12); R *= 2.0) r.push_back(R);
  return r;
}

namespace {

double ball_volume(int dim, double R) { return dim == 1 ? 2.0 * R : std::numbers::pi * R * R; }

// Fourier transform of the indicator of B_R at |k|.
double ball_hat(int dim, double k, double R) {
  if (k == 0.0) return ball_volume(dim, R);
  if (dim == 1) return 2.0 * std::sin(k * R) / k;
  return 2.0 * std::numbers::pi * R * std::cyl_bessel_j(1.0, k * R) / k;
}

template <bool Par>
MorreyScan scan_density(const Field& rho, const std::vector<double>& radii) {
  const auto& g = rho.grid();
  if (radii.empty()) throw ParameterError("morrey_scan: empty radius ladder");
  for (double R : radii)
    if (!(R > 0.0) || R > g.L) throw ParameterError("morrey_scan: radius outside (0, L]");
  auto sp = Spectral::get(g);
  const auto spec = fft(rho);
  const auto kn = sp->knorm();
  const double e = g.dim - 2.0 * g.s;

  struct Best {
    double value = -1.0;
    std::size_t index = 0;
  };
  std::vector<Best> best(radii.size());
  auto run = [&](std::size_t r) {
    const double R = radii[r];
    std::vector<cplx> conv(spec.size());
    for (std::size_t k = 0; k < spec.size(); ++k) conv[k] = spec[k] * ball_hat(g.dim, kn[k], R);
    std::vector<double> ball(g.size());
    sp->inverse(conv.data(), ball.data());
    const double f = std::pow(R, e) / ball_volume(g.dim, R);
    Best b;
    for (std::size_t i = 0; i < ball.size(); ++i) {
      double v = f * ball[i];
      if (v > b.value) b = {v, i};
    }
    best[r] = b;
  };
  if constexpr (Par) {
#pragma omp parallel for schedule(dynamic)
    for (long r = 0; r < static_cast<long>(radii.size()); ++r) run(static_cast<std::size_t>(r));
  } else {
    for (std::size_t r = 0; r < radii.size(); ++r) run(r);
  }

  MorreyScan out;
  std::size_t rb = 0;
  for (std::size_t r = 1; r < radii.size(); ++r)
    if (best[r].value > best[rb].value) rb = r;
  out.value = std::max(best[rb].value, 0.0);
  out.argmax_index = best[rb].index;
  out.argmax_center = g.point(best[rb].index);
  out.argmax_radius = radii[rb];
  return out;
}

Field square(const Field& u) {
  Field out(u.grid());
  auto& d = out.data();
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = u[i] * u[i];
  return out;
}

Field pair_density(const FieldPair& p) {
  require_same_grid(p.u.grid(), p.v.grid(), "morrey_scan");
  Field out(p.grid());
  auto& d = out.data();
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = p.u[i] * p.u[i] + p.v[i] * p.v[i];
  return out;
}

}  // namespace

MorreyScan morrey_scan(const Field& u, const std::vector<double>& radii) {
  return scan_density<true>(square(u), radii);
}

MorreyScan morrey_scan(const FieldPair& pair, const std::vector<double>& radii) {
  return scan_density<true>(pair_density(pair), radii);
}

MorreyScan morrey_scan(const FieldPair& pair) { return morrey_scan(pair, dyadic_ladder(pair.grid())); }

namespace serial {
MorreyScan morrey_scan(const FieldPair& pair, const std::vector<double>& radii) {
  return scan_density<false>(pair_density(pair), radii);
}
}  // namespace serial

double morrey_norm(const Field& u) { return std::sqrt(morrey_scan(u, dyadic_ladder(u.grid())).value); }

double morrey_pair_norm(const FieldPair& pair) {
  auto radii = dyadic_ladder(pair.grid());
  return std::sqrt(morrey_scan(pair.u, radii).value + morrey_scan(pair.v, radii).value);
}

double lp_pair_norm(const FieldPair& pair) {
  const double p = pair.grid().two_star();
  double a = std::pow(integral_power(pair.u, p), 2.0 / p);
  double b = std::pow(integral_power(pair.v, p), 2.0 / p);
  return std::sqrt(a + b);
}

double rho_star(int dim, double s) {
  if (dim != 1 && dim != 2) throw ParameterError("rho_star: dim must be 1 or 2");
  const double e = dim - 2.0 * s;
  auto ball_integral = [&](double R) {
    if (dim == 2) {
      // 2 pi int_0^R r (1 + r^2)^{-e} dr
      return std::numbers::pi * (std::pow(1.0 + R * R, 1.0 - e) - 1.0) / (1.0 - e);
    }
    const int m = 4000;
    double acc = 0.0;
    for (int i = 0; i <= m; ++i) {
      double r = R * i / m;
      double w = (i == 0 || i == m) ? 1.0 : (i % 2 ? 4.0 : 2.0);
      acc += w * std::pow(1.0 + r * r, -e);
    }
    return 2.0 * acc * R / (3.0 * m);
  };
  auto neg = [&](double lr) {
    double R = std::exp(lr);
    return -std::pow(R, e) * ball_integral(R) / ball_volume(dim, R);
  };
  return std::exp(golden_section(neg, std::log(0.1), std::log(100.0), 1e-10));
}

double brezis_lieb_defect(const FieldPair& a, const FieldPair& b, const SystemParams& params) {
  return std::abs(coupling_integral(a + b, params) - coupling_integral(a, params) - coupling_integral(b, params));
}

double interpolation_ratio(const FieldPair& pair, double theta) {
  const double p = pair.grid().two_star();
  if (!(theta >= 2.0 / p - 1e-15 && theta < 1.0)) throw ParameterError("interpolation_ratio: theta outside [2/2*, 1)");
  double hs = std::sqrt(hs_norm2(pair));
  if (!(hs > 0.0)) throw DomainError("interpolation_ratio: zero pair");
  double mo = morrey_pair_norm(pair);
  if (!(mo > 0.0)) throw DomainError("interpolation_ratio: zero pair");
  return lp_pair_norm(pair) / (std::pow(hs, theta) * std::pow(mo, 1.0 - theta));
}

double morrey_embedding_ratio(const FieldPair& pair) {
  double lp = lp_pair_norm(pair);
  if (!(lp > 0.0)) throw DomainError("morrey_embedding_ratio: zero pair");
  return morrey_pair_norm(pair) / lp;
}

}  // namespace fracsys
