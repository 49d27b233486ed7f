#include "fracsys/kernels.hpp"

#include <omp.h>

#include <cmath>
#include <numbers>
#include <vector>

namespace fracsys::kernels {

double powr(double x, double p) {
  if (p == 0.0) return 1.0;
  if (p == 1.0) return x;
  if (p == 2.0) return x * x;
  if (p == 3.0) return x * x * x;
  if (p == 4.0) {
    double x2 = x * x;
    return x2 * x2;
  }
  if (p == 5.0) {
    double x2 = x * x;
    return x2 * x2 * x;
  }
  if (p == 1.5) return x * std::sqrt(x);
  if (p == 2.5) return x * x * std::sqrt(x);
  return std::pow(x, p);
}

namespace {

template <bool Par, class Term>
double block_reduce(std::size_t n, Term&& term) {
  const std::size_t nb = (n + kBlock - 1) / kBlock;
  std::vector<double> part(nb, 0.0);
  auto run = [&](std::size_t b) {
    std::size_t lo = b * kBlock, hi = std::min(n, lo + kBlock);
    double acc = 0.0;
    for (std::size_t i = lo; i < hi; ++i) acc += term(i);
    part[b] = acc;
  };
  if constexpr (Par) {
#pragma omp parallel for schedule(static)
    for (long b = 0; b < static_cast<long>(nb); ++b) run(static_cast<std::size_t>(b));
  } else {
    for (std::size_t b = 0; b < nb; ++b) run(b);
  }
  double acc = 0.0;
  for (double x : part) acc += x;
  return acc;
}

template <bool Par, class Body>
void for_each(std::size_t n, Body&& body) {
  if constexpr (Par) {
#pragma omp parallel for schedule(static)
    for (long i = 0; i < static_cast<long>(n); ++i) body(static_cast<std::size_t>(i));
  } else {
    for (std::size_t i = 0; i < n; ++i) body(i);
  }
}

template <bool Par>
double sum_t(std::span<const double> a) {
  return block_reduce<Par>(a.size(), [&](std::size_t i) { return a[i]; });
}

template <bool Par>
double dot_t(std::span<const double> a, std::span<const double> b) {
  return block_reduce<Par>(a.size(), [&](std::size_t i) { return a[i] * b[i]; });
}

template <bool Par>
double sum_abs_pow_t(std::span<const double> a, double p) {
  return block_reduce<Par>(a.size(), [&](std::size_t i) { return powr(std::abs(a[i]), p); });
}

template <bool Par>
double sum_coupling_t(std::span<const double> u, std::span<const double> v, double alpha,
                      double beta, bool positive_part) {
  return block_reduce<Par>(u.size(), [&](std::size_t i) {
    double a = positive_part ? std::max(u[i], 0.0) : std::abs(u[i]);
    double b = positive_part ? std::max(v[i], 0.0) : std::abs(v[i]);
    if (a == 0.0 || b == 0.0) return 0.0;
    return powr(a, alpha) * powr(b, beta);
  });
}

template <bool Par>
double spectral_dot_t(std::span<const cplx> a, std::span<const cplx> b, std::span<const double> w,
                      std::span<const double> m) {
  const bool has_m = !m.empty();
  return block_reduce<Par>(a.size(), [&](std::size_t k) {
    double re = a[k].real() * b[k].real() + a[k].imag() * b[k].imag();
    return w[k] * (has_m ? m[k] : 1.0) * re;
  });
}

template <bool Par>
void coupling_derivative_t(std::span<const double> u, std::span<const double> v, double alpha,
                           double beta, double ca, double cb, bool positive_part,
                           std::span<double> du, std::span<double> dv) {
  for_each<Par>(u.size(), [&](std::size_t i) {
    double x = u[i], y = v[i];
    if (positive_part) {
      x = std::max(x, 0.0);
      y = std::max(y, 0.0);
    }
    double ax = std::abs(x), ay = std::abs(y);
    if (ax == 0.0 || ay == 0.0) {
      du[i] = 0.0;
      dv[i] = 0.0;
      return;
    }
    double pa = powr(ax, alpha - 1.0), pb = powr(ay, beta - 1.0);
    du[i] = ca * std::copysign(pa, x) * (pb * ay);
    dv[i] = cb * (pa * ax) * std::copysign(pb, y);
  });
}

template <bool Par>
void trig_eval_t(std::span<const cplx> half, int n, double L, std::span<const double> t,
                 std::span<double> out) {
  const int top = n / 2;
  std::vector<cplx> a(top + 1);
  a[0] = half[0];
  for (int k = 1; k < top; ++k) a[k] = 2.0 * half[k];
  a[top] = cplx(half[top].real(), 0.0);
  const double inv_n = 1.0 / n;
  for_each<Par>(t.size(), [&](std::size_t p) {
    double ph = std::numbers::pi * (t[p] + L) / L;
    cplx z(std::cos(ph), std::sin(ph));
    cplx acc = a[top];
    for (int k = top - 1; k >= 0; --k) acc = acc * z + a[k];
    out[p] = acc.real() * inv_n;
  });
}

}  // namespace

double sum(std::span<const double> a) { return sum_t<true>(a); }
double dot(std::span<const double> a, std::span<const double> b) { return dot_t<true>(a, b); }
double sum_abs_pow(std::span<const double> a, double p) { return sum_abs_pow_t<true>(a, p); }
double sum_coupling(std::span<const double> u, std::span<const double> v, double alpha, double beta,
                    bool positive_part) {
  return sum_coupling_t<true>(u, v, alpha, beta, positive_part);
}
double spectral_dot(std::span<const cplx> a, std::span<const cplx> b, std::span<const double> w,
                    std::span<const double> m) {
  return spectral_dot_t<true>(a, b, w, m);
}
void coupling_derivative(std::span<const double> u, std::span<const double> v, double alpha,
                         double beta, double ca, double cb, bool positive_part,
                         std::span<double> du, std::span<double> dv) {
  coupling_derivative_t<true>(u, v, alpha, beta, ca, cb, positive_part, du, dv);
}
void trig_eval(std::span<const cplx> half, int n, double L, std::span<const double> t,
               std::span<double> out) {
  trig_eval_t<true>(half, n, L, t, out);
}

namespace serial {

double sum(std::span<const double> a) { return sum_t<false>(a); }
double dot(std::span<const double> a, std::span<const double> b) { return dot_t<false>(a, b); }
double sum_abs_pow(std::span<const double> a, double p) { return sum_abs_pow_t<false>(a, p); }
double sum_coupling(std::span<const double> u, std::span<const double> v, double alpha, double beta,
                    bool positive_part) {
  return sum_coupling_t<false>(u, v, alpha, beta, positive_part);
}
double spectral_dot(std::span<const cplx> a, std::span<const cplx> b, std::span<const double> w,
                    std::span<const double> m) {
  return spectral_dot_t<false>(a, b, w, m);
}
void coupling_derivative(std::span<const double> u, std::span<const double> v, double alpha,
                         double beta, double ca, double cb, bool positive_part,
                         std::span<double> du, std::span<double> dv) {
  coupling_derivative_t<false>(u, v, alpha, beta, ca, cb, positive_part, du, dv);
}
void trig_eval(std::span<const cplx> half, int n, double L, std::span<const double> t,
               std::span<double> out) {
  trig_eval_t<false>(half, n, L, t, out);
}

}  // namespace serial

int max_threads() { return omp_get_max_threads(); }

void set_threads(int n) {
  if (n > 0) omp_set_num_threads(n);
}

}  // namespace fracsys::kernels
