#pragma once

// Pointwise and reduction kernels. Each kernel has an OpenMP version in
// fracsys::kernels and a single-threaded reference in fracsys::kernels::serial.
// Reductions sum fixed-size blocks and then add the block partials in order,
// so both versions return bit-identical results for any thread count.

#include <cstddef>
#include <span>

#include "fracsys/field.hpp"

namespace fracsys::kernels {

inline constexpr std::size_t kBlock = 2048;

// x^p with a fast path for small integer p; x >= 0.
double powr(double x, double p);

double sum(std::span<const double> a);
double dot(std::span<const double> a, std::span<const double> b);
double sum_abs_pow(std::span<const double> a, double p);
// sum |u|^alpha |v|^beta, or u_+^alpha v_+^beta when positive_part is set.
double sum_coupling(std::span<const double> u, std::span<const double> v, double alpha,
                    double beta, bool positive_part);
// sum_k w_k m_k Re(a_k conj(b_k)); m may be empty (treated as 1).
double spectral_dot(std::span<const cplx> a, std::span<const cplx> b,
                    std::span<const double> w, std::span<const double> m);

// du = ca * |u|^{alpha-2} u |v|^beta, dv = cb * |u|^alpha |v|^{beta-2} v
// (positive parts when requested).
void coupling_derivative(std::span<const double> u, std::span<const double> v, double alpha,
                         double beta, double ca, double cb, bool positive_part,
                         std::span<double> du, std::span<double> dv);

// Evaluate the periodic trigonometric interpolant of samples on [-L, L) at the
// points t (1-D). `half` is the r2c spectrum of the samples (n/2 + 1 entries).
void trig_eval(std::span<const cplx> half, int n, double L, std::span<const double> t,
               std::span<double> out);

namespace serial {

double sum(std::span<const double> a);
double dot(std::span<const double> a, std::span<const double> b);
double sum_abs_pow(std::span<const double> a, double p);
double sum_coupling(std::span<const double> u, std::span<const double> v, double alpha,
                    double beta, bool positive_part);
double spectral_dot(std::span<const cplx> a, std::span<const cplx> b,
                    std::span<const double> w, std::span<const double> m);
void coupling_derivative(std::span<const double> u, std::span<const double> v, double alpha,
                         double beta, double ca, double cb, bool positive_part,
                         std::span<double> du, std::span<double> dv);
void trig_eval(std::span<const cplx> half, int n, double L, std::span<const double> t,
               std::span<double> out);

}  // namespace serial

int max_threads();
void set_threads(int n);

}  // namespace fracsys::kernels
