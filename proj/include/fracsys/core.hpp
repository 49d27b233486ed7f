#pragma once

// Discrete calculus on the periodic box: the fractional Laplacian as a Fourier
// multiplier, the H^s inner product, dual norms, and quadratures.

#include <string>
#include <vector>

#include "fracsys/errors.hpp"
#include "fracsys/field.hpp"
#include "fracsys/grid.hpp"
#include "fracsys/spectral.hpp"

namespace fracsys {

std::vector<cplx> fft(const Field& u);
Field ifft(const GridSpec& g, const std::vector<cplx>& spec);

Field apply_multiplier(const Field& u, std::span<const double> m);

// (-Delta)^s u; s must be the grid's exponent.
Field frac_laplacian(const Field& u, double s);
Field frac_laplacian(const Field& u);
// phi with phi_hat = f_hat / m.
Field riesz_representative(const Field& f);

double hs_inner(const Field& a, const Field& b);
double hs_norm2(const Field& a);
double hs_inner(const FieldPair& a, const FieldPair& b);
double hs_norm2(const FieldPair& a);

double dual_norm(const Field& f);

// Rectangle-rule quadratures.
double integral(const Field& u);
double l2_inner(const Field& a, const Field& b);
double integral_power(const Field& u, double p);
double coupling_integral(const FieldPair& pair, const SystemParams& params);
// Same with u_+^alpha v_+^beta.
double coupling_integral_positive(const FieldPair& pair, const SystemParams& params);

// Spectral derivative along `axis`.
Field partial_derivative(const Field& u, int axis);

template <class F>
Field sample(const GridSpec& g, F&& fn) {
  Field out(g);
  auto& d = out.data();
  for (std::size_t i = 0; i < d.size(); ++i) {
    auto p = g.point(i);
    d[i] = fn(p[0], p[1]);
  }
  return out;
}

// Binary field format: int32 dim, int32 n, float64 L, float64 s (little
// endian), then n^dim float64 values in row-major order. A JSON sidecar with
// metadata is written next to it as <path>.json.
void write_field(const std::string& path, const Field& u, const std::string& name = "");
Field read_field(const std::string& path, ZeroMode zero_mode = ZeroMode::regularized);
void write_pair(const std::string& stem, const FieldPair& p);

}  // namespace fracsys
