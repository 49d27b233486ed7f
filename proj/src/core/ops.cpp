#include <cmath>

#include "fracsys/core.hpp"
#include "fracsys/kernels.hpp"

namespace fracsys {

std::vector<cplx> fft(const Field& u) {
  if (const auto* c = u.cached_spectrum()) return *c;
  auto sp = Spectral::get(u.grid());
  std::vector<cplx> out(sp->spectral_size());
  sp->forward(u.ptr(), out.data());
  return out;
}

Field ifft(const GridSpec& g, const std::vector<cplx>& spec) {
  auto sp = Spectral::get(g);
  Field out(g);
  sp->inverse(spec.data(), out.data().data());
  return out;
}

Field apply_multiplier(const Field& u, std::span<const double> m) {
  auto spec = fft(u);
  for (std::size_t k = 0; k < spec.size(); ++k) spec[k] *= m[k];
  return ifft(u.grid(), spec);
}

Field frac_laplacian(const Field& u, double s) {
  if (s != u.grid().s) throw ParameterError("frac_laplacian: exponent does not match grid");
  return frac_laplacian(u);
}

Field frac_laplacian(const Field& u) {
  return apply_multiplier(u, Spectral::get(u.grid())->multiplier());
}

Field riesz_representative(const Field& f) {
  return apply_multiplier(f, Spectral::get(f.grid())->inverse_multiplier());
}

double hs_inner(const Field& a, const Field& b) {
  require_same_grid(a.grid(), b.grid(), "hs_inner");
  auto sp = Spectral::get(a.grid());
  auto fa = fft(a);
  auto fb = (&a == &b) ? fa : fft(b);
  const auto& g = a.grid();
  double scale = g.cell_volume() / static_cast<double>(g.size());
  return scale * kernels::spectral_dot(fa, fb, sp->hermitian_weight(), sp->multiplier());
}

double hs_norm2(const Field& a) { return hs_inner(a, a); }

double hs_inner(const FieldPair& a, const FieldPair& b) {
  return hs_inner(a.u, b.u) + hs_inner(a.v, b.v);
}

double hs_norm2(const FieldPair& a) { return hs_norm2(a.u) + hs_norm2(a.v); }

double dual_norm(const Field& f) {
  double q = l2_inner(f, riesz_representative(f));
  return std::sqrt(std::max(q, 0.0));
}

double integral(const Field& u) { return u.grid().cell_volume() * kernels::sum(u.values()); }

double l2_inner(const Field& a, const Field& b) {
  require_same_grid(a.grid(), b.grid(), "l2_inner");
  return a.grid().cell_volume() * kernels::dot(a.values(), b.values());
}

double integral_power(const Field& u, double p) {
  if (!(p >= 1.0) || !std::isfinite(p)) throw ParameterError("integral_power: need finite p >= 1");
  return u.grid().cell_volume() * kernels::sum_abs_pow(u.values(), p);
}

double coupling_integral(const FieldPair& pair, const SystemParams& params) {
  return pair.grid().cell_volume() *
         kernels::sum_coupling(pair.u.values(), pair.v.values(), params.alpha, params.beta, false);
}

double coupling_integral_positive(const FieldPair& pair, const SystemParams& params) {
  return pair.grid().cell_volume() *
         kernels::sum_coupling(pair.u.values(), pair.v.values(), params.alpha, params.beta, true);
}

Field partial_derivative(const Field& u, int axis) {
  if (axis < 0 || axis >= u.grid().dim) throw ParameterError("partial_derivative: bad axis");
  auto sp = Spectral::get(u.grid());
  auto spec = fft(u);
  auto k = sp->wavenumber(axis);
  for (std::size_t i = 0; i < spec.size(); ++i) spec[i] *= cplx(0.0, k[i]);
  return ifft(u.grid(), spec);
}

}  // namespace fracsys
