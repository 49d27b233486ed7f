#include "fracsys/field.hpp"

#include <algorithm>
#include <cmath>

#include "fracsys/errors.hpp"
#include "fracsys/spectral.hpp"

namespace fracsys {

Field::Field(const GridSpec& g) : grid_(g), values_(g.size(), 0.0) {}

Field::Field(const GridSpec& g, std::vector<double> values) : grid_(g), values_(std::move(values)) {
  if (values_.size() != g.size()) throw ParameterError("Field: value count does not match grid");
}

void Field::cache_spectrum() {
  auto sp = Spectral::get(grid_);
  auto out = std::make_shared<std::vector<cplx>>(sp->spectral_size());
  sp->forward(values_.data(), out->data());
  spectrum_ = std::move(out);
}

double Field::max() const { return *std::max_element(values_.begin(), values_.end()); }

double Field::min() const { return *std::min_element(values_.begin(), values_.end()); }

bool Field::finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double x) { return std::isfinite(x); });
}

Field& Field::operator+=(const Field& o) {
  require_same_grid(grid_, o.grid_, "Field +=");
  auto& d = data();
  for (std::size_t i = 0; i < d.size(); ++i) d[i] += o.values_[i];
  return *this;
}

Field& Field::operator-=(const Field& o) {
  require_same_grid(grid_, o.grid_, "Field -=");
  auto& d = data();
  for (std::size_t i = 0; i < d.size(); ++i) d[i] -= o.values_[i];
  return *this;
}

Field& Field::operator*=(double a) {
  for (auto& x : data()) x *= a;
  return *this;
}

Field& Field::axpy(double a, const Field& x) {
  require_same_grid(grid_, x.grid_, "Field axpy");
  auto& d = data();
  for (std::size_t i = 0; i < d.size(); ++i) d[i] += a * x.values_[i];
  return *this;
}

Field operator+(Field a, const Field& b) { return a += b; }
Field operator-(Field a, const Field& b) { return a -= b; }
Field operator*(double a, Field x) { return x *= a; }

FieldPair::FieldPair(Field u_, Field v_) : u(std::move(u_)), v(std::move(v_)) {
  require_same_grid(u.grid(), v.grid(), "FieldPair");
}

FieldPair& FieldPair::operator+=(const FieldPair& o) {
  u += o.u;
  v += o.v;
  return *this;
}

FieldPair& FieldPair::operator-=(const FieldPair& o) {
  u -= o.u;
  v -= o.v;
  return *this;
}

FieldPair& FieldPair::operator*=(double a) {
  u *= a;
  v *= a;
  return *this;
}

FieldPair& FieldPair::axpy(double a, const FieldPair& x) {
  u.axpy(a, x.u);
  v.axpy(a, x.v);
  return *this;
}

FieldPair operator+(FieldPair a, const FieldPair& b) { return a += b; }
FieldPair operator-(FieldPair a, const FieldPair& b) { return a -= b; }
FieldPair operator*(double a, FieldPair x) { return x *= a; }

ForcingPair::ForcingPair(Field f_, Field g_) : f(std::move(f_)), g(std::move(g_)) {
  require_same_grid(f.grid(), g.grid(), "ForcingPair");
}

ForcingPair ForcingPair::zero(const GridSpec& grid) { return ForcingPair(Field(grid), Field(grid)); }

void ForcingPair::validate(double support_tol) const {
  if (f.min() < 0.0 || g.min() < 0.0) throw ParameterError("forcing must be nonnegative");
  double fm = f.max(), gm = g.max();
  for (std::size_t i = 0; i < f.size(); ++i) {
    bool lone_f = f[i] > support_tol * fm && !(g[i] > 0.0);
    bool lone_g = g[i] > support_tol * gm && !(f[i] > 0.0);
    if (lone_f || lone_g) throw ParameterError("forcing supports of f and g differ");
  }
}

bool ForcingPair::is_zero() const {
  for (std::size_t i = 0; i < f.size(); ++i)
    if (f[i] != 0.0 || g[i] != 0.0) return false;
  return true;
}

void SystemParams::validate(const GridSpec& g) const {
  if (!(alpha > 1.0) || !(beta > 1.0)) throw ParameterError("alpha and beta must exceed 1");
  if (std::abs(alpha + beta - g.two_star()) > 1e-12)
    throw ParameterError("alpha + beta must equal 2N/(N-2s)");
}

SystemParams SystemParams::from_alpha(const GridSpec& g, double alpha) {
  SystemParams p{alpha, g.two_star() - alpha};
  p.validate(g);
  return p;
}

}  // namespace fracsys
