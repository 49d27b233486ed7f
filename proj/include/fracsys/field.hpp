#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "fracsys/grid.hpp"

namespace fracsys {

using cplx = std::complex<double>;

// Real scalar function sampled on a grid.
//
// The spectral cache is filled explicitly with cache_spectrum(); any mutable
// access through data() drops it. Const operations never write to the field,
// so a Field can be read from several threads at once.
class Field {
 public:
  Field() = default;
  explicit Field(const GridSpec& g);
  Field(const GridSpec& g, std::vector<double> values);

  const GridSpec& grid() const { return grid_; }
  std::size_t size() const { return values_.size(); }
  std::span<const double> values() const { return values_; }
  const double* ptr() const { return values_.data(); }
  double operator[](std::size_t i) const { return values_[i]; }

  std::vector<double>& data() {
    spectrum_.reset();
    return values_;
  }

  void cache_spectrum();
  const std::vector<cplx>* cached_spectrum() const { return spectrum_.get(); }

  double max() const;
  double min() const;
  bool finite() const;

  Field& operator+=(const Field& o);
  Field& operator-=(const Field& o);
  Field& operator*=(double a);
  // this += a * x
  Field& axpy(double a, const Field& x);

 private:
  GridSpec grid_{};
  std::vector<double> values_;
  std::shared_ptr<const std::vector<cplx>> spectrum_;
};

Field operator+(Field a, const Field& b);
Field operator-(Field a, const Field& b);
Field operator*(double a, Field x);

struct FieldPair {
  Field u;
  Field v;

  FieldPair() = default;
  FieldPair(Field u_, Field v_);
  explicit FieldPair(const GridSpec& g) : u(g), v(g) {}

  const GridSpec& grid() const { return u.grid(); }

  FieldPair& operator+=(const FieldPair& o);
  FieldPair& operator-=(const FieldPair& o);
  FieldPair& operator*=(double a);
  FieldPair& axpy(double a, const FieldPair& x);
};

FieldPair operator+(FieldPair a, const FieldPair& b);
FieldPair operator-(FieldPair a, const FieldPair& b);
FieldPair operator*(double a, FieldPair x);

// Nonnegative forcing densities acting by integration.
struct ForcingPair {
  Field f;
  Field g;

  ForcingPair() = default;
  ForcingPair(Field f_, Field g_);
  static ForcingPair zero(const GridSpec& grid);

  // f, g >= 0, and no node where one density exceeds tol * its max while the
  // other is zero.
  void validate(double support_tol = 1e-12) const;
  bool is_zero() const;
};

// Critical coupling alpha + beta = 2*_s.
struct SystemParams {
  double alpha = 2.0;
  double beta = 3.0;

  double two_star() const { return alpha + beta; }
  void validate(const GridSpec& g) const;
  static SystemParams from_alpha(const GridSpec& g, double alpha);
};

}  // namespace fracsys
