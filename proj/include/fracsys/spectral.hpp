#pragma once

#include <memory>
#include <span>
#include <vector>

#include "fracsys/field.hpp"
#include "fracsys/grid.hpp"

namespace fracsys {

// FFTW r2c/c2r plans and the Fourier multipliers for one grid.
// Instances are shared and immutable; execution is thread-safe.
class Spectral {
 public:
  static std::shared_ptr<const Spectral> get(const GridSpec& g);

  explicit Spectral(const GridSpec& g);
  ~Spectral();
  Spectral(const Spectral&) = delete;
  Spectral& operator=(const Spectral&) = delete;

  const GridSpec& grid() const { return grid_; }
  std::size_t real_size() const { return grid_.size(); }
  std::size_t spectral_size() const { return nspec_; }

  // Unnormalized forward transform.
  void forward(const double* in, cplx* out) const;
  // Inverse transform including the 1/n^N factor. `in` is not modified.
  void inverse(const cplx* in, double* out) const;

  // 1 for entries that stand for themselves (last-axis k = 0 and Nyquist),
  // 2 for entries that also stand for their conjugate partner.
  std::span<const double> hermitian_weight() const { return weight_; }
  std::span<const double> knorm() const { return knorm_; }
  // Signed wavenumber along `axis` for each spectral entry (Nyquist -> 0).
  std::span<const double> wavenumber(int axis) const { return kaxis_[axis]; }
  // |xi|^{2s} with the zero-mode rule applied.
  std::span<const double> multiplier() const { return mult_; }
  // 1/m_k, with the cell average of |xi|^{-2s} at k = 0.
  std::span<const double> inverse_multiplier() const { return inv_mult_; }

  // Cell average of |xi|^{-2s} over the wavenumber cell around 0.
  double zero_mode_inverse() const { return inv_mult_[0]; }

 private:
  GridSpec grid_;
  std::size_t nspec_ = 0;
  void* plan_fwd_ = nullptr;
  void* plan_inv_ = nullptr;
  std::vector<double> weight_, knorm_, mult_, inv_mult_;
  std::vector<double> kaxis_[2];
};

double cell_average_inverse_multiplier(const GridSpec& g);

}  // namespace fracsys
