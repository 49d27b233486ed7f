#include "fracsys/spectral.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

#include "fracsys/errors.hpp"

namespace fracsys {

namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

// Average of |xi|^{-2s} over the square [-a, a]^2, via polar coordinates on
// the eight triangles of the square.
double square_average(double a, double s) {
  const int m = 4000;
  const double top = std::numbers::pi / 4.0;
  const double e = -(2.0 - 2.0 * s);
  double acc = 0.0;
  for (int i = 0; i <= m; ++i) {
    double th = top * i / m;
    double w = (i == 0 || i == m) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    acc += w * std::pow(std::cos(th), e);
  }
  double ang = acc * top / (3.0 * m);
  double radial = std::pow(a, 2.0 - 2.0 * s) / (2.0 - 2.0 * s);
  return 8.0 * radial * ang / (4.0 * a * a);
}

}  // namespace

double cell_average_inverse_multiplier(const GridSpec& g) {
  double a = 0.5 * std::numbers::pi / g.L;
  if (g.dim == 1) return std::pow(a, -2.0 * g.s) / (1.0 - 2.0 * g.s);
  return square_average(a, g.s);
}

std::shared_ptr<const Spectral> Spectral::get(const GridSpec& g) {
  static std::mutex m;
  static std::map<std::string, std::shared_ptr<const Spectral>> cache;
  std::lock_guard<std::mutex> lock(m);
  auto key = g.signature();
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  auto sp = std::make_shared<const Spectral>(g);
  cache.emplace(key, sp);
  return sp;
}

Spectral::Spectral(const GridSpec& g) : grid_(g) {
  g.validate();
  const int n = g.n;
  const int half = n / 2 + 1;
  const double dk = std::numbers::pi / g.L;
  nspec_ = (g.dim == 1) ? half : static_cast<std::size_t>(n) * half;

  weight_.resize(nspec_);
  knorm_.resize(nspec_);
  mult_.resize(nspec_);
  inv_mult_.resize(nspec_);
  kaxis_[0].assign(nspec_, 0.0);
  kaxis_[1].assign(nspec_, 0.0);

  auto signed_k = [n](int i) { return i <= n / 2 ? i : i - n; };
  for (std::size_t idx = 0; idx < nspec_; ++idx) {
    int i = 0, j = static_cast<int>(idx);
    if (g.dim == 2) {
      i = static_cast<int>(idx / half);
      j = static_cast<int>(idx % half);
    }
    double kj = dk * j;
    double ki = (g.dim == 2) ? dk * signed_k(i) : 0.0;
    knorm_[idx] = std::sqrt(ki * ki + kj * kj);
    weight_[idx] = (j == 0 || j == n / 2) ? 1.0 : 2.0;
    if (g.dim == 1) {
      kaxis_[0][idx] = (j == n / 2) ? 0.0 : kj;
    } else {
      kaxis_[0][idx] = (i == n / 2) ? 0.0 : ki;
      kaxis_[1][idx] = (j == n / 2) ? 0.0 : kj;
    }
  }

  const double avg_inv = cell_average_inverse_multiplier(g);
  for (std::size_t idx = 0; idx < nspec_; ++idx) {
    if (idx == 0) {
      mult_[0] = (g.zero_mode == ZeroMode::regularized) ? 1.0 / avg_inv : 0.0;
      inv_mult_[0] = avg_inv;
    } else {
      mult_[idx] = std::pow(knorm_[idx], 2.0 * g.s);
      inv_mult_[idx] = 1.0 / mult_[idx];
    }
  }

  std::vector<double> rbuf(g.size());
  std::vector<cplx> cbuf(nspec_);
  auto* in = rbuf.data();
  auto* out = reinterpret_cast<fftw_complex*>(cbuf.data());
  unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  std::lock_guard<std::mutex> lock(planner_mutex());
  if (g.dim == 1) {
    plan_fwd_ = fftw_plan_dft_r2c_1d(n, in, out, flags);
    plan_inv_ = fftw_plan_dft_c2r_1d(n, out, in, flags);
  } else {
    plan_fwd_ = fftw_plan_dft_r2c_2d(n, n, in, out, flags);
    plan_inv_ = fftw_plan_dft_c2r_2d(n, n, out, in, flags);
  }
  if (!plan_fwd_ || !plan_inv_) throw ParameterError("FFTW plan creation failed");
}

Spectral::~Spectral() {
  std::lock_guard<std::mutex> lock(planner_mutex());
  if (plan_fwd_) fftw_destroy_plan(static_cast<fftw_plan>(plan_fwd_));
  if (plan_inv_) fftw_destroy_plan(static_cast<fftw_plan>(plan_inv_));
}

void Spectral::forward(const double* in, cplx* out) const {
  fftw_execute_dft_r2c(static_cast<fftw_plan>(plan_fwd_), const_cast<double*>(in),
                       reinterpret_cast<fftw_complex*>(out));
}

void Spectral::inverse(const cplx* in, double* out) const {
  std::vector<cplx> tmp(in, in + nspec_);
  fftw_execute_dft_c2r(static_cast<fftw_plan>(plan_inv_), reinterpret_cast<fftw_complex*>(tmp.data()),
                       out);
  const double scale = 1.0 / static_cast<double>(grid_.size());
  for (std::size_t i = 0; i < grid_.size(); ++i) out[i] *= scale;
}

}  // namespace fracsys
