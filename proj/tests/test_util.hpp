#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>

#include "fracsys/core.hpp"

namespace testutil {

using namespace fracsys;

inline GridSpec desk_grid() { return GridSpec{}; }

inline GridSpec small_grid(int n = 1024, double L = 20.0) {
  GridSpec g;
  g.n = n;
  g.L = L;
  return g;
}

inline double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

inline Field gaussian(const GridSpec& g, double c, double w, double a = 1.0) {
  return sample(g, [&](double x, double) { return a * std::exp(-(x - c) * (x - c) / (2.0 * w * w)); });
}

// Sum of 1..4 Gaussians with seeded parameters inside the inner half-box.
inline Field random_field(const GridSpec& g, std::mt19937_64& rng, bool positive = false) {
  std::uniform_int_distribution<int> count(1, 4);
  std::uniform_real_distribution<double> c(-0.3 * g.L, 0.3 * g.L), w(0.5, 2.5), a(-1.0, 1.0);
  Field out(g);
  int k = count(rng);
  for (int i = 0; i < k; ++i) {
    double amp = a(rng);
    if (positive) amp = 0.2 + std::abs(amp);
    out += gaussian(g, c(rng), w(rng), amp);
  }
  return out;
}

inline double max_abs_diff(const Field& a, const Field& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

inline double max_abs(const Field& a) {
  double m = 0.0;
  for (double x : a.values()) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace testutil
