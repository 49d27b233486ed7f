#pragma once

#include <array>
#include <cstddef>
#include <string>

namespace fracsys {

// How the k = 0 entry of |xi|^{2s} is treated on the torus.
//   regularized: m_0 = 1 / (cell average of |xi|^{-2s}); forward and inverse
//                multipliers are exact inverses of each other.
//   annihilate:  m_0 = 0 for the forward operator (constants are in the kernel);
//                the inverse still uses the cell average of |xi|^{-2s}.
enum class ZeroMode { regularized, annihilate };

const char* to_string(ZeroMode z);
ZeroMode zero_mode_from_string(const std::string& s);

// Periodic box [-L, L)^N with n points per axis.
struct GridSpec {
  int dim = 1;
  int n = 4096;
  double L = 40.0;
  double s = 0.3;
  ZeroMode zero_mode = ZeroMode::regularized;

  void validate() const;

  std::size_t size() const;
  double h() const { return 2.0 * L / n; }
  double cell_volume() const;
  double box_volume() const;
  double two_star() const { return 2.0 * dim / (dim - 2.0 * s); }
  double coord(int i) const { return -L + i * h(); }
  // Node coordinates of flat index `idx` (row-major, last axis fastest).
  std::array<double, 2> point(std::size_t idx) const;
  std::size_t index(int i, int j = 0) const;

  std::string signature() const;

  bool operator==(const GridSpec& o) const = default;
};

void require_same_grid(const GridSpec& a, const GridSpec& b, const char* what);

}  // namespace fracsys
