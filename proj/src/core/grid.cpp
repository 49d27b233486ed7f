#include "fracsys/grid.hpp"

#include <cmath>
#include <sstream>

#include "fracsys/errors.hpp"

namespace fracsys {

const char* to_string(ZeroMode z) {
  return z == ZeroMode::regularized ? "regularized" : "annihilate";
}

ZeroMode zero_mode_from_string(const std::string& s) {
  if (s == "regularized") return ZeroMode::regularized;
  if (s == "annihilate") return ZeroMode::annihilate;
  throw ParameterError("unknown zero_mode '" + s + "' (expected regularized or annihilate)");
}

void GridSpec::validate() const {
  if (dim != 1 && dim != 2)
    throw ParameterError("grid dim must be 1 or 2, got " + std::to_string(dim));
  if (n < 16 || (n & (n - 1)) != 0)
    throw ParameterError("points_per_axis must be a power of two >= 16, got " + std::to_string(n));
  if (!(L > 0.0) || !std::isfinite(L)) throw ParameterError("box_half_width must be positive");
  if (!(s > 0.0) || !(s < 1.0)) throw ParameterError("s must lie in (0, 1)");
  if (!(dim > 2.0 * s)) throw ParameterError("need N > 2s");
}

std::size_t GridSpec::size() const {
  std::size_t m = 1;
  for (int d = 0; d < dim; ++d) m *= static_cast<std::size_t>(n);
  return m;
}

double GridSpec::cell_volume() const { return std::pow(h(), dim); }

double GridSpec::box_volume() const { return std::pow(2.0 * L, dim); }

std::array<double, 2> GridSpec::point(std::size_t idx) const {
  if (dim == 1) return {coord(static_cast<int>(idx)), 0.0};
  int i = static_cast<int>(idx / n);
  int j = static_cast<int>(idx % n);
  return {coord(i), coord(j)};
}

std::size_t GridSpec::index(int i, int j) const {
  if (dim == 1) return static_cast<std::size_t>(i);
  return static_cast<std::size_t>(i) * n + j;
}

std::string GridSpec::signature() const {
  std::ostringstream os;
  os.precision(17);
  os << "N=" << dim << ";n=" << n << ";L=" << L << ";s=" << s << ";zero_mode=" << to_string(zero_mode);
  return os.str();
}

void require_same_grid(const GridSpec& a, const GridSpec& b, const char* what) {
  if (!(a == b)) throw ParameterError(std::string(what) + ": grid mismatch");
}

}  // namespace fracsys
