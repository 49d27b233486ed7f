#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "fracsys/core.hpp"

namespace fracsys {

namespace {

template <class T>
void put_le(std::ostream& os, T x) {
  unsigned char b[sizeof(T)];
  std::memcpy(b, &x, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
  os.write(reinterpret_cast<const char*>(b), sizeof(T));
}

template <class T>
T get_le(std::istream& is) {
  unsigned char b[sizeof(T)];
  if (!is.read(reinterpret_cast<char*>(b), sizeof(T))) throw ParameterError("read_field: truncated file");
  if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
  T x;
  std::memcpy(&x, b, sizeof(T));
  return x;
}

}  // namespace

void write_field(const std::string& path, const Field& u, const std::string& name) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ParameterError("write_field: cannot open " + path);
  const auto& g = u.grid();
  put_le<std::int32_t>(os, g.dim);
  put_le<std::int32_t>(os, g.n);
  put_le<double>(os, g.L);
  put_le<double>(os, g.s);
  for (double x : u.values()) put_le<double>(os, x);

  nlohmann::json meta;
  meta["name"] = name;
  meta["dim"] = g.dim;
  meta["points_per_axis"] = g.n;
  meta["box_half_width"] = g.L;
  meta["s"] = g.s;
  meta["zero_mode"] = to_string(g.zero_mode);
  meta["count"] = u.size();
  meta["layout"] = "int32 dim, int32 n, float64 L, float64 s, then row-major float64 values; little endian";
  meta["min"] = u.min();
  meta["max"] = u.max();
  std::ofstream js(path + ".json");
  js << meta.dump(2) << "\n";
}

Field read_field(const std::string& path, ZeroMode zero_mode) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ParameterError("read_field: cannot open " + path);
  GridSpec g;
  g.dim = get_le<std::int32_t>(is);
  g.n = get_le<std::int32_t>(is);
  g.L = get_le<double>(is);
  g.s = get_le<double>(is);
  g.zero_mode = zero_mode;
  g.validate();
  std::vector<double> vals(g.size());
  for (auto& x : vals) x = get_le<double>(is);
  return Field(g, std::move(vals));
}

void write_pair(const std::string& stem, const FieldPair& p) {
  write_field(stem + "_u.bin", p.u, "u");
  write_field(stem + "_v.bin", p.v, "v");
}

}  // namespace fracsys
